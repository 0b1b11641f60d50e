#pragma once

// Frame- and sequence-level plausibility and accuracy metrics.
//
// Penetration depth (PD) compares a noisy hand mesh against its ground-truth
// counterpart: over ground-truth contact vertices, the deepest shift along
// the inward object normal, after discarding vertices whose tangential shift
// exceeds c_tangent (those moved so far the local comparison is meaningless).

#include <stdexcept>
#include <vector>

#include "hoi/dynamics.hpp"
#include "hoi/field.hpp"
#include "hoi/hand.hpp"
#include "hoi/mesh.hpp"

namespace hoi {

struct MetricThresholds {
  double c_contact = 0.002;  // m
  double c_tangent = 0.01;   // m
  double c_pd = 0.015;       // m, plausible-rate PD threshold
  double c_fe = 0.1;         // plausible-rate FE threshold
  double mu = 0.8;
};

inline double penetration_depth(const HandMesh& noisy, const HandMesh& clean,
                                const TriMesh& object, double c_contact = 0.002,
                                double c_tangent = 0.01) {
  const auto& nv = noisy.mesh.vertices;
  const auto& cv = clean.mesh.vertices;
  if (nv.size() != cv.size() || noisy.mesh.faces != clean.mesh.faces)
    throw std::invalid_argument("penetration_depth: hand topology mismatch");
  double depth = 0.0;
  for (size_t i = 0; i < cv.size(); ++i) {
    ClosestPoint cp = object.closest_point(cv[i]);
    if (cp.distance > c_contact) continue;
    Vec3 shift = nv[i] - cv[i];
    Vec3 n = cp.normal;
    double normal_comp = dot(n, shift);
    Vec3 tangential = shift - n * normal_comp;
    if (norm(tangential) >= c_tangent) continue;
    depth = std::max(depth, -normal_comp);
  }
  return std::max(0.0, depth);
}

inline double mpjpe(const HandSkeleton& a, const HandSkeleton& b) {
  double sum = 0;
  for (int i = 0; i < kNumKeypoints; ++i) sum += norm(a.keypoints[i] - b.keypoints[i]);
  return sum / kNumKeypoints * 1000.0;  // mm
}

inline double mpvpe(const HandMesh& a, const HandMesh& b) {
  if (a.mesh.vertices.size() != b.mesh.vertices.size() || a.mesh.faces != b.mesh.faces)
    throw std::invalid_argument("mpvpe: topology mismatch");
  double sum = 0;
  for (size_t i = 0; i < a.mesh.vertices.size(); ++i)
    sum += norm(a.mesh.vertices[i] - b.mesh.vertices[i]);
  return sum / static_cast<double>(a.mesh.vertices.size()) * 1000.0;  // mm
}

struct FrameMetrics {
  double pd = 0;           // m
  double fe = 0;
  double me = 0;
  double iv = 0;           // cm^3
  double contact_iou = 0;
  double mpjpe = 0;        // mm
  double mpvpe = 0;        // mm
  bool plausible = false;
};

struct EvalOptions {
  MetricThresholds thresholds;
  int field_samples = 1024;
  double voxel_size = 0.002;
  bool compute_iv = true;
  bool compute_me = true;
  SolverOptions solver;
  uint64_t sample_seed = 0;
};

// Full per-frame evaluation of a noisy pose against its clean counterpart,
// with the object placed by the trajectory at `frame`.
inline FrameMetrics evaluate_frame(const HandPose& noisy_pose, const HandPose& clean_pose,
                                   const TriMesh& object_base, const ObjectTrajectory& traj,
                                   int frame, const EvalOptions& opts = {}) {
  const auto& th = opts.thresholds;
  FrameMetrics out;
  TriMesh object = object_base.transformed(traj.poses[frame]);
  HandMesh noisy = skin(noisy_pose);
  HandMesh clean = skin(clean_pose);
  HandSkeleton noisy_skel = forward_kinematics(noisy_pose);
  HandSkeleton clean_skel = forward_kinematics(clean_pose);

  auto samples = sample_surface(object, opts.field_samples,
                                split_seed(opts.sample_seed, static_cast<uint64_t>(frame)));
  CorrField noisy_field = compute_field(noisy, object, samples);
  CorrField clean_field = compute_field(clean, object, samples);

  out.pd = penetration_depth(noisy, clean, object, th.c_contact, th.c_tangent);
  out.mpjpe = mpjpe(noisy_skel, clean_skel);
  out.mpvpe = mpvpe(noisy, clean);
  out.contact_iou = contact_iou(contact_map(clean_field, th.c_contact),
                                contact_map(noisy_field, th.c_contact));

  Vec3 F = required_force(acceleration(traj, frame), traj.mass, traj.gravity);
  auto [fe, fe_solve] = solve_fe(fe_contact_normals(noisy_field, th.c_contact), F, th.mu,
                                 opts.solver);
  out.fe = fe;
  if (opts.compute_me) {
    auto [me, me_solve] = solve_me(noisy_field, F, th.mu, th.c_contact, opts.solver);
    out.me = me;
  }
  if (opts.compute_iv) out.iv = intersection_volume(noisy.mesh, object, opts.voxel_size);

  out.plausible = out.pd < th.c_pd && out.fe < th.c_fe;
  return out;
}

inline double plausible_rate(const std::vector<FrameMetrics>& frames) {
  if (frames.empty()) throw std::invalid_argument("plausible_rate: empty frame list");
  size_t c = 0;
  for (const auto& f : frames) c += f.plausible ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(frames.size());
}

}  // namespace hoi
