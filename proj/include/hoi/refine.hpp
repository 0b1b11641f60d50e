#pragma once

// Gradient-projection refinement of a noisy pose sequence under the trained
// surrogate losses plus anchor and smoothness regularizers:
//
//   J(x) = sum_i [ a_g * psi_grasp(x_i) + a_m * psi_manip(x_i)
//                  + a_reg * ||x_i - x~_i||^2 ]
//          + a_smooth * sum_i ||x_{i+1} - x_i||^2
//
// Surrogate input gradients are exact; they are pulled back to the pose
// parameters by central finite differences through FK/skinning with the
// hand-object correspondences frozen at the current iterate. Steps use
// backtracking line search on the true objective (fields recomputed), so
// accepted steps never increase J.

#include <stdexcept>
#include <string>
#include <vector>

#include "hoi/config.hpp"
#include "hoi/dataset.hpp"
#include "hoi/dynamics.hpp"
#include "hoi/field.hpp"
#include "hoi/hand.hpp"
#include "hoi/io.hpp"
#include "hoi/math.hpp"
#include "hoi/mesh.hpp"
#include "hoi/parallel.hpp"
#include "hoi/surrogate.hpp"

namespace hoi {

struct RefineConfig {
  double alpha_grasp = 1.0;
  double alpha_manip = 1.0;
  double alpha_reg = 10.0;
  double alpha_smooth = 1.0;
  int steps = 100;
  double step_size = 1e-2;
  double fd_step = 1e-4;          // rad / m, central differences on pose coords
  int max_backtracks = 16;
  double converge_rel = 1e-5;     // early stop on relative objective change
  int converge_patience = 3;
  uint64_t sample_seed = 0;       // seeds the per-frame field samples

  void validate() const {
    if (alpha_grasp < 0 || alpha_manip < 0 || alpha_reg < 0 || alpha_smooth < 0)
      throw std::invalid_argument("refine weights must be >= 0");
    if (alpha_grasp + alpha_manip + alpha_reg + alpha_smooth <= 0)
      throw std::invalid_argument("at least one refine weight must be positive");
    if (steps < 0 || step_size <= 0) throw std::invalid_argument("bad refine step settings");
  }
};

struct RefineResult {
  std::vector<HandPose> poses;
  bool converged = true;  // false flags sequences that hit the step cap
  int steps_taken = 0;
  double objective_initial = 0;
  double objective_final = 0;
};

constexpr int kPoseDim = 6 + 3 * kNumJoints;  // 51

namespace refine_detail {

inline void pose_to_vec(const HandPose& p, double* x) {
  x[0] = p.trans.x; x[1] = p.trans.y; x[2] = p.trans.z;
  x[3] = p.root_rot.x; x[4] = p.root_rot.y; x[5] = p.root_rot.z;
  for (int k = 0; k < kNumJoints; ++k) {
    x[6 + 3 * k] = p.joint_angles[k].x;
    x[7 + 3 * k] = p.joint_angles[k].y;
    x[8 + 3 * k] = p.joint_angles[k].z;
  }
}

inline HandPose vec_to_pose(const double* x, const HandShape& shape) {
  HandPose p;
  p.shape = shape;
  p.trans = {x[0], x[1], x[2]};
  p.root_rot = {x[3], x[4], x[5]};
  for (int k = 0; k < kNumJoints; ++k)
    p.joint_angles[k] = {x[6 + 3 * k], x[7 + 3 * k], x[8 + 3 * k]};
  p.clamp_joints();
  return p;
}

struct FrameContext {
  TriMesh object;
  std::vector<SurfaceSample> samples;
  std::vector<Vec3> cloud;
  Vec3 centroid;
  Vec3 accel;
};

}  // namespace refine_detail

// Refines a noisy sequence in pose-parameter space. Frames are coupled by
// the smoothness term and optimized jointly; per-frame evaluations may run
// in parallel without changing the result.
inline RefineResult refine_sequence(const Sequence& noisy, const TriMesh& object_base,
                                    const SurrogateNet& grasp_net, const SurrogateNet& manip_net,
                                    const RefineConfig& cfg, const GlobalConfig& global,
                                    int threads = 1) {
  cfg.validate();
  noisy.validate();
  const int T = static_cast<int>(noisy.size());
  const HandShape shape = noisy.hand_poses.front().shape;

  RefineResult res;
  res.poses = noisy.hand_poses;
  if (cfg.alpha_grasp == 0 && cfg.alpha_manip == 0) {
    // Without the physical terms the anchor is already optimal.
    res.converged = true;
    return res;
  }
  if (grasp_net.net.in_dim != kGraspFeatureDim || manip_net.net.in_dim != kManipFeatureDim)
    throw std::invalid_argument("refine_sequence: net input layout mismatch");

  // Per-frame fixed context: posed object, field samples, grasp cloud, accel.
  std::vector<refine_detail::FrameContext> ctx(T);
  parallel_for(0, T, threads, [&](int i) {
    auto& c = ctx[i];
    c.object = object_base.transformed(noisy.traj.poses[i]);
    c.samples = sample_surface(c.object, global.field_samples,
                               split_seed(cfg.sample_seed, 0xF1E1D + i));
    auto cloud_s = sample_surface(c.object, global.grasp_cloud_points,
                                  split_seed(cfg.sample_seed, 0xC10FD + i));
    c.cloud.resize(cloud_s.size());
    for (size_t k = 0; k < cloud_s.size(); ++k) c.cloud[k] = cloud_s[k].position;
    c.centroid = c.object.centroid();
    c.accel = acceleration(noisy.traj, i);
  });

  // Hand topology is pose-independent; capsule faces are never degenerate,
  // so face ids are stable across poses.
  const std::vector<std::array<int, 3>> hand_faces = skin(rest_pose(shape)).mesh.faces;

  std::vector<double> x(static_cast<size_t>(T) * kPoseDim), anchor(x.size());
  for (int i = 0; i < T; ++i) refine_detail::pose_to_vec(noisy.hand_poses[i], &x[i * kPoseDim]);
  anchor = x;

  auto frame_loss = [&](int i, const double* xi) {
    HandPose pose = refine_detail::vec_to_pose(xi, shape);
    HandSkeleton skel = forward_kinematics(pose);
    HandMesh hand = skin(pose);
    CorrField field = compute_field(hand, ctx[i].object, ctx[i].samples, global.ray_cutoff, false);
    GraspProbe probe = grasp_probe_points(skel, shape);
    std::vector<float> Xg, Xm;
    grasp_features(probe, keypoint_surface(probe, ctx[i].object), ctx[i].cloud, ctx[i].centroid,
                   Xg);
    manip_features(field, ctx[i].accel, Xm);
    PointNetWorkspace<float> ws;
    double pg = pointnet_forward(grasp_net.net, Xg.data(),
                                 static_cast<int>(Xg.size()) / kGraspFeatureDim, ws);
    double pm = pointnet_forward(manip_net.net, Xm.data(),
                                 static_cast<int>(Xm.size()) / kManipFeatureDim, ws);
    return cfg.alpha_grasp * pg + cfg.alpha_manip * pm;
  };

  auto total_objective = [&](const std::vector<double>& xs) {
    std::vector<double> per_frame(T, 0.0);
    parallel_for(0, T, threads, [&](int i) {
      per_frame[i] = frame_loss(i, &xs[i * kPoseDim]);
    });
    double J = 0;
    for (int i = 0; i < T; ++i) {
      J += per_frame[i];
      double reg = 0;
      for (int k = 0; k < kPoseDim; ++k) {
        double dd = xs[i * kPoseDim + k] - anchor[i * kPoseDim + k];
        reg += dd * dd;
      }
      J += cfg.alpha_reg * reg;
    }
    for (int i = 0; i + 1 < T; ++i) {
      double sm = 0;
      for (int k = 0; k < kPoseDim; ++k) {
        double dd = xs[(i + 1) * kPoseDim + k] - xs[i * kPoseDim + k];
        sm += dd * dd;
      }
      J += cfg.alpha_smooth * sm;
    }
    return J;
  };

  // Gradient of the surrogate terms for one frame: exact input gradients,
  // pulled back through FK/skinning by central differences with the
  // correspondences (hit faces, barycentrics, flags) frozen.
  auto frame_gradient = [&](int i, const double* xi, double* gout) {
    HandPose pose = refine_detail::vec_to_pose(xi, shape);
    HandSkeleton skel = forward_kinematics(pose);
    HandMesh hand = skin(pose);
    CorrField field = compute_field(hand, ctx[i].object, ctx[i].samples, global.ray_cutoff, false);
    GraspProbe probe = grasp_probe_points(skel, shape);
    KeypointSurface surf = keypoint_surface(probe, ctx[i].object);
    std::vector<float> Xg, Xm;
    grasp_features(probe, surf, ctx[i].cloud, ctx[i].centroid, Xg);
    manip_features(field, ctx[i].accel, Xm);

    PointNetWorkspace<float> ws;
    PointNetGrads<float> grads;
    std::vector<float> dXg(Xg.size()), dXm(Xm.size());
    int rows_g = static_cast<int>(Xg.size()) / kGraspFeatureDim;
    float pg = pointnet_forward(grasp_net.net, Xg.data(), rows_g, ws);
    grads.zero(grasp_net.net);
    pointnet_backward(grasp_net.net, Xg.data(), rows_g, ws,
                      static_cast<float>(cfg.alpha_grasp) * pg * (1.0f - pg), grads, dXg.data());
    int rows_m = static_cast<int>(Xm.size()) / kManipFeatureDim;
    float pm = pointnet_forward(manip_net.net, Xm.data(), rows_m, ws);
    grads.zero(manip_net.net);
    pointnet_backward(manip_net.net, Xm.data(), rows_m, ws,
                      static_cast<float>(cfg.alpha_manip) * pm * (1.0f - pm), grads, dXm.data());

    const double h = cfg.fd_step;
    std::vector<Vec3> verts_p, verts_m;
    double xp[kPoseDim];
    for (int k = 0; k < kPoseDim; ++k) {
      std::copy(xi, xi + kPoseDim, xp);
      xp[k] = xi[k] + h;
      HandPose pose_p = refine_detail::vec_to_pose(xp, shape);
      xp[k] = xi[k] - h;
      HandPose pose_m = refine_detail::vec_to_pose(xp, shape);
      HandSkeleton skel_p = forward_kinematics(pose_p);
      HandSkeleton skel_m = forward_kinematics(pose_m);
      skin_vertices(pose_p, verts_p);
      skin_vertices(pose_m, verts_m);

      double dJ = 0;
      // Grasp features: the hand probe rows move (coordinates and surface
      // clearance, the latter under the frozen closest point).
      GraspProbe probe_p = grasp_probe_points(skel_p, shape);
      GraspProbe probe_m = grasp_probe_points(skel_m, shape);
      for (int kp = 0; kp < kGraspHandPoints; ++kp) {
        const float* g = dXg.data() + static_cast<size_t>(kp) * kGraspFeatureDim;
        Vec3 dp = (probe_p.points[kp] - probe_m.points[kp]) / (2.0 * h);
        dJ += (g[0] * dp.x + g[1] * dp.y + g[2] * dp.z) / grasp_net.scales.position;
        double sd_p = probe_clearance(probe_p.points[kp], probe.radius[kp], surf.closest[kp],
                                      surf.sign[kp]);
        double sd_m = probe_clearance(probe_m.points[kp], probe.radius[kp], surf.closest[kp],
                                      surf.sign[kp]);
        dJ += g[3] * (sd_p - sd_m) / (2.0 * h * grasp_net.scales.distance);
      }
      // Manip features: only the signed distance column responds to the hand
      // under a frozen correspondence.
      for (size_t j = 0; j < field.size(); ++j) {
        if (field.m[j] != 1) continue;
        float gd = dXm[j * kManipFeatureDim + 4];
        if (gd == 0.0f) continue;
        const auto& fh = hand_faces[field.hit_face[j]];
        Vec3 b = field.hit_bary[j];
        Vec3 hp = verts_p[fh[0]] * b.x + verts_p[fh[1]] * b.y + verts_p[fh[2]] * b.z;
        Vec3 hm = verts_m[fh[0]] * b.x + verts_m[fh[1]] * b.y + verts_m[fh[2]] * b.z;
        double dd = dot(hp - hm, field.samples[j].normal) / (2.0 * h);
        dJ += gd * dd / manip_net.scales.distance;
      }
      gout[k] = dJ;
    }
  };

  double J = total_objective(x);
  res.objective_initial = J;
  double step = cfg.step_size;
  std::vector<double> grad(x.size(), 0.0), cand(x.size());
  int stagnant = 0;
  bool hit_cap = true;
  int it = 0;
  for (; it < cfg.steps; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    parallel_for(0, T, threads, [&](int i) {
      frame_gradient(i, &x[i * kPoseDim], &grad[i * kPoseDim]);
    });
    for (int i = 0; i < T; ++i)
      for (int k = 0; k < kPoseDim; ++k)
        grad[i * kPoseDim + k] +=
            2.0 * cfg.alpha_reg * (x[i * kPoseDim + k] - anchor[i * kPoseDim + k]);
    for (int i = 0; i + 1 < T; ++i)
      for (int k = 0; k < kPoseDim; ++k) {
        double dd = 2.0 * cfg.alpha_smooth * (x[(i + 1) * kPoseDim + k] - x[i * kPoseDim + k]);
        grad[(i + 1) * kPoseDim + k] += dd;
        grad[i * kPoseDim + k] -= dd;
      }

    double gnorm2 = 0;
    for (double g : grad) gnorm2 += g * g;
    if (gnorm2 < 1e-20) {
      hit_cap = false;
      break;
    }

    bool accepted = false;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      for (size_t k = 0; k < x.size(); ++k) cand[k] = x[k] - step * grad[k];
      // Re-apply the joint-angle clamp through the pose round trip.
      for (int i = 0; i < T; ++i) {
        HandPose p = refine_detail::vec_to_pose(&cand[i * kPoseDim], shape);
        refine_detail::pose_to_vec(p, &cand[i * kPoseDim]);
      }
      double Jc = total_objective(cand);
      if (Jc <= J - 1e-12) {
        double rel = (J - Jc) / std::max(1e-12, std::abs(J));
        x.swap(cand);
        J = Jc;
        step = std::min(step * 1.5, 1.0);
        accepted = true;
        stagnant = rel < cfg.converge_rel ? stagnant + 1 : 0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || stagnant >= cfg.converge_patience) {
      hit_cap = false;
      ++it;
      break;
    }
  }
  res.steps_taken = it;
  res.converged = !hit_cap;
  res.objective_final = J;
  for (int i = 0; i < T; ++i)
    res.poses[i] = refine_detail::vec_to_pose(&x[i * kPoseDim], shape);
  return res;
}

}  // namespace hoi
