#pragma once

// Synthetic HOI data: heuristic grasp generation on primitive objects,
// analytic object trajectories, the perturb+interpolate labeling protocol,
// and the labels/manifest file formats.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoi/config.hpp"
#include "hoi/dynamics.hpp"
#include "hoi/field.hpp"
#include "hoi/hand.hpp"
#include "hoi/io.hpp"
#include "hoi/math.hpp"
#include "hoi/mesh.hpp"
#include "hoi/metrics.hpp"
#include "hoi/parallel.hpp"
#include "hoi/surrogate.hpp"

namespace hoi {

// ---- Grasp generation ------------------------------------------------------

struct GraspGenOptions {
  int max_attempts = 32;
  int min_fingertip_contacts = 3;
  double contact_gap = -0.0005;  // target fingertip surface gap (m); slightly pressed
  double max_flex = 2.0;         // rad, MCP flexion limit
  double claw_height = 0.035;    // palm plane standoff above the grasped surface (m)
  double fe_accept = 0.05;       // force-error gate for a holding grasp
  int probe_samples = 256;
  double mu = 0.8;
  double c_contact = 0.002;
  double max_bounding_radius = 0.10;  // 20 cm bounding sphere
};

namespace dataset_detail {

inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double t = norm2(ab) > 0 ? std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0) : 0.0;
  return norm(p - (a + ab * t));
}

// Coupled flexion: MCP carries t, PIP 0.85t, DIP 0.6t about the finger's
// flexion axis.
inline void set_finger_flex(HandPose& pose, int finger, double t) {
  Vec3 ax = flexion_axis(finger);
  pose.joint_angles[3 * finger + 0] = ax * t;
  pose.joint_angles[3 * finger + 1] = ax * (0.85 * t);
  pose.joint_angles[3 * finger + 2] = ax * (0.6 * t);
}

}  // namespace dataset_detail

// Counts fingers whose distal capsule is touched by the field (canonical hit
// position within the distal bone's reach, |d| <= c_contact).
inline int fingertip_contact_count(const CorrField& field, const HandShape& shape,
                                   double c_contact = 0.002) {
  HandSkeleton rest = forward_kinematics(rest_pose(shape));
  bool touched[kNumFingers] = {};
  for (size_t j = 0; j < field.size(); ++j) {
    if (field.m[j] != 1 || std::abs(field.d[j]) > c_contact) continue;
    for (int f = 0; f < kNumFingers; ++f) {
      double reach = shape.distal_radius[f] + 0.005;
      if (dataset_detail::point_segment_distance(field.p[j],
                                                 rest.keypoints[keypoint_index(f, 2)],
                                                 rest.keypoints[tip_index(f)]) <= reach)
        touched[f] = true;
    }
  }
  int c = 0;
  for (bool t : touched) c += t ? 1 : 0;
  return c;
}

// Heuristic grasp: approach from a seeded direction, rest the palm near the
// surface, flex each finger until its tip capsule meets the surface or the
// joint limit, then keep the attempt only if enough fingertips touch and the
// contacts can support the object against gravity.
inline HandPose generate_grasp(const TriMesh& object, uint64_t seed,
                               const GraspGenOptions& opt = {}) {
  Vec3 center = object.centroid();
  double bound = 0;
  for (const auto& v : object.vertices) bound = std::max(bound, norm(v - center));
  if (bound > opt.max_bounding_radius)
    throw std::runtime_error("object too large for grasp generation (20 cm bounding sphere)");

  // Approaches come from a small canonical family (12 directions x 4 rolls)
  // rather than the full sphere: the clean grasp behind a noisy frame is
  // then inferable from the frame itself, which keeps the learned-loss
  // training targets well posed.
  static const std::array<Vec3, 12> approach_dirs = [] {
    std::array<Vec3, 12> d;
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    int i = 0;
    for (double a : {-1.0, 1.0})
      for (double b : {-t, t}) {
        d[i++] = normalized(Vec3{a, b, 0});
        d[i++] = normalized(Vec3{0, a, b});
        d[i++] = normalized(Vec3{b, 0, a});
      }
    return d;
  }();

  const Vec3 palm_center_local{0.05, 0.005, 0.0};
  for (int attempt = 0; attempt < opt.max_attempts; ++attempt) {
    Rng rng(split_seed(seed, attempt));
    Vec3 u = approach_dirs[rng.below(approach_dirs.size())];
    auto hit = object.raycast(center + u * (bound + 0.05), -1.0 * u);
    if (!hit) continue;
    Vec3 q = hit->point;

    Vec3 e1, e2;
    orthonormal_basis(u, e1, e2);
    double phi = (kPi / 2.0) * rng.below(4);
    Vec3 t = e1 * std::cos(phi) + e2 * std::sin(phi);
    // Palm faces the object: local z -> u, local x (fingers) -> t.
    Mat3 R;
    Vec3 ycol = cross(u, t);
    R(0, 0) = t.x; R(1, 0) = t.y; R(2, 0) = t.z;
    R(0, 1) = ycol.x; R(1, 1) = ycol.y; R(2, 1) = ycol.z;
    R(0, 2) = u.x; R(1, 2) = u.y; R(2, 2) = u.z;

    // Claw stance: the palm hovers above the surface and the fingertips
    // curl down until they poke it. Tip contacts then sit roughly
    // anti-parallel to the tip's swing direction, so pose noise moves them
    // along the surface normal where the penetration metric can see it.
    HandPose pose = rest_pose();
    pose.root_rot = matrix_to_axis_angle(R);
    pose.trans = q + u * opt.claw_height - R * palm_center_local;

    auto surface_gap = [&](const Vec3& p, double radius) {
      return (object.inside(p) ? -1.0 : 1.0) * object.closest_point(p).distance - radius;
    };
    auto tip_gap = [&](int finger) {
      HandSkeleton s = forward_kinematics(pose);
      return surface_gap(s.keypoints[tip_index(finger)], pose.shape.distal_radius[finger]);
    };
    for (int f = 0; f < kNumFingers; ++f) {
      double lo = 0.0, hi = -1.0;
      double prev = 0.0;
      for (double t_flex = 0.0; t_flex <= opt.max_flex + 1e-9; t_flex += 0.05) {
        dataset_detail::set_finger_flex(pose, f, t_flex);
        if (tip_gap(f) <= opt.contact_gap) {
          lo = prev;
          hi = t_flex;
          break;
        }
        prev = t_flex;
      }
      if (hi < 0) {
        dataset_detail::set_finger_flex(pose, f, opt.max_flex);  // joint limit
        continue;
      }
      for (int b = 0; b < 10; ++b) {
        double mid = 0.5 * (lo + hi);
        dataset_detail::set_finger_flex(pose, f, mid);
        if (tip_gap(f) <= opt.contact_gap) hi = mid;
        else lo = mid;
      }
      dataset_detail::set_finger_flex(pose, f, hi);
    }

    HandMesh hand = skin(pose);
    auto samples = sample_surface(object, opt.probe_samples, split_seed(seed, 1000 + attempt));
    CorrField field = compute_field(hand, object, samples);
    if (fingertip_contact_count(field, pose.shape, opt.c_contact) < opt.min_fingertip_contacts)
      continue;
    Vec3 hold_force{0, 0, 9.81};  // support against default gravity, unit mass
    auto [fe, solve] = solve_fe(fe_contact_normals(field, opt.c_contact), hold_force, opt.mu);
    if (fe > opt.fe_accept) continue;
    return pose;
  }
  throw std::runtime_error("no valid grasp approach found after " +
                           std::to_string(opt.max_attempts) + " attempts");
}

// ---- Trajectories -----------------------------------------------------------

struct TrajParams {
  double lift_height_min = 0.06, lift_height_max = 0.12;
  double swing_amp_min = 0.03, swing_amp_max = 0.06;
  double swing_freq_min = 0.8, swing_freq_max = 1.2;   // Hz
  double shake_amp_min = 0.004, shake_amp_max = 0.008;
  double shake_freq_min = 3.0, shake_freq_max = 5.0;   // Hz
};

// Analytic trajectories with known closed-form accelerations.
inline ObjectTrajectory generate_trajectory(const std::string& kind, int length, double dt,
                                            uint64_t seed, const TrajParams& params = {},
                                            double mass = 1.0, Vec3 gravity = {0, 0, -9.81}) {
  if (length < 3) throw std::invalid_argument("generate_trajectory: length must be >= 3");
  ObjectTrajectory traj;
  traj.dt = dt;
  traj.mass = mass;
  traj.gravity = gravity;
  traj.poses.assign(length, Rigid::identity());
  Rng rng(seed);
  if (kind == "hold") {
    // constant pose
  } else if (kind == "lift") {
    double H = rng.uniform(params.lift_height_min, params.lift_height_max);
    double T = (length - 1) * dt;
    for (int i = 0; i < length; ++i) {
      double tau = (i * dt) / T;
      traj.poses[i].t = {0, 0, H * (3 * tau * tau - 2 * tau * tau * tau)};
    }
  } else if (kind == "swing") {
    double A = rng.uniform(params.swing_amp_min, params.swing_amp_max);
    double w = 2.0 * kPi * rng.uniform(params.swing_freq_min, params.swing_freq_max);
    for (int i = 0; i < length; ++i) traj.poses[i].t = {A * std::sin(w * i * dt), 0, 0};
  } else if (kind == "shake") {
    double A = rng.uniform(params.shake_amp_min, params.shake_amp_max);
    double w = 2.0 * kPi * rng.uniform(params.shake_freq_min, params.shake_freq_max);
    for (int i = 0; i < length; ++i) traj.poses[i].t = {0, 0, A * std::sin(w * i * dt)};
  } else {
    throw std::invalid_argument("unknown trajectory kind: " + kind);
  }
  return traj;
}

// ---- Labeled dataset ---------------------------------------------------------

struct LabeledRecord {
  int pair = 0;
  int j = 1;  // interpolation index, 1-based; j=1 is the clean endpoint
  std::string object_ref;
  Rigid object_pose;
  Vec3 accel;
  HandPose pose;
  double pd = 0, fe = 0, me = 0;
  GraspTargets grasp;
  ManipTargets manip;
  uint64_t field_seed = 0;
  std::string split;  // train | val | test
};

struct GenConfig {
  int pairs = 400;
  int interp_m = 5;
  NoiseConfig noise;  // defaults sigma_trans 0.01 m, sigma_pose 0.3, sigma_root 0.05
  std::vector<std::string> objects = {"sphere", "box", "cylinder", "torus", "thin_plate"};
  std::vector<std::string> traj_kinds = {"hold", "lift", "swing", "shake"};
  int traj_length = 9;
  double dt = 1.0 / 30.0;
  uint64_t seed = 0;
  GraspGenOptions grasp;
  TrajParams traj_params;
};

struct DatasetBuild {
  std::vector<LabeledRecord> records;
  HandShape shape;
  int pairs_requested = 0;
  int pairs_generated = 0;
  std::vector<int> failed_pairs;
};

inline std::string split_for_pair(int pair) {
  int r = pair % 10;
  if (r == 8) return "val";
  if (r == 9) return "test";
  return "train";
}

// Generates D perturbed-clean pairs, interpolates m poses per pair, and
// labels every pose with PD / FE / ME and the derived targets. Pair
// generation is parallel; pairs that fail grasp search are skipped and
// reported.
inline DatasetBuild build_dataset(const GenConfig& cfg, const GlobalConfig& global,
                                  int threads = 1) {
  if (cfg.pairs < 1 || cfg.interp_m < 2) throw std::invalid_argument("bad generation config");
  std::map<std::string, TriMesh> bases;
  for (const auto& name : cfg.objects) bases.emplace(name, load_mesh(name));

  struct PairOut {
    bool ok = false;
    std::vector<LabeledRecord> recs;
  };
  std::vector<PairOut> outs(cfg.pairs);
  GraspGenOptions gopt = cfg.grasp;
  gopt.mu = global.mu;
  gopt.c_contact = global.c_contact;

  parallel_for(0, cfg.pairs, threads, [&](int pid) {
    // Rotate the object/trajectory assignment across decades so the pair-id
    // splits (mod 10) see every combination; a plain pid % size would pin
    // each split to a single object.
    size_t obj_idx = (pid % cfg.objects.size() + pid / 10) % cfg.objects.size();
    size_t kind_idx = (pid % cfg.traj_kinds.size() + pid / 10) % cfg.traj_kinds.size();
    const std::string& obj_name = cfg.objects[obj_idx];
    const TriMesh& base = bases.at(obj_name);
    try {
      ObjectTrajectory traj =
          generate_trajectory(cfg.traj_kinds[kind_idx], cfg.traj_length,
                              cfg.dt, split_seed(cfg.seed, pid * 8 + 1), cfg.traj_params,
                              global.mass, global.gravity);
      Rng krng(split_seed(cfg.seed, pid * 8 + 2));
      int k = 1 + static_cast<int>(krng.below(cfg.traj_length - 2));
      TriMesh object = base.transformed(traj.poses[k]);
      HandPose clean = generate_grasp(object, split_seed(cfg.seed, pid * 8 + 3), gopt);
      NoiseConfig noise = cfg.noise;
      noise.seed = split_seed(cfg.seed, pid * 8 + 4);
      HandPose noisy = perturb(clean, noise);
      auto poses = interpolate(clean, noisy, cfg.interp_m);

      Vec3 a = acceleration(traj, k);
      Vec3 F = required_force(a, traj.mass, traj.gravity);
      uint64_t field_seed = split_seed(cfg.seed, pid * 8 + 5);
      auto samples = sample_surface(object, global.field_samples, field_seed);
      HandMesh clean_mesh = skin(clean);

      PairOut po;
      po.ok = true;
      for (int j = 0; j < cfg.interp_m; ++j) {
        LabeledRecord r;
        r.pair = pid;
        r.j = j + 1;
        r.object_ref = obj_name;
        r.object_pose = traj.poses[k];
        r.accel = a;
        r.pose = poses[j];
        HandMesh hand = skin(poses[j]);
        // cp_dist feeds the ME weights at non-corresponding samples.
        CorrField field = compute_field(hand, object, samples, global.ray_cutoff, true);
        r.pd = penetration_depth(hand, clean_mesh, object, global.c_contact, global.c_tangent);
        auto [fe, fes] = solve_fe(fe_contact_normals(field, global.c_contact), F, global.mu,
                                  global.solver);
        r.fe = fe;
        auto [me, mes] = solve_me(field, F, global.mu, global.c_contact, global.solver);
        r.me = me;
        r.grasp = grasp_targets(r.pd, global.c_pd);
        r.manip = manip_targets(r.fe, r.me, global.c_fe);
        r.field_seed = field_seed;
        r.split = split_for_pair(pid);
        po.recs.push_back(std::move(r));
      }
      outs[pid] = std::move(po);
    } catch (const std::exception&) {
      outs[pid].ok = false;
    }
  });

  DatasetBuild out;
  out.shape = default_hand_shape();
  out.pairs_requested = cfg.pairs;
  for (int pid = 0; pid < cfg.pairs; ++pid) {
    if (!outs[pid].ok) {
      out.failed_pairs.push_back(pid);
      continue;
    }
    out.pairs_generated++;
    for (auto& r : outs[pid].recs) out.records.push_back(std::move(r));
  }
  return out;
}

// ---- Labels file ------------------------------------------------------------

inline void save_labels(const DatasetBuild& build, const GenConfig& cfg,
                        const GlobalConfig& global, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream f(fs::path(dir) / "labels.jsonl", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write labels file in " + dir);
  std::string line;
  io_detail::JsonlWriter w(line);
  w.raw("{\"type\":\"header\",\"version\":1,\"count\":" + std::to_string(build.records.size()));
  w.raw(",\"hand_shape\":" + io_detail::shape_json(build.shape));
  w.raw(",\"config\":" + to_json(global).dump());
  w.raw("}");
  f << line << "\n";
  for (const auto& r : build.records) {
    line.clear();
    w.raw("{\"pair\":" + std::to_string(r.pair) + ",\"j\":" + std::to_string(r.j));
    w.raw(",\"split\":\"" + r.split + "\"");
    w.raw(",\"object\":\"" + r.object_ref + "\"");
    w.raw(",\"object_R\":");
    w.mat(r.object_pose.R);
    w.raw(",\"object_t\":");
    w.vec(r.object_pose.t);
    w.raw(",\"accel\":");
    w.vec(r.accel);
    w.raw(",\"trans\":");
    w.vec(r.pose.trans);
    w.raw(",\"root_rot\":");
    w.vec(r.pose.root_rot);
    w.raw(",\"joints\":");
    std::array<double, kNumJoints * 3> joints;
    for (int k = 0; k < kNumJoints; ++k) {
      joints[3 * k] = r.pose.joint_angles[k].x;
      joints[3 * k + 1] = r.pose.joint_angles[k].y;
      joints[3 * k + 2] = r.pose.joint_angles[k].z;
    }
    w.nums(joints.data(), joints.size());
    w.raw(",\"pd\":");
    w.num(r.pd);
    w.raw(",\"fe\":");
    w.num(r.fe);
    w.raw(",\"me\":");
    w.num(r.me);
    w.raw(",\"b_hard\":" + std::to_string(r.grasp.b_hard) + ",\"b_soft\":");
    w.num(r.grasp.b_soft);
    w.raw(",\"s_hard\":" + std::to_string(r.manip.s_hard) + ",\"s_soft\":");
    w.num(r.manip.s_soft);
    w.raw(",\"field_seed\":" + std::to_string(r.field_seed));
    w.raw("}");
    f << line << "\n";
  }
}

inline void save_manifest(const DatasetBuild& build, const GenConfig& cfg,
                          const GlobalConfig& global, const std::string& dir) {
  namespace fs = std::filesystem;
  nlohmann::json j;
  j["command"] = "gen";
  j["seed"] = cfg.seed;
  j["config"] = to_json(global);
  j["gen"] = {{"pairs", cfg.pairs},
              {"interp_m", cfg.interp_m},
              {"objects", cfg.objects},
              {"traj_kinds", cfg.traj_kinds},
              {"traj_length", cfg.traj_length},
              {"dt", cfg.dt},
              {"noise",
               {{"sigma_trans", cfg.noise.sigma_trans},
                {"sigma_pose", cfg.noise.sigma_pose},
                {"sigma_root", cfg.noise.sigma_root}}}};
  j["counts"] = {{"pairs_requested", build.pairs_requested},
                 {"pairs_generated", build.pairs_generated},
                 {"frames", build.records.size()},
                 {"failures", build.failed_pairs.size()}};
  j["failed_pairs"] = build.failed_pairs;
  j["files"] = {"labels.jsonl"};
  std::ofstream f(fs::path(dir) / "manifest.json", std::ios::binary);
  f << j.dump(2) << "\n";
}

struct LabelsFile {
  std::vector<LabeledRecord> records;
  HandShape shape;
  nlohmann::json config_echo;
};

inline LabelsFile load_labels(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open labels file: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty labels file: " + path);
  LabelsFile out;
  try {
    auto h = nlohmann::json::parse(line);
    if (h.value("type", "") != "header") throw std::runtime_error("labels header missing");
    out.shape = io_detail::shape_from_json(h.at("hand_shape"));
    out.config_echo = h.value("config", nlohmann::json::object());
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      LabeledRecord r;
      r.pair = j.at("pair").get<int>();
      r.j = j.at("j").get<int>();
      r.split = j.at("split").get<std::string>();
      r.object_ref = j.at("object").get<std::string>();
      r.object_pose = {io_detail::mat_from_json(j.at("object_R")),
                       io_detail::vec_from_json(j.at("object_t"))};
      r.accel = io_detail::vec_from_json(j.at("accel"));
      r.pose.shape = out.shape;
      r.pose.trans = io_detail::vec_from_json(j.at("trans"));
      r.pose.root_rot = io_detail::vec_from_json(j.at("root_rot"));
      const auto& joints = j.at("joints");
      for (int k = 0; k < kNumJoints; ++k)
        r.pose.joint_angles[k] = {joints.at(3 * k).get<double>(),
                                  joints.at(3 * k + 1).get<double>(),
                                  joints.at(3 * k + 2).get<double>()};
      r.pd = j.at("pd").get<double>();
      r.fe = j.at("fe").get<double>();
      r.me = j.at("me").get<double>();
      r.grasp.b_hard = j.at("b_hard").get<int>();
      r.grasp.b_soft = j.at("b_soft").get<double>();
      r.manip.s_hard = j.at("s_hard").get<int>();
      r.manip.s_soft = j.at("s_soft").get<double>();
      r.field_seed = j.at("field_seed").get<uint64_t>();
      out.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("labels schema error in " + path + ": " + e.what());
  }
  return out;
}

// ---- Feature materialization -------------------------------------------------

struct ExampleMeta {
  int pair = 0;
  int j = 1;
  double pd = 0, fe = 0, me = 0;
};

struct SurrogateData {
  std::vector<TrainExample> grasp_train, grasp_val, grasp_test;
  std::vector<TrainExample> manip_train, manip_val, manip_test;
  std::vector<ExampleMeta> grasp_test_meta;
};

// Rebuilds the network inputs for every record (fields and point clouds are
// recomputed from the stored seeds, so the labels file stays small).
inline SurrogateData materialize_surrogate_data(const std::vector<LabeledRecord>& records,
                                                const GlobalConfig& global, int threads = 1) {
  std::map<std::string, TriMesh> bases;
  for (const auto& r : records) bases.emplace(r.object_ref, TriMesh{});
  for (auto& [name, mesh] : bases) mesh = load_mesh(name);

  // Group consecutive records of one pair so per-pair work is done once.
  struct PairRange { int begin, end; };
  std::vector<PairRange> ranges;
  for (int i = 0; i < static_cast<int>(records.size());) {
    int j = i;
    while (j < static_cast<int>(records.size()) && records[j].pair == records[i].pair) j++;
    ranges.push_back({i, j});
    i = j;
  }

  struct Made {
    std::vector<TrainExample> grasp, manip;
  };
  std::vector<Made> made(ranges.size());
  parallel_for(0, static_cast<int>(ranges.size()), threads, [&](int ri) {
    const auto& range = ranges[ri];
    const LabeledRecord& first = records[range.begin];
    TriMesh object = bases.at(first.object_ref).transformed(first.object_pose);
    auto samples = sample_surface(object, global.field_samples, first.field_seed);
    auto cloud_samples =
        sample_surface(object, global.grasp_cloud_points, split_seed(first.field_seed, 1));
    std::vector<Vec3> cloud(cloud_samples.size());
    for (size_t i = 0; i < cloud_samples.size(); ++i) cloud[i] = cloud_samples[i].position;
    Vec3 centroid = object.centroid();
    Made& m = made[ri];
    for (int i = range.begin; i < range.end; ++i) {
      const LabeledRecord& r = records[i];
      HandMesh hand = skin(r.pose);
      HandSkeleton skel = forward_kinematics(r.pose);
      CorrField field = compute_field(hand, object, samples, global.ray_cutoff, false);
      TrainExample ge, me_ex;
      GraspProbe probe = grasp_probe_points(skel, r.pose.shape);
      grasp_features(probe, keypoint_surface(probe, object), cloud, centroid, ge.X);
      ge.hard = static_cast<float>(r.grasp.b_hard);
      ge.soft = static_cast<float>(r.grasp.b_soft);
      manip_features(field, r.accel, me_ex.X);
      me_ex.hard = static_cast<float>(r.manip.s_hard);
      me_ex.soft = static_cast<float>(r.manip.s_soft);
      m.grasp.push_back(std::move(ge));
      m.manip.push_back(std::move(me_ex));
    }
  });

  SurrogateData out;
  for (size_t ri = 0; ri < ranges.size(); ++ri) {
    for (int i = ranges[ri].begin; i < ranges[ri].end; ++i) {
      const LabeledRecord& r = records[i];
      int local = i - ranges[ri].begin;
      auto& ge = made[ri].grasp[local];
      auto& me_ex = made[ri].manip[local];
      if (r.split == "train") {
        out.grasp_train.push_back(std::move(ge));
        out.manip_train.push_back(std::move(me_ex));
      } else if (r.split == "val") {
        out.grasp_val.push_back(std::move(ge));
        out.manip_val.push_back(std::move(me_ex));
      } else {
        out.grasp_test.push_back(std::move(ge));
        out.manip_test.push_back(std::move(me_ex));
        out.grasp_test_meta.push_back({r.pair, r.j, r.pd, r.fe, r.me});
      }
    }
  }
  return out;
}

// ---- Clean/noisy sequences -----------------------------------------------------

// A clean manipulation sequence: one grasp rigidly attached to the moving
// object.
inline Sequence make_clean_sequence(const std::string& object_ref, const std::string& traj_kind,
                                    int length, double dt, uint64_t seed,
                                    const GraspGenOptions& gopt = {},
                                    const TrajParams& tparams = {}) {
  TriMesh base = load_mesh(object_ref);
  Sequence seq;
  seq.object_ref = object_ref;
  seq.seed = seed;
  seq.generator = traj_kind;
  seq.traj = generate_trajectory(traj_kind, length, dt, split_seed(seed, 1), tparams);
  HandPose grasp = generate_grasp(base.transformed(seq.traj.poses[0]), split_seed(seed, 2), gopt);
  Rigid inv0 = seq.traj.poses[0].inverse();
  for (int i = 0; i < length; ++i)
    seq.hand_poses.push_back(transform_pose(seq.traj.poses[i].compose(inv0), grasp));
  return seq;
}

inline Sequence perturb_sequence(const Sequence& seq, const NoiseConfig& noise) {
  Sequence out = seq;
  out.generator = seq.generator + "+noise";
  out.noise = noise;
  for (size_t i = 0; i < out.hand_poses.size(); ++i) {
    NoiseConfig frame_noise = noise;
    frame_noise.seed = split_seed(noise.seed, i);
    out.hand_poses[i] = perturb(seq.hand_poses[i], frame_noise);
  }
  return out;
}

}  // namespace hoi
