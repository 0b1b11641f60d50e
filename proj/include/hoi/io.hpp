#pragma once

// Sequence file format: JSON lines, one header line with metadata followed
// by one line per frame. All floats are written as decimals with 9
// significant digits so identically-seeded runs produce byte-identical
// files. Reading goes through nlohmann::json.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoi/dynamics.hpp"
#include "hoi/hand.hpp"
#include "hoi/math.hpp"

namespace hoi {

struct Sequence {
  std::vector<HandPose> hand_poses;
  ObjectTrajectory traj;
  std::string object_ref = "sphere";
  uint64_t seed = 0;
  std::string generator;
  NoiseConfig noise;

  size_t size() const { return hand_poses.size(); }

  void validate() const {
    if (hand_poses.size() < 3) throw std::runtime_error("sequence needs at least 3 frames");
    if (hand_poses.size() != traj.poses.size())
      throw std::runtime_error("sequence: hand/object frame count mismatch");
    for (const auto& p : hand_poses)
      if (!(p.shape == hand_poses.front().shape))
        throw std::runtime_error("sequence: all frames must share one hand shape");
  }
};

namespace io_detail {

class JsonlWriter {
 public:
  explicit JsonlWriter(std::string& out) : out_(out) {}

  void num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out_ += buf;
  }
  void raw(const std::string& s) { out_ += s; }
  void vec(const Vec3& v) {
    raw("[");
    num(v.x); raw(","); num(v.y); raw(","); num(v.z);
    raw("]");
  }
  void mat(const Mat3& m) {
    raw("[");
    for (int i = 0; i < 9; ++i) {
      if (i) raw(",");
      num(m.m[i]);
    }
    raw("]");
  }
  void nums(const double* v, size_t n) {
    raw("[");
    for (size_t i = 0; i < n; ++i) {
      if (i) raw(",");
      num(v[i]);
    }
    raw("]");
  }

 private:
  std::string& out_;
};

inline std::string shape_json(const HandShape& s) {
  std::string out;
  JsonlWriter w(out);
  auto arr = [&](const char* name, const std::array<double, kNumFingers>& a) {
    w.raw("\"");
    w.raw(name);
    w.raw("\":");
    w.nums(a.data(), a.size());
  };
  w.raw("{");
  arr("metacarpal_len", s.metacarpal_len); w.raw(",");
  arr("proximal_len", s.proximal_len); w.raw(",");
  arr("middle_len", s.middle_len); w.raw(",");
  arr("distal_len", s.distal_len); w.raw(",");
  arr("metacarpal_radius", s.metacarpal_radius); w.raw(",");
  arr("proximal_radius", s.proximal_radius); w.raw(",");
  arr("middle_radius", s.middle_radius); w.raw(",");
  arr("distal_radius", s.distal_radius);
  w.raw("}");
  return out;
}

inline HandShape shape_from_json(const nlohmann::json& j) {
  HandShape s;
  auto arr = [&](const char* name, std::array<double, kNumFingers>& a) {
    const auto& v = j.at(name);
    for (int i = 0; i < kNumFingers; ++i) a[i] = v.at(i).get<double>();
  };
  arr("metacarpal_len", s.metacarpal_len);
  arr("proximal_len", s.proximal_len);
  arr("middle_len", s.middle_len);
  arr("distal_len", s.distal_len);
  arr("metacarpal_radius", s.metacarpal_radius);
  arr("proximal_radius", s.proximal_radius);
  arr("middle_radius", s.middle_radius);
  arr("distal_radius", s.distal_radius);
  return s;
}

inline Vec3 vec_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline Mat3 mat_from_json(const nlohmann::json& j) {
  Mat3 m;
  for (int i = 0; i < 9; ++i) m.m[i] = j.at(i).get<double>();
  return m;
}

}  // namespace io_detail

inline void save_sequence(const Sequence& seq, const std::string& path) {
  seq.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write sequence file: " + path);
  std::string line;
  io_detail::JsonlWriter w(line);
  w.raw("{\"type\":\"header\",\"version\":1,\"dt\":");
  w.num(seq.traj.dt);
  w.raw(",\"frames\":" + std::to_string(seq.hand_poses.size()));
  w.raw(",\"object\":\"" + seq.object_ref + "\"");
  w.raw(",\"mass\":");
  w.num(seq.traj.mass);
  w.raw(",\"gravity\":");
  w.vec(seq.traj.gravity);
  w.raw(",\"hand_shape\":" + io_detail::shape_json(seq.hand_poses.front().shape));
  w.raw(",\"meta\":{\"seed\":" + std::to_string(seq.seed));
  w.raw(",\"generator\":\"" + seq.generator + "\"");
  w.raw(",\"noise\":{\"sigma_trans\":");
  w.num(seq.noise.sigma_trans);
  w.raw(",\"sigma_pose\":");
  w.num(seq.noise.sigma_pose);
  w.raw(",\"sigma_root\":");
  w.num(seq.noise.sigma_root);
  w.raw("}}}");
  f << line << "\n";
  for (size_t i = 0; i < seq.hand_poses.size(); ++i) {
    const HandPose& p = seq.hand_poses[i];
    line.clear();
    w.raw("{\"trans\":");
    w.vec(p.trans);
    w.raw(",\"root_rot\":");
    w.vec(p.root_rot);
    w.raw(",\"joints\":");
    std::array<double, kNumJoints * 3> joints;
    for (int k = 0; k < kNumJoints; ++k) {
      joints[3 * k] = p.joint_angles[k].x;
      joints[3 * k + 1] = p.joint_angles[k].y;
      joints[3 * k + 2] = p.joint_angles[k].z;
    }
    w.nums(joints.data(), joints.size());
    w.raw(",\"object_R\":");
    w.mat(seq.traj.poses[i].R);
    w.raw(",\"object_t\":");
    w.vec(seq.traj.poses[i].t);
    w.raw("}");
    f << line << "\n";
  }
}

inline Sequence load_sequence(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open sequence file: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty sequence file: " + path);
  Sequence seq;
  HandShape shape;
  size_t expect = 0;
  try {
    auto h = nlohmann::json::parse(line);
    if (h.value("type", "") != "header")
      throw std::runtime_error("first line is not a header");
    seq.traj.dt = h.at("dt").get<double>();
    seq.object_ref = h.at("object").get<std::string>();
    seq.traj.mass = h.value("mass", 1.0);
    if (h.contains("gravity")) seq.traj.gravity = io_detail::vec_from_json(h.at("gravity"));
    shape = io_detail::shape_from_json(h.at("hand_shape"));
    expect = h.at("frames").get<size_t>();
    if (h.contains("meta")) {
      const auto& m = h.at("meta");
      seq.seed = m.value("seed", 0ULL);
      seq.generator = m.value("generator", "");
      if (m.contains("noise")) {
        seq.noise.sigma_trans = m.at("noise").value("sigma_trans", 0.0);
        seq.noise.sigma_pose = m.at("noise").value("sigma_pose", 0.0);
        seq.noise.sigma_root = m.at("noise").value("sigma_root", 0.0);
      }
    }
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      HandPose p;
      p.shape = shape;
      p.trans = io_detail::vec_from_json(j.at("trans"));
      p.root_rot = io_detail::vec_from_json(j.at("root_rot"));
      const auto& joints = j.at("joints");
      for (int k = 0; k < kNumJoints; ++k)
        p.joint_angles[k] = {joints.at(3 * k).get<double>(), joints.at(3 * k + 1).get<double>(),
                             joints.at(3 * k + 2).get<double>()};
      seq.hand_poses.push_back(p);
      seq.traj.poses.push_back(
          Rigid{io_detail::mat_from_json(j.at("object_R")), io_detail::vec_from_json(j.at("object_t"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("sequence schema error in " + path + ": " + e.what());
  }
  if (seq.hand_poses.size() != expect)
    throw std::runtime_error("sequence frame count mismatch in " + path);
  seq.validate();
  return seq;
}

}  // namespace hoi
