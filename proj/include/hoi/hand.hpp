#pragma once

// Procedural articulated hand: 21-keypoint skeleton (wrist + MCP/PIP/DIP/TIP
// per finger), 15 articulated joints with axis-angle parameters, and capsule
// skinning with pose-independent topology. The palm lies in the local z=0
// plane and faces -z; fingers extend along +x in the rest pose.

#include <array>
#include <stdexcept>

#include "hoi/math.hpp"
#include "hoi/mesh.hpp"

namespace hoi {

constexpr int kNumFingers = 5;
constexpr int kNumJoints = 15;            // 3 per finger
constexpr int kNumKeypoints = 21;         // wrist + 4 per finger
constexpr int kNumBones = 20;             // 4 per finger (metacarpal + 3 phalanges)

// Keypoint layout: 0 = wrist; finger f (thumb, index, middle, ring, pinky)
// occupies 1+4f .. 4+4f as MCP, PIP, DIP, TIP.
inline int keypoint_index(int finger, int which) { return 1 + 4 * finger + which; }
inline int tip_index(int finger) { return keypoint_index(finger, 3); }

// Bone layout: finger f occupies 4f .. 4f+3 as metacarpal, proximal, middle,
// distal.
inline int bone_index(int finger, int which) { return 4 * finger + which; }

namespace hand_detail {
// Rest-direction constants (unit vectors in the palm frame).
inline const std::array<Vec3, kNumFingers>& metacarpal_dirs() {
  static const std::array<Vec3, kNumFingers> d = {
      normalized(Vec3{0.030, 0.040, 0.0}),   // thumb
      normalized(Vec3{0.088, 0.032, 0.0}),   // index
      normalized(Vec3{0.092, 0.009, 0.0}),   // middle
      normalized(Vec3{0.086, -0.014, 0.0}),  // ring
      normalized(Vec3{0.076, -0.036, 0.0}),  // pinky
  };
  return d;
}
inline const std::array<Vec3, kNumFingers>& finger_dirs() {
  static const std::array<Vec3, kNumFingers> d = {
      normalized(Vec3{0.60, 0.80, 0.0}),
      normalized(Vec3{1.0, 0.05, 0.0}),
      normalized(Vec3{1.0, 0.0, 0.0}),
      normalized(Vec3{1.0, -0.05, 0.0}),
      normalized(Vec3{1.0, -0.10, 0.0}),
  };
  return d;
}
}  // namespace hand_detail

struct HandShape {
  // Per-finger bone lengths (meters): metacarpal, proximal, middle, distal.
  std::array<double, kNumFingers> metacarpal_len;
  std::array<double, kNumFingers> proximal_len;
  std::array<double, kNumFingers> middle_len;
  std::array<double, kNumFingers> distal_len;
  // Per-finger capsule radii for the same four bones.
  std::array<double, kNumFingers> metacarpal_radius;
  std::array<double, kNumFingers> proximal_radius;
  std::array<double, kNumFingers> middle_radius;
  std::array<double, kNumFingers> distal_radius;

  double bone_length(int finger, int which) const {
    switch (which) {
      case 0: return metacarpal_len[finger];
      case 1: return proximal_len[finger];
      case 2: return middle_len[finger];
      default: return distal_len[finger];
    }
  }
  double bone_radius(int finger, int which) const {
    switch (which) {
      case 0: return metacarpal_radius[finger];
      case 1: return proximal_radius[finger];
      case 2: return middle_radius[finger];
      default: return distal_radius[finger];
    }
  }

  bool operator==(const HandShape& o) const {
    return metacarpal_len == o.metacarpal_len && proximal_len == o.proximal_len &&
           middle_len == o.middle_len && distal_len == o.distal_len &&
           metacarpal_radius == o.metacarpal_radius && proximal_radius == o.proximal_radius &&
           middle_radius == o.middle_radius && distal_radius == o.distal_radius;
  }

  void validate() const {
    for (int f = 0; f < kNumFingers; ++f)
      for (int w = 0; w < 4; ++w)
        if (bone_length(f, w) <= 0 || bone_radius(f, w) <= 0)
          throw std::invalid_argument("hand shape values must be strictly positive");
  }
};

inline HandShape default_hand_shape() {
  HandShape s;
  s.metacarpal_len = {0.050, 0.094, 0.092, 0.087, 0.084};
  s.proximal_len = {0.040, 0.045, 0.050, 0.046, 0.036};
  s.middle_len = {0.032, 0.026, 0.030, 0.028, 0.022};
  s.distal_len = {0.028, 0.023, 0.024, 0.023, 0.020};
  s.metacarpal_radius = {0.013, 0.012, 0.012, 0.012, 0.011};
  s.proximal_radius = {0.010, 0.009, 0.009, 0.0085, 0.008};
  s.middle_radius = {0.009, 0.008, 0.008, 0.0075, 0.007};
  s.distal_radius = {0.0085, 0.0075, 0.0075, 0.007, 0.0065};
  return s;
}

struct HandPose {
  Vec3 trans;                                 // meters
  Vec3 root_rot;                              // axis-angle, radians
  std::array<Vec3, kNumJoints> joint_angles;  // axis-angle per joint, radians
  HandShape shape = default_hand_shape();

  // Joint angle magnitudes live in [0, pi).
  void clamp_joints() {
    for (auto& j : joint_angles) {
      double a = norm(j);
      if (a >= kPi) j *= (kPi - 1e-9) / a;
    }
  }
};

inline HandPose rest_pose(const HandShape& shape = default_hand_shape()) {
  HandPose p;
  p.trans = {0, 0, 0};
  p.root_rot = {0, 0, 0};
  for (auto& j : p.joint_angles) j = {0, 0, 0};
  p.shape = shape;
  return p;
}

struct HandSkeleton {
  std::array<Vec3, kNumKeypoints> keypoints;
};

struct HandMesh {
  TriMesh mesh;
  std::vector<Vec3> canonical_vertices;  // same vertices in the rest pose
  std::vector<int> bone_assignment;      // per-vertex bone index
};

struct NoiseConfig {
  double sigma_trans = 0.01;  // m
  double sigma_pose = 0.3;    // rad, per joint axis-angle component
  double sigma_root = 0.05;   // rad
  uint64_t seed = 0;

  void validate() const {
    if (sigma_trans < 0 || sigma_pose < 0 || sigma_root < 0)
      throw std::invalid_argument("noise sigmas must be >= 0");
  }
};

// Axis that curls finger `dir` toward the palm (-z).
inline Vec3 flexion_axis(int finger) {
  const Vec3& d = hand_detail::finger_dirs()[finger];
  return normalized(Vec3{-d.y, d.x, 0.0});
}

namespace hand_detail {

struct BoneTransforms {
  // Global rotation and start point per bone.
  std::array<Mat3, kNumBones> rot;
  std::array<Vec3, kNumBones> start;
};

inline void forward_chain(const HandPose& pose, HandSkeleton& skel, BoneTransforms* bones) {
  Mat3 root = axis_angle_to_matrix(pose.root_rot);
  skel.keypoints[0] = pose.trans;
  const auto& mdirs = metacarpal_dirs();
  const auto& fdirs = finger_dirs();
  for (int f = 0; f < kNumFingers; ++f) {
    Vec3 wrist = pose.trans;
    Vec3 mcp = wrist + root * (mdirs[f] * pose.shape.metacarpal_len[f]);
    Mat3 frame = root * axis_angle_to_matrix(pose.joint_angles[3 * f + 0]);
    Vec3 pip = mcp + frame * (fdirs[f] * pose.shape.proximal_len[f]);
    Mat3 frame2 = frame * axis_angle_to_matrix(pose.joint_angles[3 * f + 1]);
    Vec3 dip = pip + frame2 * (fdirs[f] * pose.shape.middle_len[f]);
    Mat3 frame3 = frame2 * axis_angle_to_matrix(pose.joint_angles[3 * f + 2]);
    Vec3 tip = dip + frame3 * (fdirs[f] * pose.shape.distal_len[f]);
    skel.keypoints[keypoint_index(f, 0)] = mcp;
    skel.keypoints[keypoint_index(f, 1)] = pip;
    skel.keypoints[keypoint_index(f, 2)] = dip;
    skel.keypoints[keypoint_index(f, 3)] = tip;
    if (bones) {
      bones->rot[bone_index(f, 0)] = root;
      bones->start[bone_index(f, 0)] = wrist;
      bones->rot[bone_index(f, 1)] = frame;
      bones->start[bone_index(f, 1)] = mcp;
      bones->rot[bone_index(f, 2)] = frame2;
      bones->start[bone_index(f, 2)] = pip;
      bones->rot[bone_index(f, 3)] = frame3;
      bones->start[bone_index(f, 3)] = dip;
    }
  }
}

// Capsule tessellation: 8 segments around, 4 rings per hemisphere cap.
constexpr int kCapsuleAround = 8;
constexpr int kCapsuleCapRings = 4;
constexpr int kCapsuleVerts = 2 + 2 * kCapsuleCapRings * kCapsuleAround;  // 66

// Local-frame capsule vertices for a bone of direction d, length L, radius r.
// Vertex order: bottom pole, bottom rings (pole to equator), top rings
// (equator to pole), top pole.
inline void capsule_local_vertices(const Vec3& d, double L, double r, std::vector<Vec3>& out) {
  Vec3 e1, e2;
  orthonormal_basis(d, e1, e2);
  out.push_back(d * -r);  // bottom pole
  for (int k = 1; k <= kCapsuleCapRings; ++k) {
    double alpha = k * (kPi / 2) / kCapsuleCapRings;
    double c = -r * std::cos(alpha), s = r * std::sin(alpha);
    for (int m = 0; m < kCapsuleAround; ++m) {
      double beta = 2.0 * kPi * m / kCapsuleAround;
      out.push_back(d * c + (e1 * std::cos(beta) + e2 * std::sin(beta)) * s);
    }
  }
  for (int k = kCapsuleCapRings; k >= 1; --k) {
    double alpha = k * (kPi / 2) / kCapsuleCapRings;
    double c = r * std::cos(alpha), s = r * std::sin(alpha);
    for (int m = 0; m < kCapsuleAround; ++m) {
      double beta = 2.0 * kPi * m / kCapsuleAround;
      out.push_back(d * (L + c) + (e1 * std::cos(beta) + e2 * std::sin(beta)) * s);
    }
  }
  out.push_back(d * (L + r));  // top pole
}

inline void capsule_faces(int base, std::vector<std::array<int, 3>>& out) {
  const int A = kCapsuleAround;
  auto ring = [&](int k) { return base + 1 + k * A; };  // k = 0 .. 2*rings-1
  int bottom_pole = base;
  int top_pole = base + kCapsuleVerts - 1;
  for (int m = 0; m < A; ++m) {
    int m1 = (m + 1) % A;
    out.push_back({bottom_pole, ring(0) + m1, ring(0) + m});
  }
  for (int k = 0; k + 1 < 2 * kCapsuleCapRings; ++k) {
    for (int m = 0; m < A; ++m) {
      int m1 = (m + 1) % A;
      out.push_back({ring(k) + m, ring(k) + m1, ring(k + 1) + m1});
      out.push_back({ring(k) + m, ring(k + 1) + m1, ring(k + 1) + m});
    }
  }
  int last = 2 * kCapsuleCapRings - 1;
  for (int m = 0; m < A; ++m) {
    int m1 = (m + 1) % A;
    out.push_back({top_pole, ring(last) + m, ring(last) + m1});
  }
}

}  // namespace hand_detail

inline HandSkeleton forward_kinematics(const HandPose& pose) {
  HandSkeleton s;
  hand_detail::forward_chain(pose, s, nullptr);
  return s;
}

// Capsule skinning. The vertex count and face list depend only on the shape,
// giving vertex-level correspondence across poses. The mesh is a union of
// closed per-bone capsules; every edge is shared by exactly two faces.
inline HandMesh skin(const HandPose& pose) {
  pose.shape.validate();
  const auto& mdirs = hand_detail::metacarpal_dirs();
  const auto& fdirs = hand_detail::finger_dirs();

  HandSkeleton skel;
  hand_detail::BoneTransforms bones;
  hand_detail::forward_chain(pose, skel, &bones);

  HandPose rest = rest_pose(pose.shape);
  HandSkeleton rest_skel;
  hand_detail::BoneTransforms rest_bones;
  hand_detail::forward_chain(rest, rest_skel, &rest_bones);

  HandMesh out;
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
  verts.reserve(kNumBones * hand_detail::kCapsuleVerts);
  out.canonical_vertices.reserve(kNumBones * hand_detail::kCapsuleVerts);
  out.bone_assignment.reserve(kNumBones * hand_detail::kCapsuleVerts);

  std::vector<Vec3> local;
  for (int f = 0; f < kNumFingers; ++f) {
    for (int w = 0; w < 4; ++w) {
      int b = bone_index(f, w);
      const Vec3& dir = (w == 0) ? mdirs[f] : fdirs[f];
      double L = pose.shape.bone_length(f, w);
      double r = pose.shape.bone_radius(f, w);
      local.clear();
      hand_detail::capsule_local_vertices(dir, L, r, local);
      int base = static_cast<int>(verts.size());
      for (const auto& v : local) {
        verts.push_back(bones.start[b] + bones.rot[b] * v);
        out.canonical_vertices.push_back(rest_bones.start[b] + rest_bones.rot[b] * v);
        out.bone_assignment.push_back(b);
      }
      hand_detail::capsule_faces(base, faces);
    }
  }
  out.mesh = TriMesh(std::move(verts), std::move(faces));
  return out;
}

// Vertex positions only, no mesh rebuild; for gradient probes that only need
// geometry. Output order matches skin().
inline void skin_vertices(const HandPose& pose, std::vector<Vec3>& out) {
  const auto& mdirs = hand_detail::metacarpal_dirs();
  const auto& fdirs = hand_detail::finger_dirs();
  HandSkeleton skel;
  hand_detail::BoneTransforms bones;
  hand_detail::forward_chain(pose, skel, &bones);
  out.clear();
  out.reserve(kNumBones * hand_detail::kCapsuleVerts);
  std::vector<Vec3> local;
  for (int f = 0; f < kNumFingers; ++f) {
    for (int w = 0; w < 4; ++w) {
      int b = bone_index(f, w);
      const Vec3& dir = (w == 0) ? mdirs[f] : fdirs[f];
      local.clear();
      hand_detail::capsule_local_vertices(dir, pose.shape.bone_length(f, w),
                                          pose.shape.bone_radius(f, w), local);
      for (const auto& v : local) out.push_back(bones.start[b] + bones.rot[b] * v);
    }
  }
}

// Gaussian parameter noise. Draw order is pinned: trans xyz, root xyz, then
// joints 0..14 (xyz each), so a fixed seed yields a fixed perturbation.
inline HandPose perturb(const HandPose& pose, const NoiseConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  HandPose out = pose;
  out.trans.x += cfg.sigma_trans * rng.normal();
  out.trans.y += cfg.sigma_trans * rng.normal();
  out.trans.z += cfg.sigma_trans * rng.normal();
  out.root_rot.x += cfg.sigma_root * rng.normal();
  out.root_rot.y += cfg.sigma_root * rng.normal();
  out.root_rot.z += cfg.sigma_root * rng.normal();
  for (auto& j : out.joint_angles) {
    j.x += cfg.sigma_pose * rng.normal();
    j.y += cfg.sigma_pose * rng.normal();
    j.z += cfg.sigma_pose * rng.normal();
  }
  out.clamp_joints();
  return out;
}

// Parameter-space linear blend; element 1 is `clean` exactly, element m is
// `noisy` exactly.
inline std::vector<HandPose> interpolate(const HandPose& clean, const HandPose& noisy, int m) {
  if (m < 2) throw std::invalid_argument("interpolate: m must be >= 2");
  if (!(clean.shape == noisy.shape)) throw std::invalid_argument("interpolate: shape mismatch");
  auto lerp = [](const Vec3& a, const Vec3& b, double f) { return a * (1.0 - f) + b * f; };
  std::vector<HandPose> out;
  out.reserve(m);
  for (int j = 0; j < m; ++j) {
    double f = static_cast<double>(j) / (m - 1);
    HandPose p = clean;
    p.trans = lerp(clean.trans, noisy.trans, f);
    p.root_rot = lerp(clean.root_rot, noisy.root_rot, f);
    for (int k = 0; k < kNumJoints; ++k)
      p.joint_angles[k] = lerp(clean.joint_angles[k], noisy.joint_angles[k], f);
    out.push_back(p);
  }
  return out;
}

// Applies a global rigid transform to the pose parameters.
inline HandPose transform_pose(const Rigid& g, const HandPose& pose) {
  HandPose out = pose;
  out.trans = g.apply(pose.trans);
  out.root_rot = matrix_to_axis_angle(g.R * axis_angle_to_matrix(pose.root_rot));
  return out;
}

}  // namespace hoi
