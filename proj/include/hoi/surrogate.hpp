#pragma once

// Learned differentiable stand-ins for the physical plausibility metrics:
// permutation-invariant point-set classifiers (shared per-point encoder,
// max-pool, small head) trained against hard/soft targets derived from PD
// and FE/ME. Forward and reverse passes are hand-rolled so both parameter
// and input gradients are exact; the refiner consumes the input gradients.
//
// Targets:
//   b_hard = 1[PD >= c_PD],  b_soft = 1 - 2^(-PD / c_PD)
//   s_hard = 1[FE >= c_FE],  s_soft = s_hard * (0.5 + arctan(ME) / pi)

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hoi/dynamics.hpp"
#include "hoi/field.hpp"
#include "hoi/hand.hpp"
#include "hoi/math.hpp"

namespace hoi {

struct GraspTargets {
  int b_hard = 0;
  double b_soft = 0.0;
};

struct ManipTargets {
  int s_hard = 0;
  double s_soft = 0.0;
};

inline GraspTargets grasp_targets(double pd, double c_pd = 0.015) {
  if (pd < 0) throw std::invalid_argument("grasp_targets: pd must be >= 0");
  GraspTargets t;
  t.b_hard = pd >= c_pd ? 1 : 0;
  t.b_soft = 1.0 - std::exp2(-pd / c_pd);  // c_soft = ln2 / c_PD
  return t;
}

inline ManipTargets manip_targets(double fe, double me, double c_fe = 0.1) {
  ManipTargets t;
  t.s_hard = fe >= c_fe ? 1 : 0;
  t.s_soft = t.s_hard * (0.5 + std::atan(me) / kPi);
  return t;
}

// Binary cross entropy with the prediction clamped away from {0, 1}.
inline double bce(double p, double t) {
  constexpr double eps = 1e-7;
  p = std::clamp(p, eps, 1.0 - eps);
  return -t * std::log(p) - (1.0 - t) * std::log(1.0 - p);
}

// ---- Point-set network ---------------------------------------------------

template <typename T>
struct PointNet {
  int in_dim = 0, enc1 = 64, enc2 = 128, head = 64;
  std::vector<T> W1, b1;  // enc1 x in_dim
  std::vector<T> W2, b2;  // enc2 x enc1
  std::vector<T> W3, b3;  // head x enc2
  std::vector<T> W4, b4;  // 1 x head

  void resize(int in, int h1, int h2, int h3) {
    in_dim = in; enc1 = h1; enc2 = h2; head = h3;
    W1.assign(static_cast<size_t>(h1) * in, T(0)); b1.assign(h1, T(0));
    W2.assign(static_cast<size_t>(h2) * h1, T(0)); b2.assign(h2, T(0));
    W3.assign(static_cast<size_t>(h3) * h2, T(0)); b3.assign(h3, T(0));
    W4.assign(h3, T(0)); b4.assign(1, T(0));
  }

  // Xavier-uniform init, deterministic per seed.
  void init(int in, uint64_t seed, int h1 = 64, int h2 = 128, int h3 = 64) {
    resize(in, h1, h2, h3);
    Rng rng(seed);
    auto fill = [&](std::vector<T>& w, int fan_in, int fan_out) {
      double lim = std::sqrt(6.0 / (fan_in + fan_out));
      for (auto& x : w) x = static_cast<T>(rng.uniform(-lim, lim));
    };
    fill(W1, in, h1);
    fill(W2, h1, h2);
    fill(W3, h2, h3);
    fill(W4, h3, 1);
  }

  size_t param_count() const {
    return W1.size() + b1.size() + W2.size() + b2.size() + W3.size() + b3.size() + W4.size() +
           b4.size();
  }

  // Fixed-order parameter blocks, shared by Adam, serialization and
  // finite-difference checks.
  std::array<std::vector<T>*, 8> param_blocks() {
    return {&W1, &b1, &W2, &b2, &W3, &b3, &W4, &b4};
  }
  std::array<const std::vector<T>*, 8> param_blocks() const {
    return {&W1, &b1, &W2, &b2, &W3, &b3, &W4, &b4};
  }
};

template <typename T>
struct PointNetWorkspace {
  std::vector<T> a1, a2;      // rows x enc1, rows x enc2 (post-activation)
  std::vector<T> pooled;      // enc2
  std::vector<int> argmax;    // enc2
  std::vector<T> h;           // head (post-activation)
  T logit = T(0);

  std::vector<T> da1, dz2;    // scratch for backward
};

template <typename T>
struct PointNetGrads {
  PointNet<T> g;  // same shapes, holds gradients
  void zero(const PointNet<T>& net) {
    g.resize(net.in_dim, net.enc1, net.enc2, net.head);
  }
};

namespace surrogate_detail {

template <typename T>
inline void matvec(const std::vector<T>& W, const T* x, int out, int in, const std::vector<T>& b,
                   T* y) {
  for (int o = 0; o < out; ++o) {
    const T* row = W.data() + static_cast<size_t>(o) * in;
    T s = b[o];
    for (int i = 0; i < in; ++i) s += row[i] * x[i];
    y[o] = s;
  }
}

}  // namespace surrogate_detail

// Activation: x / (1 + sqrt(x^2 + 1)), a smooth sigmoid onto (-1, 1) that is
// much cheaper than tanh on the hot per-point path and infinitely
// differentiable (finite-difference gradient checks stay clean). The
// derivative is recoverable from the activation value alone:
// f'(x) = (1 - a^2)^2 / (2 (1 + a^2)).
template <typename T>
inline T activation(T x) {
  return x / (T(1) + std::sqrt(x * x + T(1)));
}

template <typename T>
inline T activation_grad_from_value(T a) {
  T one_m = T(1) - a * a;
  return one_m * one_m / (T(2) * (T(1) + a * a));
}

template <typename T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// Forward pass over `rows` points with `in_dim` features each (row-major X).
// Returns the score in (0, 1); the workspace caches activations for backward.
template <typename T>
inline T pointnet_forward(const PointNet<T>& net, const T* X, int rows,
                          PointNetWorkspace<T>& ws) {
  if (rows <= 0) throw std::invalid_argument("pointnet_forward: need at least one point");
  ws.a1.resize(static_cast<size_t>(rows) * net.enc1);
  ws.a2.resize(static_cast<size_t>(rows) * net.enc2);
  ws.pooled.assign(net.enc2, T(0));
  ws.argmax.assign(net.enc2, 0);
  ws.h.resize(net.head);
  for (int i = 0; i < rows; ++i) {
    const T* x = X + static_cast<size_t>(i) * net.in_dim;
    T* a1 = ws.a1.data() + static_cast<size_t>(i) * net.enc1;
    T* a2 = ws.a2.data() + static_cast<size_t>(i) * net.enc2;
    surrogate_detail::matvec(net.W1, x, net.enc1, net.in_dim, net.b1, a1);
    for (int k = 0; k < net.enc1; ++k) a1[k] = activation(a1[k]);
    surrogate_detail::matvec(net.W2, a1, net.enc2, net.enc1, net.b2, a2);
    for (int k = 0; k < net.enc2; ++k) {
      a2[k] = activation(a2[k]);
      if (i == 0 || a2[k] > ws.pooled[k]) {
        ws.pooled[k] = a2[k];
        ws.argmax[k] = i;
      }
    }
  }
  surrogate_detail::matvec(net.W3, ws.pooled.data(), net.head, net.enc2, net.b3, ws.h.data());
  for (int k = 0; k < net.head; ++k) ws.h[k] = activation(ws.h[k]);
  T logit = net.b4[0];
  for (int k = 0; k < net.head; ++k) logit += net.W4[k] * ws.h[k];
  ws.logit = logit;
  return sigmoid(logit);
}

// Reverse pass from d(loss)/d(logit). Accumulates parameter gradients into
// `grads` and, when dX is non-null, writes input gradients (same layout as
// X). Only max-pool winners receive encoder gradients, which keeps the pass
// cheap for large point counts.
template <typename T>
inline void pointnet_backward(const PointNet<T>& net, const T* X, int rows,
                              const PointNetWorkspace<T>& ws, T dlogit, PointNetGrads<T>& grads,
                              T* dX = nullptr) {
  auto& g = grads.g;
  std::vector<T> dh(net.head), dz3(net.head), dpooled(net.enc2, T(0));
  g.b4[0] += dlogit;
  for (int k = 0; k < net.head; ++k) {
    g.W4[k] += dlogit * ws.h[k];
    dh[k] = dlogit * net.W4[k];
  }
  for (int k = 0; k < net.head; ++k) dz3[k] = dh[k] * activation_grad_from_value(ws.h[k]);
  for (int o = 0; o < net.head; ++o) {
    T* row = g.W3.data() + static_cast<size_t>(o) * net.enc2;
    for (int i = 0; i < net.enc2; ++i) row[i] += dz3[o] * ws.pooled[i];
    g.b3[o] += dz3[o];
    const T* wrow = net.W3.data() + static_cast<size_t>(o) * net.enc2;
    for (int i = 0; i < net.enc2; ++i) dpooled[i] += wrow[i] * dz3[o];
  }
  if (dX) std::fill(dX, dX + static_cast<size_t>(rows) * net.in_dim, T(0));
  // Group pooled gradients by winning point.
  std::vector<T> da2(net.enc2);
  std::vector<int> winners;
  winners.reserve(net.enc2);
  {
    std::vector<char> seen(rows, 0);
    for (int k = 0; k < net.enc2; ++k)
      if (!seen[ws.argmax[k]]) {
        seen[ws.argmax[k]] = 1;
        winners.push_back(ws.argmax[k]);
      }
  }
  std::vector<T> dz2(net.enc2), da1(net.enc1), dz1(net.enc1);
  for (int i : winners) {
    const T* x = X + static_cast<size_t>(i) * net.in_dim;
    const T* a1 = ws.a1.data() + static_cast<size_t>(i) * net.enc1;
    const T* a2 = ws.a2.data() + static_cast<size_t>(i) * net.enc2;
    for (int k = 0; k < net.enc2; ++k)
      da2[k] = ws.argmax[k] == i ? dpooled[k] : T(0);
    for (int k = 0; k < net.enc2; ++k) dz2[k] = da2[k] * activation_grad_from_value(a2[k]);
    std::fill(da1.begin(), da1.end(), T(0));
    for (int o = 0; o < net.enc2; ++o) {
      if (dz2[o] == T(0)) continue;
      T* row = g.W2.data() + static_cast<size_t>(o) * net.enc1;
      const T* wrow = net.W2.data() + static_cast<size_t>(o) * net.enc1;
      for (int k = 0; k < net.enc1; ++k) {
        row[k] += dz2[o] * a1[k];
        da1[k] += wrow[k] * dz2[o];
      }
      g.b2[o] += dz2[o];
    }
    for (int k = 0; k < net.enc1; ++k) dz1[k] = da1[k] * activation_grad_from_value(a1[k]);
    T* dx = dX ? dX + static_cast<size_t>(i) * net.in_dim : nullptr;
    for (int o = 0; o < net.enc1; ++o) {
      if (dz1[o] == T(0)) continue;
      T* row = g.W1.data() + static_cast<size_t>(o) * net.in_dim;
      const T* wrow = net.W1.data() + static_cast<size_t>(o) * net.in_dim;
      for (int k = 0; k < net.in_dim; ++k) row[k] += dz1[o] * x[k];
      if (dx)
        for (int k = 0; k < net.in_dim; ++k) dx[k] += wrow[k] * dz1[o];
      g.b1[o] += dz1[o];
    }
  }
}

// ---- Input feature layouts ----------------------------------------------

enum class SurrogateKind { grasp, manip };

struct FeatureScales {
  double position = 0.1;   // keypoints / canonical positions (m)
  double distance = 0.02;  // signed field distance (m)
  double accel = 9.81;     // object acceleration (m/s^2)
};

constexpr int kGraspFeatureDim = 6;   // position(3), surface clearance, source tag(2)
constexpr int kManipFeatureDim = 11;  // normal(3), m, d, canonical p(3), accel(3)

// Hand probe points for the grasp net: the 21 keypoints plus the 20 bone
// midpoints, each carrying its capsule radius so the clearance feature
// reflects the skin surface rather than the bone axis.
constexpr int kGraspHandPoints = kNumKeypoints + kNumBones;

// Clearance values clamp here (m) so far-away hands do not dominate the
// feature range.
constexpr double kGraspDistClamp = 0.1;

struct GraspProbe {
  std::array<Vec3, kGraspHandPoints> points;
  std::array<double, kGraspHandPoints> radius;
};

inline GraspProbe grasp_probe_points(const HandSkeleton& skel, const HandShape& shape) {
  GraspProbe out;
  for (int i = 0; i < kNumKeypoints; ++i) out.points[i] = skel.keypoints[i];
  out.radius[0] = shape.metacarpal_radius[2];
  for (int f = 0; f < kNumFingers; ++f)
    for (int w = 0; w < 4; ++w)
      out.radius[keypoint_index(f, w)] = shape.bone_radius(f, std::min(w + 1, 3));
  for (int f = 0; f < kNumFingers; ++f)
    for (int w = 0; w < 4; ++w) {
      Vec3 a = w == 0 ? skel.keypoints[0] : skel.keypoints[keypoint_index(f, w - 1)];
      Vec3 b = skel.keypoints[keypoint_index(f, w)];
      int idx = kNumKeypoints + bone_index(f, w);
      out.points[idx] = (a + b) * 0.5;
      out.radius[idx] = shape.bone_radius(f, w);
    }
  return out;
}

// Frozen closest-point data per hand probe point; lets the refiner
// differentiate the clearance feature with the correspondence held fixed.
struct KeypointSurface {
  std::array<Vec3, kGraspHandPoints> closest;
  std::array<double, kGraspHandPoints> sign;  // +1 outside, -1 inside
};

inline KeypointSurface keypoint_surface(const GraspProbe& probe, const TriMesh& object) {
  KeypointSurface out;
  for (int i = 0; i < kGraspHandPoints; ++i) {
    ClosestPoint cp = object.closest_point(probe.points[i]);
    out.closest[i] = cp.point;
    out.sign[i] = object.inside(probe.points[i]) ? -1.0 : 1.0;
  }
  return out;
}

// Capsule surface clearance: signed distance of the probe point to the
// object minus the capsule radius; negative when the hand skin overlaps the
// object.
inline double probe_clearance(const Vec3& p, double radius, const Vec3& closest, double sign) {
  return std::clamp(sign * norm(p - closest) - radius, -kGraspDistClamp, kGraspDistClamp);
}

// Hand probe points plus an object point cloud, both centered at the object
// centroid, with per-point surface clearance and a one-hot source tag.
template <typename T>
inline void grasp_features(const GraspProbe& probe, const KeypointSurface& surf,
                           const std::vector<Vec3>& object_cloud, const Vec3& centroid,
                           std::vector<T>& out, const FeatureScales& sc = {}) {
  out.resize((kGraspHandPoints + object_cloud.size()) * kGraspFeatureDim);
  size_t r = 0;
  auto put = [&](const Vec3& p, double sd, T hand_tag, T obj_tag) {
    T* row = out.data() + r * kGraspFeatureDim;
    row[0] = static_cast<T>((p.x - centroid.x) / sc.position);
    row[1] = static_cast<T>((p.y - centroid.y) / sc.position);
    row[2] = static_cast<T>((p.z - centroid.z) / sc.position);
    row[3] = static_cast<T>(sd / sc.distance);
    row[4] = hand_tag;
    row[5] = obj_tag;
    ++r;
  };
  for (int i = 0; i < kGraspHandPoints; ++i)
    put(probe.points[i],
        probe_clearance(probe.points[i], probe.radius[i], surf.closest[i], surf.sign[i]), T(1),
        T(0));
  for (const auto& p : object_cloud) put(p, 0.0, T(0), T(1));
}

// Full field tuple per sample plus the broadcast object acceleration.
template <typename T>
inline void manip_features(const CorrField& field, const Vec3& accel, std::vector<T>& out,
                           const FeatureScales& sc = {}) {
  out.resize(field.size() * kManipFeatureDim);
  for (size_t j = 0; j < field.size(); ++j) {
    T* row = out.data() + j * kManipFeatureDim;
    const auto& s = field.samples[j];
    row[0] = static_cast<T>(s.normal.x);
    row[1] = static_cast<T>(s.normal.y);
    row[2] = static_cast<T>(s.normal.z);
    row[3] = static_cast<T>(field.m[j]);
    row[4] = static_cast<T>(field.d[j] / sc.distance);
    row[5] = static_cast<T>(field.p[j].x / sc.position);
    row[6] = static_cast<T>(field.p[j].y / sc.position);
    row[7] = static_cast<T>(field.p[j].z / sc.position);
    row[8] = static_cast<T>(accel.x / sc.accel);
    row[9] = static_cast<T>(accel.y / sc.accel);
    row[10] = static_cast<T>(accel.z / sc.accel);
  }
}

// ---- Trained net wrapper + serialization ---------------------------------

struct SurrogateNet {
  SurrogateKind kind = SurrogateKind::grasp;
  PointNet<float> net;
  FeatureScales scales;
  uint64_t seed = 0;

  double score(const std::vector<float>& X) const {
    PointNetWorkspace<float> ws;
    int rows = static_cast<int>(X.size()) / net.in_dim;
    return pointnet_forward(net, X.data(), rows, ws);
  }
};

namespace surrogate_detail {
constexpr char kMagic[4] = {'P', 'S', 'N', '1'};
}

// Flat binary: magic, kind, layer count, per-layer dims, then little-endian
// float32 weights and biases in block order. A JSON sidecar (<path>.json)
// documents the input layout.
inline void save_surrogate(const SurrogateNet& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write net file: " + path);
  out.write(surrogate_detail::kMagic, 4);
  auto put_u32 = [&](uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<char*>(b), 4);
  };
  put_u32(1);  // version
  put_u32(s.kind == SurrogateKind::grasp ? 0 : 1);
  const int dims[5] = {s.net.in_dim, s.net.enc1, s.net.enc2, s.net.head, 1};
  put_u32(5);
  for (int d : dims) put_u32(static_cast<uint32_t>(d));
  auto put_f32 = [&](float f) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(v);
  };
  for (const auto* blk : s.net.param_blocks())
    for (float f : *blk) put_f32(f);
  out.close();

  std::ofstream side(path + ".json");
  side << "{\n  \"kind\": \"" << (s.kind == SurrogateKind::grasp ? "grasp" : "manip") << "\",\n";
  side << "  \"format\": \"PSN1: magic, u32 version, u32 kind, u32 ndims, dims, "
          "then per layer W row-major and b as little-endian float32\",\n";
  side << "  \"dims\": [" << s.net.in_dim << ", " << s.net.enc1 << ", " << s.net.enc2 << ", "
       << s.net.head << ", 1],\n";
  if (s.kind == SurrogateKind::grasp) {
    side << "  \"point_features\": [\"(position - object_centroid) / position_scale (3)\", "
            "\"signed surface distance / distance_scale (keypoints only)\", \"hand tag\", "
            "\"object tag\"],\n";
    side << "  \"points\": \"21 hand keypoints followed by the object point cloud\",\n";
  } else {
    side << "  \"point_features\": [\"object normal (3)\", \"correspondence flag m\", "
            "\"signed distance d / distance_scale\", \"canonical hand position / "
            "position_scale (3)\", \"object acceleration / accel_scale (3)\"],\n";
    side << "  \"points\": \"all field samples of the frame\",\n";
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "  \"scales\": {\"position\": %.9g, \"distance\": %.9g, \"accel\": %.9g},\n",
                s.scales.position, s.scales.distance, s.scales.accel);
  side << buf;
  side << "  \"seed\": " << s.seed << "\n}\n";
}

inline SurrogateNet load_surrogate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open net file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, surrogate_detail::kMagic, 4) != 0)
    throw std::runtime_error("bad net file (magic mismatch): " + path);
  auto get_u32 = [&]() {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw std::runtime_error("truncated net file: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  };
  uint32_t version = get_u32();
  if (version != 1) throw std::runtime_error("unsupported net file version");
  SurrogateNet s;
  s.kind = get_u32() == 0 ? SurrogateKind::grasp : SurrogateKind::manip;
  uint32_t nd = get_u32();
  if (nd != 5) throw std::runtime_error("unsupported net layout");
  int dims[5];
  for (auto& d : dims) d = static_cast<int>(get_u32());
  s.net.resize(dims[0], dims[1], dims[2], dims[3]);
  for (auto* blk : s.net.param_blocks())
    for (auto& f : *blk) {
      uint32_t v = get_u32();
      std::memcpy(&f, &v, 4);
    }
  return s;
}

// ---- Training -------------------------------------------------------------

struct TrainConfig {
  double alpha_hard = 1.0;
  double alpha_soft = 1.0;
  double lr = 1e-3;
  double weight_decay = 1e-4;  // decoupled, applied to weights only
  int batch = 32;
  int epochs = 50;
  uint64_t seed = 0;
  // Stop once the validation F-score has not improved for this many epochs
  // (0 disables); never stops before min_epochs. The rule depends only on
  // the data, so runs stay deterministic.
  int early_stop_patience = 12;
  int min_epochs = 15;

  void validate() const {
    if (alpha_hard < 0 || alpha_soft < 0 || (alpha_hard == 0 && alpha_soft == 0))
      throw std::invalid_argument("loss weights must be >= 0 and not both zero");
  }
};

struct TrainExample {
  std::vector<float> X;
  float hard = 0;
  float soft = 0;
};

struct TrainResult {
  SurrogateNet net;
  double holdout_fscore = 0;
  std::vector<double> epoch_losses;
  int epochs_run = 0;
};

inline double surrogate_fscore(const SurrogateNet& s, const std::vector<TrainExample>& examples,
                               double threshold = 0.5) {
  long tp = 0, fp = 0, fn = 0;
  PointNetWorkspace<float> ws;
  for (const auto& e : examples) {
    int rows = static_cast<int>(e.X.size()) / s.net.in_dim;
    double p = pointnet_forward(s.net, e.X.data(), rows, ws);
    bool pred = p >= threshold;
    bool truth = e.hard >= 0.5f;
    if (pred && truth) tp++;
    else if (pred && !truth) fp++;
    else if (!pred && truth) fn++;
  }
  if (2 * tp + fp + fn == 0) return 1.0;
  return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

// Minibatch Adam on alpha_hard*BCE(p, hard) + alpha_soft*BCE(p, soft).
// Deterministic per seed; single-threaded. Keeps the epoch snapshot with the
// best validation F-score.
inline TrainResult train_surrogate(SurrogateKind kind, int in_dim,
                                   const std::vector<TrainExample>& train,
                                   const std::vector<TrainExample>& val,
                                   const std::vector<TrainExample>& holdout,
                                   const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw std::invalid_argument("train_surrogate: empty dataset");
  TrainResult res;
  res.net.kind = kind;
  res.net.seed = cfg.seed;
  res.net.net.init(in_dim, split_seed(cfg.seed, 0xA11CE));

  PointNet<float>& net = res.net.net;
  PointNetGrads<float> grads;
  PointNetWorkspace<float> ws;

  // Adam state.
  std::vector<std::vector<float>> m, v;
  for (auto* blk : net.param_blocks()) {
    m.emplace_back(blk->size(), 0.f);
    v.emplace_back(blk->size(), 0.f);
  }
  const float beta1 = 0.9f, beta2 = 0.999f, eps = 1e-8f;
  long step = 0;

  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  PointNet<float> best_net = net;
  double best_val = -1.0;
  int since_best = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(split_seed(cfg.seed, 0xE90C + epoch));
    shuffle_rng.shuffle(order);
    double epoch_loss = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch) {
      size_t end = std::min(order.size(), start + cfg.batch);
      grads.zero(net);
      float inv_batch = 1.0f / static_cast<float>(end - start);
      for (size_t bi = start; bi < end; ++bi) {
        const TrainExample& e = train[order[bi]];
        int rows = static_cast<int>(e.X.size()) / in_dim;
        float p = pointnet_forward(net, e.X.data(), rows, ws);
        epoch_loss += cfg.alpha_hard * bce(p, e.hard) + cfg.alpha_soft * bce(p, e.soft);
        // d(BCE(sigmoid(z), t))/dz = p - t.
        float dlogit = static_cast<float>(cfg.alpha_hard) * (p - e.hard) +
                       static_cast<float>(cfg.alpha_soft) * (p - e.soft);
        pointnet_backward(net, e.X.data(), rows, ws, dlogit * inv_batch, grads);
      }
      step++;
      float bc1 = 1.0f - std::pow(beta1, static_cast<float>(step));
      float bc2 = 1.0f - std::pow(beta2, static_cast<float>(step));
      auto blocks = net.param_blocks();
      auto gblocks = grads.g.param_blocks();
      for (size_t b = 0; b < blocks.size(); ++b) {
        auto& p = *blocks[b];
        auto& gp = *gblocks[b];
        bool is_weight = b % 2 == 0;  // even blocks are W, odd are biases
        float decay = is_weight ? static_cast<float>(cfg.lr * cfg.weight_decay) : 0.f;
        for (size_t i = 0; i < p.size(); ++i) {
          m[b][i] = beta1 * m[b][i] + (1 - beta1) * gp[i];
          v[b][i] = beta2 * v[b][i] + (1 - beta2) * gp[i] * gp[i];
          float mhat = m[b][i] / bc1;
          float vhat = v[b][i] / bc2;
          p[i] -= static_cast<float>(cfg.lr) * mhat / (std::sqrt(vhat) + eps) + decay * p[i];
        }
      }
    }
    res.epoch_losses.push_back(epoch_loss / train.size());
    res.epochs_run = epoch + 1;
    if (!val.empty()) {
      double f = surrogate_fscore(res.net, val);
      if (f > best_val + 1e-4) {
        best_val = f;
        best_net = net;
        since_best = 0;
      } else {
        since_best++;
        if (cfg.early_stop_patience > 0 && since_best >= cfg.early_stop_patience &&
            epoch + 1 >= cfg.min_epochs)
          break;
      }
    }
  }
  if (best_val >= 0) net = best_net;
  res.holdout_fscore = surrogate_fscore(res.net, holdout.empty() ? val : holdout);
  return res;
}

}  // namespace hoi
