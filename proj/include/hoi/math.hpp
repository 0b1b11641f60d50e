#pragma once

// Small 3D math kernel and a deterministic RNG. The RNG pins its own
// uniform/normal transforms on top of mt19937_64 so that seeded runs are
// bit-identical regardless of standard-library distribution internals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace hoi {

constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  return n > 0.0 ? v / n : Vec3{0, 0, 0};
}

inline Vec3 min(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return Mat3{}; }

  double operator()(int r, int c) const { return m[r * 3 + c]; }
  double& operator()(int r, int c) { return m[r * 3 + c]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }

  Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
};

// Rodrigues. Safe near zero angle (second-order series).
inline Mat3 axis_angle_to_matrix(const Vec3& aa) {
  double theta = norm(aa);
  Mat3 r = Mat3::identity();
  double a, b;  // sin(t)/t, (1-cos(t))/t^2
  if (theta < 1e-9) {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  const double wx = aa.x, wy = aa.y, wz = aa.z;
  // R = I + a*[w]_x + b*[w]_x^2
  r(0, 0) = 1 + b * (-wz * wz - wy * wy);
  r(0, 1) = -a * wz + b * wx * wy;
  r(0, 2) = a * wy + b * wx * wz;
  r(1, 0) = a * wz + b * wx * wy;
  r(1, 1) = 1 + b * (-wz * wz - wx * wx);
  r(1, 2) = -a * wx + b * wy * wz;
  r(2, 0) = -a * wy + b * wx * wz;
  r(2, 1) = a * wx + b * wy * wz;
  r(2, 2) = 1 + b * (-wy * wy - wx * wx);
  return r;
}

inline Vec3 matrix_to_axis_angle(const Mat3& R) {
  double tr = R(0, 0) + R(1, 1) + R(2, 2);
  double c = std::clamp((tr - 1.0) * 0.5, -1.0, 1.0);
  double theta = std::acos(c);
  if (theta < 1e-12) return {0, 0, 0};
  if (theta > kPi - 1e-6) {
    // Near pi: extract axis from the symmetric part.
    Vec3 axis{std::sqrt(std::max(0.0, (R(0, 0) + 1) / 2)),
              std::sqrt(std::max(0.0, (R(1, 1) + 1) / 2)),
              std::sqrt(std::max(0.0, (R(2, 2) + 1) / 2))};
    // Fix signs from the off-diagonal terms.
    if (R(2, 1) - R(1, 2) < 0) axis.x = -axis.x;
    if (R(0, 2) - R(2, 0) < 0) axis.y = -axis.y;
    if (R(1, 0) - R(0, 1) < 0) axis.z = -axis.z;
    return normalized(axis) * theta;
  }
  double s = 2.0 * std::sin(theta);
  Vec3 axis{(R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s, (R(1, 0) - R(0, 1)) / s};
  return axis * theta;
}

// Minimal rotation taking unit vector `from` to unit vector `to`.
inline Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  double c = std::clamp(dot(from, to), -1.0, 1.0);
  if (c > 1.0 - 1e-12) return Mat3::identity();
  if (c < -1.0 + 1e-9) {
    // Antiparallel: rotate pi about any axis orthogonal to `from`.
    Vec3 ortho = std::abs(from.x) < 0.9 ? cross(from, Vec3{1, 0, 0}) : cross(from, Vec3{0, 1, 0});
    return axis_angle_to_matrix(normalized(ortho) * kPi);
  }
  Vec3 axis = normalized(cross(from, to));
  return axis_angle_to_matrix(axis * std::acos(c));
}

// Rigid transform p -> R*p + t.
struct Rigid {
  Mat3 R;
  Vec3 t;

  static Rigid identity() { return {Mat3::identity(), {0, 0, 0}}; }

  Vec3 apply(const Vec3& p) const { return R * p + t; }
  Vec3 apply_dir(const Vec3& d) const { return R * d; }

  Rigid compose(const Rigid& inner) const {  // this ∘ inner
    return {R * inner.R, R * inner.t + t};
  }

  Rigid inverse() const {
    Mat3 Rt = R.transposed();
    return {Rt, -(Rt * t)};
  }
};

// Orthonormal basis completion: returns (e1, e2) with {e1, e2, n} right-handed.
inline void orthonormal_basis(const Vec3& n, Vec3& e1, Vec3& e2) {
  if (std::abs(n.z) < 0.9)
    e1 = normalized(cross(Vec3{0, 0, 1}, n));
  else
    e1 = normalized(cross(Vec3{1, 0, 0}, n));
  e2 = cross(n, e1);
}

// splitmix64; used to derive per-item seeds from a master seed.
inline uint64_t split_seed(uint64_t seed, uint64_t salt) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic RNG. mt19937_64 is fully specified by the standard; the
// uniform and normal transforms below are pinned here so outputs do not
// depend on libstdc++ distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return state_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(state_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Unbiased integer in [0, n).
  uint64_t below(uint64_t n) {
    if (n <= 1) return 0;
    uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
    uint64_t v;
    do { v = state_(); } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller; caches the second variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  Vec3 normal3(double sigma) { return {sigma * normal(), sigma * normal(), sigma * normal()}; }

  Vec3 unit_vector() {
    // Uniform on the sphere.
    double z = uniform(-1.0, 1.0);
    double phi = uniform(0.0, 2.0 * kPi);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hoi
