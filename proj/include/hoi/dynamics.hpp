#pragma once

// Object kinematics and the two manipulation-feasibility optimizations:
//
//   FE: min || sum_j f_j - F ||   s.t. each f_j in its friction cone,
//       reported normalized by ||F|| so the result lies in [0, 1];
//   ME: min sum_j w_j ||f_j||     s.t. cones and sum_j f_j = F,
//       with w_j = (|d_j| - c_contact)^+ from the correspondence field.
//
// Both are convex second-order-cone programs. FE uses projected gradient
// descent with exact per-cone projection; ME uses an augmented-Lagrangian
// splitting (scaled-form ADMM) whose f-step is an exact closed-form prox.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hoi/field.hpp"
#include "hoi/math.hpp"

namespace hoi {

struct ObjectTrajectory {
  std::vector<Rigid> poses;
  double dt = 1.0 / 30.0;
  double mass = 1.0;               // kg
  Vec3 gravity = {0, 0, -9.81};    // m/s^2

  size_t size() const { return poses.size(); }

  void validate() const {
    if (dt <= 0) throw std::invalid_argument("trajectory dt must be > 0");
    if (poses.size() < 3) throw std::invalid_argument("trajectory needs at least 3 frames");
  }
};

// Finite-difference linear acceleration of the object centroid (base meshes
// are assumed centered at the origin, so the pose translation tracks the
// centroid). Central differences at interior frames; second-order one-sided
// stencils at the endpoints when four frames are available.
inline Vec3 acceleration(const ObjectTrajectory& traj, int frame) {
  traj.validate();
  int n = static_cast<int>(traj.poses.size());
  if (frame < 0 || frame >= n) throw std::out_of_range("acceleration: frame index out of range");
  double inv = 1.0 / (traj.dt * traj.dt);
  auto p = [&](int i) { return traj.poses[i].t; };
  if (frame == 0) {
    if (n >= 4) return (p(0) * 2.0 - p(1) * 5.0 + p(2) * 4.0 - p(3)) * inv;
    return (p(2) - p(1) * 2.0 + p(0)) * inv;
  }
  if (frame == n - 1) {
    if (n >= 4) return (p(n - 1) * 2.0 - p(n - 2) * 5.0 + p(n - 3) * 4.0 - p(n - 4)) * inv;
    return (p(n - 1) - p(n - 2) * 2.0 + p(n - 3)) * inv;
  }
  return (p(frame + 1) - p(frame) * 2.0 + p(frame - 1)) * inv;
}

// F = m * (-g + a): the net contact force needed for the observed motion.
inline Vec3 required_force(const Vec3& a, double mass, const Vec3& gravity) {
  if (mass <= 0) throw std::invalid_argument("required_force: mass must be > 0");
  return (a - gravity) * mass;
}

// Friction cone at a contact with outward surface normal n: forces f with
// f . (-n) / ||f|| >= 1 / sqrt(1 + mu^2), i.e. within angle arctan(mu) of
// the inward normal. f = 0 is always a member.
struct FrictionCone {
  Vec3 apex_normal;  // outward unit normal n
  double mu = 0.8;

  bool contains(const Vec3& f, double tol = 1e-9) const {
    double nf = norm(f);
    if (nf == 0) return true;
    return dot(f, -apex_normal) / nf >= 1.0 / std::sqrt(1.0 + mu * mu) - tol;
  }
};

// Exact Euclidean projection onto the second-order cone with axis -n and
// half-angle arctan(mu). Idempotent.
inline Vec3 cone_project(const Vec3& f, const FrictionCone& cone) {
  Vec3 a = -cone.apex_normal;
  double alpha = cone.mu;
  double t0 = dot(f, a);
  Vec3 w = f - a * t0;
  double r0 = norm(w);
  if (r0 <= alpha * t0) return f;            // inside (covers f = 0)
  if (alpha * r0 + t0 <= 0) return {0, 0, 0};  // polar cone: apex
  double t = (t0 + alpha * r0) / (1.0 + alpha * alpha);
  return a * t + w * (alpha * t / r0);
}

// Prox of  s*w*||.|| + indicator(cone)  at v, in closed form. The shrink
// output is returned when it already lies in the cone; otherwise the optimum
// sits on the cone boundary (or apex) with the tangential direction of v.
inline Vec3 cone_shrink_prox(const Vec3& v, double sw, const FrictionCone& cone) {
  double nv = norm(v);
  Vec3 shrunk = nv <= sw ? Vec3{0, 0, 0} : v * (1.0 - sw / nv);
  Vec3 a = -cone.apex_normal;
  double alpha = cone.mu;
  double ts = dot(shrunk, a);
  Vec3 ws = shrunk - a * ts;
  if (norm(ws) <= alpha * ts + 1e-15) return shrunk;
  double t0 = dot(v, a);
  Vec3 w = v - a * t0;
  double r0 = norm(w);
  double t = (t0 + alpha * r0 - sw * std::sqrt(1.0 + alpha * alpha)) / (1.0 + alpha * alpha);
  if (t <= 0) return {0, 0, 0};
  if (r0 < 1e-300) return {0, 0, 0};  // unreachable: handled by the shrink branch
  return a * t + w * (alpha * t / r0);
}

struct ForceSolve {
  std::vector<Vec3> forces;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct SolverOptions {
  int fe_max_iters = 500;
  double fe_tol = 1e-9;        // iterate-movement stopping threshold
  int me_max_iters = 2000;
  double me_eq_tol = 1e-3;     // equality residual, relative to max(1, ||F||)
  double me_sentinel = 1e6;
};

// Force error: distance from F to the Minkowski sum of the contact cones,
// normalized by ||F||. Projected gradient descent on 0.5*||sum f - F||^2
// with exact per-cone projection; spectral (Barzilai-Borwein) step lengths
// with a nonmonotone backtracking safeguard handle the near-antipodal
// geometries whose optimal forces are orders of magnitude larger than F.
inline std::pair<double, ForceSolve> solve_fe(const std::vector<Vec3>& normals, const Vec3& F,
                                              double mu, const SolverOptions& opts = {}) {
  ForceSolve sol;
  double Fn = norm(F);
  size_t M = normals.size();
  if (Fn == 0) {
    sol.forces.assign(M, Vec3{0, 0, 0});
    sol.converged = true;
    return {0.0, sol};
  }
  if (M == 0) {
    sol.objective = Fn;
    sol.converged = true;
    return {1.0, sol};
  }
  std::vector<FrictionCone> cones(M);
  for (size_t j = 0; j < M; ++j) cones[j] = FrictionCone{normalized(normals[j]), mu};

  std::vector<Vec3> f(M, Vec3{0, 0, 0}), fprev(M), cand(M), fbest(M);
  Vec3 r = -1.0 * F;  // gradient of every block: sum f - F
  Vec3 rprev = r;
  double obj = 0.5 * norm2(r);
  double best = obj;
  double step = 1.0 / static_cast<double>(M);
  std::vector<double> recent(1, obj);  // nonmonotone reference window
  int it = 0;
  for (; it < opts.fe_max_iters; ++it) {
    double ref = 0;
    size_t lo = recent.size() > 10 ? recent.size() - 10 : 0;
    for (size_t h = lo; h < recent.size(); ++h) ref = std::max(ref, recent[h]);
    double s = step;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vec3 rc{0, 0, 0};
      for (size_t j = 0; j < M; ++j) {
        cand[j] = cone_project(f[j] - r * s, cones[j]);
        rc += cand[j];
      }
      rc -= F;
      double cobj = 0.5 * norm2(rc);
      if (cobj < ref || cobj <= best + 1e-18) {
        fprev.swap(f);
        f.swap(cand);
        rprev = r;
        r = rc;
        obj = cobj;
        recent.push_back(obj);
        if (obj < best) {
          best = obj;
          fbest = f;
        }
        accepted = true;
        break;
      }
      s *= 0.3;
    }
    if (!accepted) break;  // no descent even at a tiny step: stationary
    double num = 0, den = 0;
    Vec3 dr = r - rprev;
    for (size_t j = 0; j < M; ++j) {
      Vec3 df = f[j] - fprev[j];
      num += dot(df, df);
      den += dot(df, dr);
    }
    step = den > 1e-300 ? std::clamp(num / den, 1e-6, 1e8) : 1e8;
    if (num <= opts.fe_tol * opts.fe_tol) break;  // iterates stopped moving
  }
  sol.forces = fbest;
  sol.objective = std::sqrt(2.0 * best);
  sol.converged = it < opts.fe_max_iters;
  sol.iterations = it;
  double fe = std::clamp(sol.objective / Fn, 0.0, 1.0);
  return {fe, sol};
}

// Weights for ME: (|d_j| - c_contact)^+ where a correspondence exists; for
// m_j = 0 the closest-point distance to the hand stands in for |d_j|.
inline std::vector<double> me_weights(const CorrField& field, double c_contact) {
  std::vector<double> w(field.size());
  for (size_t j = 0; j < field.size(); ++j) {
    double dist = field.m[j] == 1 ? std::abs(field.d[j]) : field.cp_dist[j];
    w[j] = std::max(0.0, dist - c_contact);
  }
  return w;
}

// Manipulation expense on explicit cones/weights. Scaled-form ADMM: the
// f-step is the exact cone-constrained shrink prox, the z-step projects onto
// the affine constraint sum z = F. Returns the sentinel with converged=false
// when the equality residual cannot be driven below tolerance (infeasible or
// stalled).
inline std::pair<double, ForceSolve> solve_me_weighted(const std::vector<Vec3>& normals,
                                                       const std::vector<double>& w, const Vec3& F,
                                                       double mu,
                                                       const SolverOptions& opts = {}) {
  ForceSolve sol;
  size_t N = normals.size();
  double Fn = norm(F);
  if (Fn == 0) {
    sol.forces.assign(N, Vec3{0, 0, 0});
    sol.converged = true;
    return {0.0, sol};
  }
  if (N == 0) {
    sol.objective = opts.me_sentinel;
    sol.converged = false;
    return {opts.me_sentinel, sol};
  }
  std::vector<FrictionCone> cones(N);
  for (size_t j = 0; j < N; ++j) cones[j] = FrictionCone{normalized(normals[j]), mu};

  double rho = 0.01 * std::max(1.0, Fn);
  std::vector<Vec3> f(N, Vec3{0, 0, 0}), z(N, F / static_cast<double>(N)), u(N, Vec3{0, 0, 0});

  double eq_tol = opts.me_eq_tol * std::max(1.0, Fn);
  int it = 0;
  // ADMM residuals oscillate; keep the best feasible iterate seen so far and
  // stop once its objective stalls across a window.
  std::vector<Vec3> f_best;
  double me_best = std::numeric_limits<double>::infinity();
  double me_best_window = -1;
  for (; it < opts.me_max_iters; ++it) {
    Vec3 sum_f{0, 0, 0}, sum_fu{0, 0, 0};
    double me = 0;
    for (size_t j = 0; j < N; ++j) {
      f[j] = cone_shrink_prox(z[j] - u[j], w[j] / rho, cones[j]);
      sum_f += f[j];
      sum_fu += f[j] + u[j];
      me += w[j] * norm(f[j]);
    }
    Vec3 shift = (sum_fu - F) / static_cast<double>(N);  // affine projection of f + u
    double prim = 0;
    for (size_t j = 0; j < N; ++j) {
      Vec3 zn = f[j] + u[j] - shift;
      u[j] += f[j] - zn;
      prim += norm2(f[j] - zn);
      z[j] = zn;
    }
    prim = std::sqrt(prim);
    if (norm(sum_f - F) <= eq_tol && prim <= eq_tol && me < me_best) {
      me_best = me;
      f_best = f;
    }
    if ((it + 1) % 100 == 0) {
      if (!f_best.empty() && me_best_window >= 0 &&
          std::abs(me_best - me_best_window) <= 1e-4 * std::max(me_best, 1e-9)) {
        ++it;
        break;
      }
      me_best_window = me_best;
    }
  }
  sol.iterations = it;
  sol.converged = !f_best.empty();
  if (!sol.converged) {
    sol.forces = f;
    sol.objective = opts.me_sentinel;
    return {opts.me_sentinel, sol};
  }
  sol.forces = std::move(f_best);
  sol.objective = me_best;
  return {me_best, sol};
}

// ME on a correspondence field: all N sampled points are force candidates.
inline std::pair<double, ForceSolve> solve_me(const CorrField& field, const Vec3& F, double mu,
                                              double c_contact, const SolverOptions& opts = {}) {
  std::vector<Vec3> normals(field.size());
  for (size_t j = 0; j < field.size(); ++j) normals[j] = field.samples[j].normal;
  return solve_me_weighted(normals, me_weights(field, c_contact), F, mu, opts);
}

// Contact normals for FE: samples with a correspondence within c_contact.
inline std::vector<Vec3> fe_contact_normals(const CorrField& field, double c_contact) {
  std::vector<Vec3> normals;
  for (size_t j = 0; j < field.size(); ++j)
    if (field.m[j] == 1 && std::abs(field.d[j]) <= c_contact)
      normals.push_back(field.samples[j].normal);
  return normals;
}

}  // namespace hoi
