#pragma once

// Global configuration: metric thresholds and solver/sampling knobs shared
// across subcommands. Loadable from JSON; the effective values are echoed
// verbatim into every output manifest.

#include <string>

#include <json.hpp>

#include "hoi/dynamics.hpp"
#include "hoi/math.hpp"
#include "hoi/metrics.hpp"

namespace hoi {

struct GlobalConfig {
  double c_contact = 0.002;  // m
  double c_tangent = 0.01;   // m
  double c_pd = 0.015;       // m
  double c_fe = 0.1;
  double mu = 0.8;
  double mass = 1.0;               // kg
  Vec3 gravity = {0, 0, -9.81};    // m/s^2
  int field_samples = 1024;
  int grasp_cloud_points = 256;
  double ray_cutoff = 0.2;         // m
  double voxel_size = 0.002;       // m
  SolverOptions solver;

  MetricThresholds thresholds() const {
    return MetricThresholds{c_contact, c_tangent, c_pd, c_fe, mu};
  }

  void validate() const {
    if (c_contact <= 0 || c_tangent <= 0 || c_pd <= 0 || c_fe <= 0 || mu <= 0 || mass <= 0 ||
        field_samples <= 0 || grasp_cloud_points <= 0 || ray_cutoff <= 0 || voxel_size <= 0)
      throw std::invalid_argument("config thresholds must be positive");
  }
};

inline nlohmann::json to_json(const GlobalConfig& c) {
  nlohmann::json j;
  j["c_contact"] = c.c_contact;
  j["c_tangent"] = c.c_tangent;
  j["c_pd"] = c.c_pd;
  j["c_fe"] = c.c_fe;
  j["mu"] = c.mu;
  j["mass"] = c.mass;
  j["gravity"] = {c.gravity.x, c.gravity.y, c.gravity.z};
  j["field_samples"] = c.field_samples;
  j["grasp_cloud_points"] = c.grasp_cloud_points;
  j["ray_cutoff"] = c.ray_cutoff;
  j["voxel_size"] = c.voxel_size;
  j["solver"] = {{"fe_max_iters", c.solver.fe_max_iters},
                 {"fe_tol", c.solver.fe_tol},
                 {"me_max_iters", c.solver.me_max_iters},
                 {"me_eq_tol", c.solver.me_eq_tol},
                 {"me_sentinel", c.solver.me_sentinel}};
  return j;
}

inline GlobalConfig config_from_json(const nlohmann::json& j) {
  GlobalConfig c;
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("c_contact", c.c_contact);
  get("c_tangent", c.c_tangent);
  get("c_pd", c.c_pd);
  get("c_fe", c.c_fe);
  get("mu", c.mu);
  get("mass", c.mass);
  if (j.contains("gravity")) {
    auto g = j.at("gravity");
    c.gravity = {g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()};
  }
  get("field_samples", c.field_samples);
  get("grasp_cloud_points", c.grasp_cloud_points);
  get("ray_cutoff", c.ray_cutoff);
  get("voxel_size", c.voxel_size);
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("fe_max_iters")) c.solver.fe_max_iters = s.at("fe_max_iters").get<int>();
    if (s.contains("fe_tol")) c.solver.fe_tol = s.at("fe_tol").get<double>();
    if (s.contains("me_max_iters")) c.solver.me_max_iters = s.at("me_max_iters").get<int>();
    if (s.contains("me_eq_tol")) c.solver.me_eq_tol = s.at("me_eq_tol").get<double>();
    if (s.contains("me_sentinel")) c.solver.me_sentinel = s.at("me_sentinel").get<double>();
  }
  c.validate();
  return c;
}

}  // namespace hoi
