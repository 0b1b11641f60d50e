// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavy artifacts (the default dataset, trained surrogates,
// the refinement evaluation set) are built once and shared.
//
// Usage: acceptance [--cli <path-to-hoi-binary>] [--work <dir>]
//                   [--pairs N] [--refine-seqs N] [--threads N]
// The size flags exist for debugging; defaults are the assessed
// configuration (D = 400 pairs, m = 5, 50 refinement sequences).

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hoi/dataset.hpp"
#include "hoi/refine.hpp"
#include "oracles.hpp"

using namespace hoi;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& detail, double secs) {
  std::printf("%s criterion %2d: %s (t=%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) g_failures++;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Args {
  std::string cli;
  std::string work = "acceptance_work";
  int pairs = 400;
  int interp = 5;
  int refine_seqs = 50;
  int threads = default_thread_count();
};

// ---- criterion 1: target formulas ----------------------------------------

void criterion_targets() {
  auto t0 = Clock::now();
  bool ok = true;
  auto tc = grasp_targets(0.015);
  ok = ok && tc.b_hard == 1 && tc.b_soft == 0.5;
  auto tm = manip_targets(0.5, 1.0);
  ok = ok && tm.s_hard == 1 && std::abs(tm.s_soft - 0.75) < 1e-12;
  int consistent = 0;
  const int sweep = 10000;
  for (int i = 0; i <= sweep; ++i) {
    auto t = grasp_targets(0.08 * i / sweep);
    if ((t.b_soft >= 0.5) == (t.b_hard == 1)) consistent++;
  }
  ok = ok && consistent == sweep + 1;
  double secs = seconds_since(t0);
  report(1, ok && secs < 1.0,
         fmt("grasp_targets(0.015)=(%d,%.3f), manip_targets(0.5,1)=(%d,%.3f), "
             "consistency %d/%d",
             tc.b_hard, tc.b_soft, tm.s_hard, tm.s_soft, consistent, sweep + 1),
         secs);
}

// ---- criterion 2: FE vs oracle --------------------------------------------

void criterion_fe_oracle() {
  auto t0 = Clock::now();
  Rng rng(2024);
  double max_err = 0;
  for (int inst = 0; inst < 500; ++inst) {
    int M = static_cast<int>(rng.below(4));
    std::vector<Vec3> normals;
    for (int j = 0; j < M; ++j) normals.push_back(rng.unit_vector());
    Vec3 F = rng.normal3(5.0);
    if (norm(F) < 1e-6) F = {0, 0, 9.81};
    auto [fe, sol] = solve_fe(normals, F, 0.8);
    double ref = oracles::fe_reference(normals, F, 0.8);
    max_err = std::max(max_err, std::abs(fe - ref));
  }
  double secs = seconds_since(t0);
  report(2, max_err <= 1e-2 && secs < 60.0,
         fmt("max |fe - fe_oracle| = %.2e over 500 instances (M <= 3)", max_err), secs);
}

// ---- criterion 3: FE analytic cases ---------------------------------------

void criterion_fe_analytic() {
  auto t0 = Clock::now();
  auto [fe1, s1] = solve_fe({{0, 0, -1}}, {0, 0, 9.81}, 0.8);
  auto [fe2, s2] = solve_fe({}, {0, 0, 9.81}, 0.8);
  auto [fe3, s3] = solve_fe({{1, 0, 0}, {-1, 0, 0}}, {0, 0, 9.81}, 0.8);
  bool range_ok = true;
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    int M = static_cast<int>(rng.below(8));
    std::vector<Vec3> normals;
    for (int j = 0; j < M; ++j) normals.push_back(rng.unit_vector());
    Vec3 F = rng.normal3(rng.uniform() < 0.1 ? 1e-7 : 6.0);
    auto [fe, sol] = solve_fe(normals, F, 0.8);
    range_ok = range_ok && fe >= 0.0 && fe <= 1.0;
  }
  bool ok = fe1 <= 1e-6 && fe2 == 1.0 && fe3 <= 1e-3 && range_ok;
  double secs = seconds_since(t0);
  report(3, ok,
         fmt("aligned fe=%.1e, empty fe=%.2f, pinch fe=%.1e, range ok=%d", fe1, fe2, fe3,
             range_ok ? 1 : 0),
         secs);
}

// ---- criterion 4: ME solver ------------------------------------------------

void criterion_me() {
  auto t0 = Clock::now();
  std::vector<Vec3> span = {{1, 0, 0}, {-1, 0, 0}, {0, 0, -1}};
  auto [me0, s0] = solve_me_weighted(span, {0, 0, 0}, {0, 0, 9.81}, 0.8);

  std::vector<Vec3> pinch = {{1, 0, 0}, {-1, 0, 0}};
  auto [me1, s1] = solve_me_weighted(pinch, {0.0, 0.002}, {0, 0, 9.81}, 0.8);
  double ref = oracles::me_two_contact_reference({1, 0, 0}, 0.0, {-1, 0, 0}, 0.002,
                                                 {0, 0, 9.81}, 0.8);
  double rel = std::abs(me1 - ref) / ref;

  std::vector<Vec3> wall(8, Vec3{0, 0, 1});
  auto [me2, s2] = solve_me_weighted(wall, std::vector<double>(8, 0.001), {0, 0, 9.81}, 0.8);

  bool ok = s0.converged && me0 <= 1e-6 && s1.converged && rel <= 0.05 && !s2.converged &&
            me2 == 1e6;
  double secs = seconds_since(t0);
  report(4, ok,
         fmt("zero-weight me=%.1e, two-contact me=%.5f vs oracle %.5f (%.1f%%), "
             "infeasible sentinel=%s",
             me0, me1, ref, rel * 100, s2.converged ? "missing" : "set"),
         secs);
}

// ---- criterion 5: PD metric -------------------------------------------------

void criterion_pd(const DatasetBuild& build) {
  auto t0 = Clock::now();
  TriMesh plate = make_box(0.3, 0.3, 0.02);
  HandPose clean = rest_pose();
  clean.trans = {-0.045, 0.0, plate.bbox_max().z + clean.shape.metacarpal_radius[2] + 0.0005};
  HandMesh clean_mesh = skin(clean);

  HandPose intruded = clean;
  intruded.trans.z -= 0.005;
  double pd_normal = penetration_depth(skin(intruded), clean_mesh, plate);

  HandPose tangential = intruded;
  tangential.trans.x += 0.02;
  double pd_tangent = penetration_depth(skin(tangential), clean_mesh, plate);

  // PD(clean, clean) = 0 on every generated grasp in the dataset.
  int nonzero = 0, checked = 0;
  std::map<std::string, TriMesh> bases;
  for (const auto& r : build.records) bases.emplace(r.object_ref, TriMesh{});
  for (auto& [name, mesh] : bases) mesh = load_mesh(name);
  for (const auto& r : build.records) {
    if (r.j != 1) continue;
    TriMesh obj = bases.at(r.object_ref).transformed(r.object_pose);
    HandMesh hm = skin(r.pose);
    if (penetration_depth(hm, hm, obj) != 0.0) nonzero++;
    checked++;
  }
  bool ok = std::abs(pd_normal - 0.005) <= 0.0002 && pd_tangent == 0.0 && nonzero == 0;
  double secs = seconds_since(t0);
  report(5, ok,
         fmt("normal-scene pd=%.4f m, tangential-scene pd=%.4f, clean self-pd zero on "
             "%d/%d grasps",
             pd_normal, pd_tangent, checked - nonzero, checked),
         secs);
}

// ---- criterion 6: gradient correctness --------------------------------------

void criterion_gradients() {
  auto t0 = Clock::now();
  Rng rng(11);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PointNet<double> net;
    int in = 3 + static_cast<int>(rng.below(9));
    net.init(in, rng.next_u64(), 8, 12, 6);
    int rows = 3 + static_cast<int>(rng.below(6));
    std::vector<double> X(rows * in);
    for (auto& x : X) x = rng.normal();
    double target = rng.uniform();
    PointNetWorkspace<double> ws;
    PointNetGrads<double> grads;
    grads.zero(net);
    std::vector<double> dX(X.size());
    double p = pointnet_forward(net, X.data(), rows, ws);
    pointnet_backward(net, X.data(), rows, ws, p - target, grads, dX.data());
    const double h = 1e-5;
    auto rel = [](double fd, double ad) {
      return std::abs(fd - ad) / std::max(1e-6, std::abs(fd) + std::abs(ad));
    };
    auto blocks = net.param_blocks();
    auto gblocks = grads.g.param_blocks();
    for (size_t b = 0; b < blocks.size(); ++b) {
      auto& P = *blocks[b];
      for (size_t i = 0; i < P.size(); ++i) {
        double orig = P[i];
        P[i] = orig + h;
        double lp = bce(pointnet_forward(net, X.data(), rows, ws), target);
        P[i] = orig - h;
        double lm = bce(pointnet_forward(net, X.data(), rows, ws), target);
        P[i] = orig;
        worst = std::max(worst, rel((lp - lm) / (2 * h), (*gblocks[b])[i]));
      }
    }
    for (size_t i = 0; i < X.size(); ++i) {
      double orig = X[i];
      X[i] = orig + h;
      double lp = bce(pointnet_forward(net, X.data(), rows, ws), target);
      X[i] = orig - h;
      double lm = bce(pointnet_forward(net, X.data(), rows, ws), target);
      X[i] = orig;
      worst = std::max(worst, rel((lp - lm) / (2 * h), dX[i]));
    }
  }
  double secs = seconds_since(t0);
  report(6, worst < 1e-4 && secs < 30.0,
         fmt("worst relative gradient error %.2e over 100 random nets", worst), secs);
}

// ---- criteria 7+8: surrogate quality and smoothness --------------------------

struct TrainedNets {
  SurrogateNet grasp, manip;
  double f_grasp = 0, f_manip = 0;
  double f_grasp_hard = 0, f_manip_hard = 0;
};

TrainedNets criterion_training(const SurrogateData& data, const Args& args) {
  auto t0 = Clock::now();
  TrainedNets out;

  TrainConfig cfg;
  cfg.seed = 17;
  auto g = train_surrogate(SurrogateKind::grasp, kGraspFeatureDim, data.grasp_train,
                           data.grasp_val, data.grasp_test, cfg);
  auto m = train_surrogate(SurrogateKind::manip, kManipFeatureDim, data.manip_train,
                           data.manip_val, data.manip_test, cfg);
  TrainConfig hard_only = cfg;
  hard_only.alpha_soft = 0.0;
  auto gh = train_surrogate(SurrogateKind::grasp, kGraspFeatureDim, data.grasp_train,
                            data.grasp_val, data.grasp_test, hard_only);
  auto mh = train_surrogate(SurrogateKind::manip, kManipFeatureDim, data.manip_train,
                            data.manip_val, data.manip_test, hard_only);
  out.grasp = g.net;
  out.manip = m.net;
  out.f_grasp = g.holdout_fscore;
  out.f_manip = m.holdout_fscore;
  out.f_grasp_hard = gh.holdout_fscore;
  out.f_manip_hard = mh.holdout_fscore;

  double secs = seconds_since(t0);
  bool ok = out.f_grasp >= 0.8 && out.f_manip >= 0.8 && secs < 900.0;
  report(7, ok,
         fmt("holdout F: grasp %.3f (hard-only %.3f), manip %.3f (hard-only %.3f)",
             out.f_grasp, out.f_grasp_hard, out.f_manip, out.f_manip_hard),
         secs);
  return out;
}

void criterion_smoothness(const SurrogateData& data, const TrainedNets& nets) {
  auto t0 = Clock::now();
  // Spearman correlation between the trained grasp score and PD along each
  // held-out interpolation path; paths with constant PD carry no rank signal
  // and are skipped.
  std::map<int, std::vector<std::pair<double, double>>> paths;  // pair -> (score, pd)
  PointNetWorkspace<float> ws;
  for (size_t i = 0; i < data.grasp_test.size(); ++i) {
    const auto& e = data.grasp_test[i];
    double score = pointnet_forward(nets.grasp.net, e.X.data(),
                                    static_cast<int>(e.X.size()) / kGraspFeatureDim, ws);
    paths[data.grasp_test_meta[i].pair].push_back({score, data.grasp_test_meta[i].pd});
  }
  double sum = 0;
  int used = 0;
  for (const auto& [pair, sp] : paths) {
    std::vector<double> scores, pds;
    for (const auto& [s, p] : sp) {
      scores.push_back(s);
      pds.push_back(p);
    }
    double lo = *std::min_element(pds.begin(), pds.end());
    double hi = *std::max_element(pds.begin(), pds.end());
    if (hi - lo < 1e-9) continue;
    sum += oracles::spearman(scores, pds);
    used++;
  }
  double mean = used ? sum / used : 0.0;
  double secs = seconds_since(t0);
  report(8, mean >= 0.7, fmt("mean Spearman(score, PD) = %.3f over %d held-out paths", mean, used),
         secs);
}

// ---- criteria 9+10: refinement and ablation ----------------------------------

struct RefineEval {
  double plausible_noisy = 0, plausible_refined = 0;
  double mpjpe_noisy = 0, mpjpe_refined = 0;
};

struct RefineSet {
  std::vector<Sequence> clean, noisy;
  std::vector<TriMesh> objects;
};

RefineSet build_refine_set(const Args& args, const GlobalConfig& global) {
  RefineSet set;
  const char* objs[] = {"sphere", "box", "cylinder", "torus", "thin_plate"};
  const char* kinds[] = {"hold", "lift", "swing"};
  TrajParams gentle;
  gentle.lift_height_min = 0.02;
  gentle.lift_height_max = 0.04;
  gentle.swing_amp_min = 0.01;
  gentle.swing_amp_max = 0.02;
  int made = 0;
  for (int s = 0; made < args.refine_seqs && s < args.refine_seqs * 4; ++s) {
    try {
      Sequence clean = make_clean_sequence(objs[s % 5], kinds[s % 3], 5, 1.0 / 30.0,
                                           split_seed(4242, s), GraspGenOptions{}, gentle);
      NoiseConfig nc;  // sigma_trans 0.01, sigma_pose 0.3, sigma_root 0.05
      nc.seed = split_seed(777, s);
      set.noisy.push_back(perturb_sequence(clean, nc));
      set.clean.push_back(std::move(clean));
      set.objects.push_back(load_mesh(objs[s % 5]));
      made++;
    } catch (const std::exception&) {
      // grasp search failed for this seed; try the next one
    }
  }
  return set;
}

RefineEval evaluate_refinement(const RefineSet& set, const std::vector<Sequence>& refined,
                               const GlobalConfig& global, int threads) {
  RefineEval ev;
  EvalOptions opts;
  opts.thresholds = global.thresholds();
  opts.field_samples = global.field_samples;
  opts.compute_iv = false;
  opts.compute_me = false;
  opts.solver = global.solver;
  std::vector<FrameMetrics> noisy_frames, refined_frames;
  for (size_t s = 0; s < set.clean.size(); ++s) {
    opts.sample_seed = split_seed(31337, s);
    int T = static_cast<int>(set.clean[s].size());
    std::vector<FrameMetrics> nf(T), rf(T);
    parallel_for(0, T, threads, [&](int i) {
      nf[i] = evaluate_frame(set.noisy[s].hand_poses[i], set.clean[s].hand_poses[i],
                             set.objects[s], set.noisy[s].traj, i, opts);
      rf[i] = evaluate_frame(refined[s].hand_poses[i], set.clean[s].hand_poses[i],
                             set.objects[s], set.noisy[s].traj, i, opts);
    });
    noisy_frames.insert(noisy_frames.end(), nf.begin(), nf.end());
    refined_frames.insert(refined_frames.end(), rf.begin(), rf.end());
  }
  ev.plausible_noisy = plausible_rate(noisy_frames);
  ev.plausible_refined = plausible_rate(refined_frames);
  for (size_t i = 0; i < noisy_frames.size(); ++i) {
    ev.mpjpe_noisy += noisy_frames[i].mpjpe;
    ev.mpjpe_refined += refined_frames[i].mpjpe;
  }
  ev.mpjpe_noisy /= noisy_frames.size();
  ev.mpjpe_refined /= refined_frames.size();
  return ev;
}

std::vector<Sequence> refine_all(const RefineSet& set, const TrainedNets& nets,
                                 const RefineConfig& cfg, const GlobalConfig& global,
                                 int threads) {
  std::vector<Sequence> out;
  for (size_t s = 0; s < set.noisy.size(); ++s) {
    RefineConfig c = cfg;
    c.sample_seed = split_seed(555, s);
    auto res = refine_sequence(set.noisy[s], set.objects[s], nets.grasp, nets.manip, c, global,
                               threads);
    Sequence seq = set.noisy[s];
    seq.hand_poses = res.poses;
    out.push_back(std::move(seq));
  }
  return out;
}

void criteria_refinement(const RefineSet& set, const TrainedNets& nets,
                         const GlobalConfig& global, const Args& args) {
  auto t0 = Clock::now();
  RefineConfig cfg;  // defaults: alpha_grasp = alpha_manip = 1, reg 10, smooth 1
  auto refined = refine_all(set, nets, cfg, global, args.threads);
  RefineEval ev = evaluate_refinement(set, refined, global, args.threads);
  double secs = seconds_since(t0);
  double gain = ev.plausible_refined - ev.plausible_noisy;
  bool ok = gain >= 0.2 && ev.mpjpe_refined <= ev.mpjpe_noisy + 1.0 && secs < 1200.0;
  report(9, ok,
         fmt("plausible rate %.3f -> %.3f (gain %.3f), mean MPJPE %.2f -> %.2f mm over %d seqs",
             ev.plausible_noisy, ev.plausible_refined, gain, ev.mpjpe_noisy, ev.mpjpe_refined,
             static_cast<int>(set.clean.size())),
         secs);

  // criterion 10: single-loss ablation arms on the same set
  auto t1 = Clock::now();
  RefineConfig grasp_only = cfg;
  grasp_only.alpha_manip = 0;
  RefineConfig manip_only = cfg;
  manip_only.alpha_grasp = 0;
  auto refined_g = refine_all(set, nets, grasp_only, global, args.threads);
  auto refined_m = refine_all(set, nets, manip_only, global, args.threads);
  RefineEval ev_g = evaluate_refinement(set, refined_g, global, args.threads);
  RefineEval ev_m = evaluate_refinement(set, refined_m, global, args.threads);
  bool ok10 = ev.plausible_refined >= ev_g.plausible_refined - 0.02 &&
              ev.plausible_refined >= ev_m.plausible_refined - 0.02;
  report(10, ok10,
         fmt("plausible rate: combined %.3f, grasp-only %.3f, manip-only %.3f",
             ev.plausible_refined, ev_g.plausible_refined, ev_m.plausible_refined),
         seconds_since(t1));
}

// ---- criterion 11: CLI determinism --------------------------------------------

void criterion_determinism(const Args& args) {
  auto t0 = Clock::now();
  if (args.cli.empty() || !fs::exists(args.cli)) {
    report(11, false, "hoi CLI binary not found (pass --cli)", seconds_since(t0));
    return;
  }
  fs::path wd = fs::path(args.work) / "determinism";
  fs::remove_all(wd);
  fs::create_directories(wd);
  fs::path cfg = wd / "cfg.json";
  {
    std::ofstream f(cfg);
    f << "{\"field_samples\": 256, \"grasp_cloud_points\": 64}\n";
  }
  auto run = [&](const std::string& cmd) {
    std::string full = args.cli + " " + cmd + " > /dev/null 2>&1";
    return std::system(full.c_str()) == 0;
  };
  bool ok = true;
  std::string base = "--config " + cfg.string() + " --seed 9 ";
  ok = ok && run(base + "--threads 1 gen --out " + (wd / "a").string() + " --pairs 6 --interp 3");
  ok = ok && run(base + "--threads 1 gen --out " + (wd / "b").string() + " --pairs 6 --interp 3");
  ok = ok && run(base + "--threads 8 gen --out " + (wd / "c").string() + " --pairs 6 --interp 3");
  bool gen_ok = ok && slurp(wd / "a" / "labels.jsonl") == slurp(wd / "b" / "labels.jsonl") &&
                slurp(wd / "a" / "labels.jsonl") == slurp(wd / "c" / "labels.jsonl");

  ok = ok && run(base + "train-surrogate --kind manip --data " + (wd / "a").string() +
                 " --out " + (wd / "m1.bin").string() + " --epochs 2 --patience 0");
  ok = ok && run(base + "train-surrogate --kind manip --data " + (wd / "a").string() +
                 " --out " + (wd / "m2.bin").string() + " --epochs 2 --patience 0");
  ok = ok && run(base + "train-surrogate --kind grasp --data " + (wd / "a").string() +
                 " --out " + (wd / "g1.bin").string() + " --epochs 2 --patience 0");
  bool train_ok = ok && slurp(wd / "m1.bin") == slurp(wd / "m2.bin");

  // a small noisy sequence for refine
  fs::path seq_path = wd / "noisy.seq.jsonl";
  bool refine_ok = false;
  if (ok) {
    Sequence clean = make_clean_sequence("sphere", "hold", 4, 1.0 / 30.0, 12);
    NoiseConfig nc;
    nc.seed = 5;
    Sequence noisy = perturb_sequence(clean, nc);
    save_sequence(noisy, seq_path.string());
    std::string refine_base = base + "refine --in " + seq_path.string() +
                              " --object sphere --grasp-net " + (wd / "g1.bin").string() +
                              " --manip-net " + (wd / "m1.bin").string() + " --steps 3 --out ";
    ok = ok && run(refine_base + (wd / "r1.jsonl").string());
    ok = ok && run(refine_base + (wd / "r2.jsonl").string());
    ok = ok && run("--config " + cfg.string() + " --seed 9 --threads 8 refine --in " +
                   seq_path.string() + " --object sphere --grasp-net " + (wd / "g1.bin").string() +
                   " --manip-net " + (wd / "m1.bin").string() + " --steps 3 --out " +
                   (wd / "r3.jsonl").string());
    refine_ok = ok && slurp(wd / "r1.jsonl") == slurp(wd / "r2.jsonl") &&
                slurp(wd / "r1.jsonl") == slurp(wd / "r3.jsonl");
  }
  report(11, gen_ok && train_ok && refine_ok,
         fmt("byte-identical outputs: gen=%d train=%d refine=%d (runs x2 and threads 1 vs 8)",
             gen_ok ? 1 : 0, train_ok ? 1 : 0, refine_ok ? 1 : 0),
         seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  Args args;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    auto next = [&]() { return std::string(i + 1 < argc ? argv[++i] : ""); };
    if (a == "--cli") args.cli = next();
    else if (a == "--work") args.work = next();
    else if (a == "--pairs") args.pairs = std::atoi(next().c_str());
    else if (a == "--refine-seqs") args.refine_seqs = std::atoi(next().c_str());
    else if (a == "--threads") args.threads = std::atoi(next().c_str());
  }
  fs::create_directories(args.work);
  std::printf("acceptance: D=%d pairs, m=%d, %d refinement sequences, %d threads\n", args.pairs,
              args.interp, args.refine_seqs, args.threads);

  criterion_targets();
  criterion_fe_oracle();
  criterion_fe_analytic();
  criterion_me();

  // Shared heavy artifacts: the default dataset and its features.
  auto t0 = Clock::now();
  GenConfig gen_cfg;
  gen_cfg.pairs = args.pairs;
  gen_cfg.interp_m = args.interp;
  gen_cfg.seed = 1;
  gen_cfg.noise.seed = 1;
  GlobalConfig global;
  auto build = build_dataset(gen_cfg, global, args.threads);
  std::printf("  [setup] dataset: %zu frames from %d/%d pairs (%.1fs)\n", build.records.size(),
              build.pairs_generated, build.pairs_requested, seconds_since(t0));
  int b_pos = 0, s_pos = 0;
  for (const auto& r : build.records) {
    b_pos += r.grasp.b_hard;
    s_pos += r.manip.s_hard;
  }
  std::printf("  [setup] class balance: b_hard %d/%zu, s_hard %d/%zu\n", b_pos,
              build.records.size(), s_pos, build.records.size());

  criterion_pd(build);
  criterion_gradients();

  t0 = Clock::now();
  auto data = materialize_surrogate_data(build.records, global, args.threads);
  std::printf("  [setup] features materialized (%.1fs)\n", seconds_since(t0));

  TrainedNets nets = criterion_training(data, args);
  criterion_smoothness(data, nets);

  t0 = Clock::now();
  RefineSet set = build_refine_set(args, global);
  std::printf("  [setup] refinement set: %zu sequences (%.1fs)\n", set.clean.size(),
              seconds_since(t0));
  criteria_refinement(set, nets, global, args);

  criterion_determinism(args);

  std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
