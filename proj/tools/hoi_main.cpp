// hoi: command-line front end. Subcommands: gen, field, eval,
// train-surrogate, refine, report.
//
// Exit codes: 0 success, 2 missing input file, 3 file schema/parse error,
// 4 invalid arguments or configuration, 5 runtime failure. CLI11 reports its
// own nonzero code for unknown flags.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hoi/config.hpp"
#include "hoi/dataset.hpp"
#include "hoi/io.hpp"
#include "hoi/metrics.hpp"
#include "hoi/parallel.hpp"
#include "hoi/refine.hpp"
#include "hoi/surrogate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct MissingFile : std::runtime_error {
  explicit MissingFile(const std::string& path) : std::runtime_error("missing input file: " + path) {}
};

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw MissingFile(path);
}

hoi::GlobalConfig load_global_config(const std::string& path) {
  if (path.empty()) return {};
  require_file(path);
  std::ifstream f(path);
  json j = json::parse(f);
  return hoi::config_from_json(j);
}

hoi::TriMesh resolve_object(const std::string& flag_value, const hoi::Sequence& seq) {
  std::string ref = flag_value.empty() ? seq.object_ref : flag_value;
  if (ref.size() > 4 && ref.substr(ref.size() - 4) == ".obj") require_file(ref);
  return hoi::load_mesh(ref);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct SequenceStats {
  double mpjpe = 0, mpvpe = 0, contact_iou = 0, iv = 0, pd_cm = 0, plausible = 0;
};

std::vector<hoi::FrameMetrics> evaluate_sequence(const hoi::Sequence& in, const hoi::Sequence& ref,
                                                 const hoi::TriMesh& object,
                                                 const hoi::GlobalConfig& global, uint64_t seed,
                                                 bool with_iv, bool with_me, int threads) {
  if (in.size() != ref.size()) throw std::invalid_argument("sequence length mismatch");
  hoi::EvalOptions opts;
  opts.thresholds = global.thresholds();
  opts.field_samples = global.field_samples;
  opts.voxel_size = global.voxel_size;
  opts.compute_iv = with_iv;
  opts.compute_me = with_me;
  opts.solver = global.solver;
  opts.sample_seed = seed;
  std::vector<hoi::FrameMetrics> out(in.size());
  hoi::parallel_for(0, static_cast<int>(in.size()), threads, [&](int i) {
    out[i] =
        hoi::evaluate_frame(in.hand_poses[i], ref.hand_poses[i], object, in.traj, i, opts);
  });
  return out;
}

SequenceStats summarize(const std::vector<hoi::FrameMetrics>& frames) {
  SequenceStats s;
  for (const auto& f : frames) {
    s.mpjpe += f.mpjpe;
    s.mpvpe += f.mpvpe;
    s.contact_iou += f.contact_iou;
    s.iv += f.iv;
    s.pd_cm += f.pd * 100.0;
  }
  double n = static_cast<double>(frames.size());
  s.mpjpe /= n;
  s.mpvpe /= n;
  s.contact_iou /= n;
  s.iv /= n;
  s.pd_cm /= n;
  s.plausible = hoi::plausible_rate(frames);
  return s;
}

void write_frames_csv(const std::string& path, const std::vector<hoi::FrameMetrics>& frames,
                      const std::string& tag) {
  std::ofstream f(path, std::ios::app);
  if (f.tellp() == 0)
    f << "set,frame,pd_m,fe,me,iv_cm3,contact_iou,mpjpe_mm,mpvpe_mm,plausible\n";
  for (size_t i = 0; i < frames.size(); ++i) {
    const auto& m = frames[i];
    f << tag << "," << i << "," << fmt(m.pd) << "," << fmt(m.fe) << "," << fmt(m.me) << ","
      << fmt(m.iv) << "," << fmt(m.contact_iou) << "," << fmt(m.mpjpe) << "," << fmt(m.mpvpe)
      << "," << (m.plausible ? 1 : 0) << "\n";
  }
}

json stats_json(const SequenceStats& s) {
  return json{{"mpjpe_mm", s.mpjpe},     {"mpvpe_mm", s.mpvpe}, {"contact_iou", s.contact_iou},
              {"iv_cm3", s.iv},          {"pd_cm", s.pd_cm},    {"plausible_rate", s.plausible}};
}

int run(int argc, char** argv) {
  CLI::App app{"physical-plausibility metrics and refinement for hand-object interaction "
               "sequences"};
  app.require_subcommand(1);

  std::string config_path, out_path, in_path, ref_path, object_ref;
  uint64_t seed = 0;
  int threads = hoi::default_thread_count();
  app.add_option("--config", config_path, "global config JSON")->capture_default_str();
  app.add_option("--seed", seed, "master seed")->capture_default_str();
  app.add_option("--threads", threads, "worker thread count")->capture_default_str();

  // gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a labeled synthetic dataset");
  hoi::GenConfig gen_cfg;
  gen->add_option("--out", out_path, "output directory")->required();
  gen->add_option("--pairs", gen_cfg.pairs, "perturbed-clean pair count")->capture_default_str();
  gen->add_option("--interp", gen_cfg.interp_m, "interpolation steps per pair")
      ->capture_default_str();
  gen->add_option("--sigma-trans", gen_cfg.noise.sigma_trans, "translation noise (m)")
      ->capture_default_str();
  gen->add_option("--sigma-pose", gen_cfg.noise.sigma_pose, "joint noise (rad)")
      ->capture_default_str();
  gen->add_option("--sigma-root", gen_cfg.noise.sigma_root, "root orientation noise (rad)")
      ->capture_default_str();
  gen->add_option("--objects", gen_cfg.objects, "object primitives to cycle through");
  gen->add_option("--traj-kinds", gen_cfg.traj_kinds, "trajectory kinds to cycle through");
  gen->add_option("--traj-length", gen_cfg.traj_length, "trajectory frame count")
      ->capture_default_str();
  gen->add_option("--dt", gen_cfg.dt, "seconds per frame")->capture_default_str();

  // field --------------------------------------------------------------
  auto* fieldc = app.add_subcommand("field", "compute correspondence fields for a sequence");
  fieldc->add_option("--in", in_path, "input sequence (.seq.jsonl)")->required();
  fieldc->add_option("--object", object_ref, "object primitive name or OBJ path");
  fieldc->add_option("--out", out_path, "output fields JSONL")->required();

  // eval ---------------------------------------------------------------
  auto* evalc = app.add_subcommand("eval", "evaluate a sequence against a reference");
  bool no_iv = false, no_me = false;
  evalc->add_option("--in", in_path, "sequence to evaluate")->required();
  evalc->add_option("--ref", ref_path, "ground-truth sequence")->required();
  evalc->add_option("--object", object_ref, "object primitive name or OBJ path");
  evalc->add_option("--out", out_path, "output directory")->required();
  evalc->add_flag("--no-iv", no_iv, "skip intersection volume");
  evalc->add_flag("--no-me", no_me, "skip manipulation expense");

  // train-surrogate ------------------------------------------------------
  auto* trainc = app.add_subcommand("train-surrogate", "train a plausibility surrogate");
  std::string kind_str = "grasp", data_dir;
  hoi::TrainConfig train_cfg;
  trainc->add_option("--kind", kind_str, "grasp | manip")
      ->check(CLI::IsMember({"grasp", "manip"}))
      ->required();
  trainc->add_option("--data", data_dir, "dataset directory (labels.jsonl)")->required();
  trainc->add_option("--out", out_path, "output net path (.bin)")->required();
  trainc->add_option("--epochs", train_cfg.epochs, "epoch cap")->capture_default_str();
  trainc->add_option("--batch", train_cfg.batch, "minibatch size")->capture_default_str();
  trainc->add_option("--lr", train_cfg.lr, "learning rate")->capture_default_str();
  trainc->add_option("--alpha-hard", train_cfg.alpha_hard, "hard-target loss weight")
      ->capture_default_str();
  trainc->add_option("--alpha-soft", train_cfg.alpha_soft, "soft-target loss weight")
      ->capture_default_str();
  trainc->add_option("--patience", train_cfg.early_stop_patience,
                     "early-stop patience in epochs (0 disables)")
      ->capture_default_str();

  // refine ---------------------------------------------------------------
  auto* refinec = app.add_subcommand("refine", "refine a noisy sequence");
  std::string grasp_net_path, manip_net_path;
  hoi::RefineConfig refine_cfg;
  refinec->add_option("--in", in_path, "noisy sequence")->required();
  refinec->add_option("--object", object_ref, "object primitive name or OBJ path");
  refinec->add_option("--grasp-net", grasp_net_path, "trained grasp surrogate")->required();
  refinec->add_option("--manip-net", manip_net_path, "trained manip surrogate")->required();
  refinec->add_option("--out", out_path, "refined sequence path")->required();
  refinec->add_option("--steps", refine_cfg.steps, "gradient step cap")->capture_default_str();
  refinec->add_option("--step-size", refine_cfg.step_size, "initial step size")
      ->capture_default_str();
  refinec->add_option("--alpha-grasp", refine_cfg.alpha_grasp, "grasp loss weight")
      ->capture_default_str();
  refinec->add_option("--alpha-manip", refine_cfg.alpha_manip, "manip loss weight")
      ->capture_default_str();
  refinec->add_option("--alpha-reg", refine_cfg.alpha_reg, "anchor weight")
      ->capture_default_str();
  refinec->add_option("--alpha-smooth", refine_cfg.alpha_smooth, "smoothness weight")
      ->capture_default_str();

  // report ---------------------------------------------------------------
  auto* reportc = app.add_subcommand("report", "before/after metric table");
  std::string noisy_path, refined_path;
  reportc->add_option("--ref", ref_path, "ground-truth sequence")->required();
  reportc->add_option("--noisy", noisy_path, "sequence before refinement")->required();
  reportc->add_option("--refined", refined_path, "sequence after refinement")->required();
  reportc->add_option("--object", object_ref, "object primitive name or OBJ path");
  reportc->add_option("--out", out_path, "output directory")->required();
  reportc->add_flag("--no-iv", no_iv, "skip intersection volume");
  reportc->add_flag("--no-me", no_me, "skip manipulation expense");

  CLI11_PARSE(app, argc, argv);
  hoi::GlobalConfig global = load_global_config(config_path);

  if (*gen) {
    gen_cfg.seed = seed;
    gen_cfg.noise.seed = seed;
    auto build = hoi::build_dataset(gen_cfg, global, threads);
    fs::create_directories(out_path);
    hoi::save_labels(build, global, out_path);
    hoi::save_manifest(build, gen_cfg, global, out_path);
    std::cout << "generated " << build.records.size() << " labeled frames from "
              << build.pairs_generated << "/" << build.pairs_requested << " pairs ("
              << build.failed_pairs.size() << " failures) -> " << out_path << "\n";
    return 0;
  }

  if (*fieldc) {
    require_file(in_path);
    hoi::Sequence seq = hoi::load_sequence(in_path);
    hoi::TriMesh base = resolve_object(object_ref, seq);
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    std::vector<std::string> lines(seq.size());
    hoi::parallel_for(0, static_cast<int>(seq.size()), threads, [&](int i) {
      hoi::TriMesh object = base.transformed(seq.traj.poses[i]);
      auto samples = hoi::sample_surface(object, global.field_samples,
                                         hoi::split_seed(seed, i));
      hoi::HandMesh hand = hoi::skin(seq.hand_poses[i]);
      hoi::CorrField field = hoi::compute_field(hand, object, samples, global.ray_cutoff);
      std::string line;
      hoi::io_detail::JsonlWriter w(line);
      w.raw("{\"frame\":" + std::to_string(i) + ",\"m\":[");
      for (size_t j = 0; j < field.size(); ++j) {
        if (j) w.raw(",");
        w.raw(std::to_string(field.m[j]));
      }
      w.raw("],\"d\":[");
      for (size_t j = 0; j < field.size(); ++j) {
        if (j) w.raw(",");
        w.num(field.d[j]);
      }
      w.raw("],\"p\":[");
      for (size_t j = 0; j < field.size(); ++j) {
        if (j) w.raw(",");
        w.vec(field.p[j]);
      }
      w.raw("]}");
      lines[i] = std::move(line);
    });
    std::string header = "{\"type\":\"header\",\"version\":1,\"frames\":" +
                         std::to_string(seq.size()) +
                         ",\"samples\":" + std::to_string(global.field_samples) +
                         ",\"seed\":" + std::to_string(seed) + "}";
    f << header << "\n";
    for (const auto& l : lines) f << l << "\n";
    std::cout << "wrote fields for " << seq.size() << " frames -> " << out_path << "\n";
    return 0;
  }

  if (*evalc) {
    require_file(in_path);
    require_file(ref_path);
    hoi::Sequence in = hoi::load_sequence(in_path);
    hoi::Sequence ref = hoi::load_sequence(ref_path);
    hoi::TriMesh object = resolve_object(object_ref, ref);
    auto frames = evaluate_sequence(in, ref, object, global, seed, !no_iv, !no_me, threads);
    SequenceStats s = summarize(frames);
    fs::create_directories(out_path);
    fs::remove(fs::path(out_path) / "frames.csv");
    write_frames_csv((fs::path(out_path) / "frames.csv").string(), frames, "eval");
    json summary;
    summary["command"] = "eval";
    summary["config"] = hoi::to_json(global);
    summary["seed"] = seed;
    summary["metrics"] = stats_json(s);
    std::ofstream(fs::path(out_path) / "summary.json") << summary.dump(2) << "\n";
    std::printf("%-14s %10s\n", "metric", "value");
    std::printf("%-14s %10.2f\n", "MPJPE (mm)", s.mpjpe);
    std::printf("%-14s %10.2f\n", "MPVPE (mm)", s.mpvpe);
    std::printf("%-14s %10.2f\n", "contact IoU", s.contact_iou);
    std::printf("%-14s %10.2f\n", "IV (cm3)", s.iv);
    std::printf("%-14s %10.2f\n", "PD (cm)", s.pd_cm);
    std::printf("%-14s %10.2f\n", "plausible rate", s.plausible);
    return 0;
  }

  if (*trainc) {
    std::string labels_path = (fs::path(data_dir) / "labels.jsonl").string();
    require_file(labels_path);
    auto labels = hoi::load_labels(labels_path);
    auto data = hoi::materialize_surrogate_data(labels.records, global, threads);
    train_cfg.seed = seed;
    hoi::SurrogateKind kind =
        kind_str == "grasp" ? hoi::SurrogateKind::grasp : hoi::SurrogateKind::manip;
    auto& train = kind == hoi::SurrogateKind::grasp ? data.grasp_train : data.manip_train;
    auto& val = kind == hoi::SurrogateKind::grasp ? data.grasp_val : data.manip_val;
    auto& test = kind == hoi::SurrogateKind::grasp ? data.grasp_test : data.manip_test;
    int in_dim = kind == hoi::SurrogateKind::grasp ? hoi::kGraspFeatureDim
                                                   : hoi::kManipFeatureDim;
    auto result = hoi::train_surrogate(kind, in_dim, train, val, test, train_cfg);
    hoi::save_surrogate(result.net, out_path);
    json manifest;
    manifest["command"] = "train-surrogate";
    manifest["kind"] = kind_str;
    manifest["seed"] = seed;
    manifest["config"] = hoi::to_json(global);
    manifest["train"] = {{"epochs", train_cfg.epochs},
                         {"epochs_run", result.epochs_run},
                         {"batch", train_cfg.batch},
                         {"lr", train_cfg.lr},
                         {"alpha_hard", train_cfg.alpha_hard},
                         {"alpha_soft", train_cfg.alpha_soft},
                         {"patience", train_cfg.early_stop_patience}};
    manifest["holdout_fscore"] = result.holdout_fscore;
    manifest["examples"] = {{"train", train.size()}, {"val", val.size()}, {"test", test.size()}};
    std::ofstream(out_path + ".train.json") << manifest.dump(2) << "\n";
    std::cout << "trained " << kind_str << " surrogate: holdout F-score "
              << fmt(result.holdout_fscore) << " after " << result.epochs_run << " epochs -> "
              << out_path << "\n";
    return 0;
  }

  if (*refinec) {
    require_file(in_path);
    require_file(grasp_net_path);
    require_file(manip_net_path);
    hoi::Sequence noisy = hoi::load_sequence(in_path);
    hoi::TriMesh object = resolve_object(object_ref, noisy);
    hoi::SurrogateNet gnet = hoi::load_surrogate(grasp_net_path);
    hoi::SurrogateNet mnet = hoi::load_surrogate(manip_net_path);
    refine_cfg.sample_seed = seed;
    auto result = hoi::refine_sequence(noisy, object, gnet, mnet, refine_cfg, global, threads);
    hoi::Sequence refined = noisy;
    refined.hand_poses = result.poses;
    refined.generator = "refine";
    refined.seed = seed;
    hoi::save_sequence(refined, out_path);
    if (!result.converged)
      std::cerr << "warning: refinement hit the step cap before converging\n";
    std::cout << "refined " << noisy.size() << " frames in " << result.steps_taken
              << " steps (objective " << fmt(result.objective_initial) << " -> "
              << fmt(result.objective_final) << ") -> " << out_path << "\n";
    return 0;
  }

  if (*reportc) {
    require_file(ref_path);
    require_file(noisy_path);
    require_file(refined_path);
    hoi::Sequence ref = hoi::load_sequence(ref_path);
    hoi::Sequence noisy = hoi::load_sequence(noisy_path);
    hoi::Sequence refined = hoi::load_sequence(refined_path);
    hoi::TriMesh object = resolve_object(object_ref, ref);
    auto before = evaluate_sequence(noisy, ref, object, global, seed, !no_iv, !no_me, threads);
    auto after = evaluate_sequence(refined, ref, object, global, seed, !no_iv, !no_me, threads);
    SequenceStats sb = summarize(before), sa = summarize(after);
    fs::create_directories(out_path);
    fs::remove(fs::path(out_path) / "frames.csv");
    write_frames_csv((fs::path(out_path) / "frames.csv").string(), before, "noisy");
    write_frames_csv((fs::path(out_path) / "frames.csv").string(), after, "refined");
    json summary;
    summary["command"] = "report";
    summary["config"] = hoi::to_json(global);
    summary["seed"] = seed;
    summary["noisy"] = stats_json(sb);
    summary["refined"] = stats_json(sa);
    std::ofstream(fs::path(out_path) / "summary.json") << summary.dump(2) << "\n";
    auto row = [](const char* name, double b, double a) {
      std::printf("%-14s %8.2f -> %.2f\n", name, b, a);
    };
    std::printf("%-14s %8s\n", "metric", "noisy -> refined");
    row("MPJPE (mm)", sb.mpjpe, sa.mpjpe);
    row("MPVPE (mm)", sb.mpvpe, sa.mpvpe);
    row("contact IoU", sb.contact_iou, sa.contact_iou);
    row("IV (cm3)", sb.iv, sa.iv);
    row("PD (cm)", sb.pd_cm, sa.pd_cm);
    row("plausible rate", sb.plausible, sa.plausible);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: schema: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (msg.find("schema error") != std::string::npos) {
      std::cerr << "error: " << msg << "\n";
      return 3;
    }
    std::cerr << "error: " << msg << "\n";
    return 5;
  }
}
