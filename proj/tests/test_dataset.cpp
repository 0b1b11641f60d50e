#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "hoi/dataset.hpp"

using namespace hoi;
namespace fs = std::filesystem;

TEST_CASE("generate_grasp produces repeatable contact-rich grasps") {
  TriMesh sphere = make_icosphere(0.03);
  HandPose g1 = generate_grasp(sphere, 12);
  HandPose g2 = generate_grasp(sphere, 12);
  CHECK(g1.trans == g2.trans);
  CHECK(g1.root_rot == g2.root_rot);
  bool joints_same = true;
  for (int k = 0; k < kNumJoints; ++k)
    joints_same = joints_same && g1.joint_angles[k] == g2.joint_angles[k];
  CHECK(joints_same);

  // at least 3 fingertips in contact, verified through the field
  HandMesh hand = skin(g1);
  auto samples = sample_surface(sphere, 1024, 99);
  CorrField field = compute_field(hand, sphere, samples);
  CHECK(fingertip_contact_count(field, g1.shape) >= 3);
}

TEST_CASE("generate_grasp rejects oversized objects") {
  TriMesh big = make_icosphere(0.25, 2);
  CHECK_THROWS(generate_grasp(big, 1));
}

TEST_CASE("grasps hold the object against gravity") {
  for (const char* name : {"sphere", "box", "cylinder"}) {
    TriMesh obj = make_primitive(name);
    HandPose g = generate_grasp(obj, 5);
    HandMesh hand = skin(g);
    auto samples = sample_surface(obj, 1024, 3);
    CorrField field = compute_field(hand, obj, samples);
    auto [fe, sol] = solve_fe(fe_contact_normals(field, 0.002), {0, 0, 9.81}, 0.8);
    INFO(name);
    CHECK(fe <= 0.05);
  }
}

TEST_CASE("build_dataset labels are consistent and deterministic") {
  GenConfig cfg;
  cfg.pairs = 10;
  cfg.interp_m = 5;
  cfg.seed = 7;
  GlobalConfig global;
  global.field_samples = 512;  // keep the test quick
  auto build = build_dataset(cfg, global, 1);
  REQUIRE(build.pairs_generated > 0);
  CHECK(build.records.size() == static_cast<size_t>(build.pairs_generated) * 5);

  for (const auto& r : build.records) {
    // stored targets recompute exactly from stored labels
    auto gt = grasp_targets(r.pd, global.c_pd);
    auto mt = manip_targets(r.fe, r.me, global.c_fe);
    CHECK(r.grasp.b_hard == gt.b_hard);
    CHECK(r.grasp.b_soft == gt.b_soft);
    CHECK(r.manip.s_hard == mt.s_hard);
    CHECK(r.manip.s_soft == mt.s_soft);
    CHECK(r.fe >= 0.0);
    CHECK(r.fe <= 1.0);
    // clean endpoint of every pair is exact
    if (r.j == 1) {
      CHECK(r.pd == 0.0);
      CHECK(r.grasp.b_hard == 0);
    }
    CHECK((r.split == "train" || r.split == "val" || r.split == "test"));
  }

  auto build2 = build_dataset(cfg, global, 1);
  REQUIRE(build2.records.size() == build.records.size());
  bool identical = true;
  for (size_t i = 0; i < build.records.size(); ++i) {
    identical = identical && build.records[i].pose.trans == build2.records[i].pose.trans &&
                build.records[i].pd == build2.records[i].pd &&
                build.records[i].fe == build2.records[i].fe &&
                build.records[i].me == build2.records[i].me;
  }
  CHECK(identical);

  // thread count does not change the outputs
  auto build8 = build_dataset(cfg, global, 8);
  REQUIRE(build8.records.size() == build.records.size());
  for (size_t i = 0; i < build.records.size(); ++i) {
    CHECK(build8.records[i].pose.trans == build.records[i].pose.trans);
    CHECK(build8.records[i].me == build.records[i].me);
  }
}

TEST_CASE("splits are disjoint at the pair level") {
  for (int pid = 0; pid < 100; ++pid) {
    std::string s = split_for_pair(pid);
    CHECK(s == split_for_pair(pid));  // stable
  }
  int train = 0, val = 0, test = 0;
  for (int pid = 0; pid < 1000; ++pid) {
    std::string s = split_for_pair(pid);
    if (s == "train") train++;
    else if (s == "val") val++;
    else test++;
  }
  CHECK(train == 800);
  CHECK(val == 100);
  CHECK(test == 100);
}

TEST_CASE("labels round trip through the jsonl format") {
  GenConfig cfg;
  cfg.pairs = 6;
  cfg.seed = 3;
  GlobalConfig global;
  global.field_samples = 512;
  auto build = build_dataset(cfg, global, 1);
  auto dir = (fs::temp_directory_path() / "hoi_ds_test").string();
  fs::remove_all(dir);
  save_labels(build, global, dir);
  save_manifest(build, cfg, global, dir);
  CHECK(fs::exists(fs::path(dir) / "manifest.json"));

  auto loaded = load_labels((fs::path(dir) / "labels.jsonl").string());
  REQUIRE(loaded.records.size() == build.records.size());
  for (size_t i = 0; i < loaded.records.size(); ++i) {
    const auto& a = loaded.records[i];
    const auto& b = build.records[i];
    CHECK(a.pair == b.pair);
    CHECK(a.j == b.j);
    CHECK(a.split == b.split);
    CHECK(norm(a.pose.trans - b.pose.trans) < 1e-8);
    CHECK(std::abs(a.pd - b.pd) < 1e-9);
    CHECK(std::abs(a.me - b.me) < 1e-6);
    CHECK(a.field_seed == b.field_seed);
  }
  CHECK(loaded.shape == build.shape);
}

TEST_CASE("materialized features have the documented shapes") {
  GenConfig cfg;
  cfg.pairs = 5;
  cfg.seed = 11;
  GlobalConfig global;
  global.field_samples = 256;
  global.grasp_cloud_points = 64;
  auto build = build_dataset(cfg, global, 1);
  auto data = materialize_surrogate_data(build.records, global, 2);
  size_t total = data.grasp_train.size() + data.grasp_val.size() + data.grasp_test.size();
  CHECK(total == build.records.size());
  for (const auto& e : data.grasp_train)
    CHECK(e.X.size() == (kGraspHandPoints + 64) * kGraspFeatureDim);
  for (const auto& e : data.manip_train)
    CHECK(e.X.size() == 256 * kManipFeatureDim);
  CHECK(data.grasp_test_meta.size() == data.grasp_test.size());
}

TEST_CASE("clean sequences attach the grasp to the moving object") {
  Sequence seq = make_clean_sequence("box", "lift", 6, 1.0 / 30, 9);
  seq.validate();
  CHECK(seq.size() == 6);
  // the hand tracks the object rigidly: wrist-to-object-origin distance fixed
  TriMesh base = load_mesh("box");
  double d0 = -1;
  for (size_t i = 0; i < seq.size(); ++i) {
    double d = norm(seq.hand_poses[i].trans - seq.traj.poses[i].t);
    if (d0 < 0) d0 = d;
    CHECK(d == Catch::Approx(d0).margin(1e-9));
  }

  Sequence noisy = perturb_sequence(seq, NoiseConfig{0.01, 0.3, 0.05, 42});
  CHECK(noisy.size() == seq.size());
  bool differs = false;
  for (size_t i = 0; i < seq.size(); ++i)
    differs = differs || !(noisy.hand_poses[i].trans == seq.hand_poses[i].trans);
  CHECK(differs);

  Sequence noisy2 = perturb_sequence(seq, NoiseConfig{0.01, 0.3, 0.05, 42});
  for (size_t i = 0; i < seq.size(); ++i)
    CHECK(noisy2.hand_poses[i].trans == noisy.hand_poses[i].trans);
}
