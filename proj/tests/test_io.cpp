#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hoi/dataset.hpp"
#include "hoi/io.hpp"

using namespace hoi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Sequence tiny_sequence() {
  Sequence seq;
  seq.object_ref = "sphere";
  seq.seed = 5;
  seq.generator = "test";
  seq.traj = generate_trajectory("swing", 4, 1.0 / 30, 5);
  Rng rng(2);
  for (int i = 0; i < 4; ++i) {
    HandPose p = rest_pose();
    p.trans = rng.normal3(0.02);
    p.root_rot = rng.normal3(0.2);
    for (auto& j : p.joint_angles) j = rng.normal3(0.2);
    seq.hand_poses.push_back(p);
  }
  return seq;
}

}  // namespace

TEST_CASE("sequence files round trip exactly enough") {
  Sequence seq = tiny_sequence();
  auto path = (fs::temp_directory_path() / "hoi_seq.jsonl").string();
  save_sequence(seq, path);
  Sequence back = load_sequence(path);
  REQUIRE(back.size() == seq.size());
  CHECK(back.object_ref == seq.object_ref);
  CHECK(back.seed == seq.seed);
  CHECK(back.traj.dt == Catch::Approx(seq.traj.dt).margin(1e-12));
  for (size_t i = 0; i < seq.size(); ++i) {
    CHECK(norm(back.hand_poses[i].trans - seq.hand_poses[i].trans) < 1e-8);
    CHECK(norm(back.traj.poses[i].t - seq.traj.poses[i].t) < 1e-8);
    for (int k = 0; k < kNumJoints; ++k)
      CHECK(norm(back.hand_poses[i].joint_angles[k] - seq.hand_poses[i].joint_angles[k]) < 1e-8);
  }
  CHECK(back.hand_poses.front().shape == seq.hand_poses.front().shape);
}

TEST_CASE("sequence writing is byte-identical across runs") {
  Sequence seq = tiny_sequence();
  auto p1 = (fs::temp_directory_path() / "hoi_seq_a.jsonl").string();
  auto p2 = (fs::temp_directory_path() / "hoi_seq_b.jsonl").string();
  save_sequence(seq, p1);
  save_sequence(seq, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("sequence loader rejects malformed input") {
  auto path = (fs::temp_directory_path() / "hoi_seq_bad.jsonl").string();
  {
    std::ofstream f(path);
    f << "{\"not\":\"a header\"}\n";
  }
  CHECK_THROWS(load_sequence(path));
  {
    std::ofstream f(path);
    f << "this is not json\n";
  }
  CHECK_THROWS(load_sequence(path));
  CHECK_THROWS(load_sequence("/nonexistent/file.jsonl"));

  // frame-count mismatch against the header
  Sequence seq = tiny_sequence();
  save_sequence(seq, path);
  auto content = slurp(path);
  content = content.substr(0, content.rfind('{') - 1);  // drop the last frame line
  {
    std::ofstream f(path, std::ios::binary);
    f << content;
  }
  CHECK_THROWS(load_sequence(path));
}

TEST_CASE("sequence validation catches structural problems") {
  Sequence seq = tiny_sequence();
  seq.hand_poses.pop_back();
  CHECK_THROWS(seq.validate());

  Sequence two = tiny_sequence();
  two.hand_poses.resize(2);
  two.traj.poses.resize(2);
  CHECK_THROWS(two.validate());

  Sequence mixed = tiny_sequence();
  mixed.hand_poses[1].shape.distal_len[0] *= 2;
  CHECK_THROWS(mixed.validate());
}
