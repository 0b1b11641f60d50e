#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "hoi/surrogate.hpp"

using namespace hoi;

TEST_CASE("grasp targets formula") {
  auto t0 = grasp_targets(0.0);
  CHECK(t0.b_hard == 0);
  CHECK(t0.b_soft == 0.0);

  auto tc = grasp_targets(0.015);
  CHECK(tc.b_hard == 1);
  CHECK(tc.b_soft == 0.5);

  auto t2 = grasp_targets(0.030);
  CHECK(t2.b_hard == 1);
  CHECK(t2.b_soft == Catch::Approx(0.75).margin(1e-15));

  CHECK_THROWS(grasp_targets(-0.001));
}

TEST_CASE("manip targets formula") {
  auto t0 = manip_targets(0.05, 3.0);
  CHECK(t0.s_hard == 0);
  CHECK(t0.s_soft == 0.0);

  auto t1 = manip_targets(0.5, 0.0);
  CHECK(t1.s_hard == 1);
  CHECK(t1.s_soft == 0.5);

  auto t2 = manip_targets(0.5, 1.0);
  CHECK(t2.s_hard == 1);
  CHECK(t2.s_soft == Catch::Approx(0.75).margin(1e-12));
}

TEST_CASE("target consistency: soft >= 0.5 iff hard") {
  for (int i = 0; i <= 10000; ++i) {
    double pd = 0.06 * i / 10000.0;
    auto t = grasp_targets(pd);
    CHECK((t.b_soft >= 0.5) == (t.b_hard == 1));
  }
  for (int i = 0; i <= 1000; ++i) {
    double fe = i / 1000.0;
    for (double me : {0.0, 0.3, 2.0, 1e6}) {
      auto t = manip_targets(fe, me);
      CHECK((t.s_soft >= 0.5) == (t.s_hard == 1));
    }
  }
}

TEST_CASE("soft targets are strictly increasing") {
  double prev = -1;
  for (int i = 0; i <= 200; ++i) {
    double pd = 0.05 * i / 200.0;
    double b = grasp_targets(pd).b_soft;
    CHECK(b > prev);
    prev = b;
  }
  prev = -1;
  for (int i = 0; i <= 200; ++i) {
    double me = 5.0 * i / 200.0;
    double s = manip_targets(0.5, me).s_soft;
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("binary cross entropy values") {
  CHECK(bce(0.5, 0.5) == Catch::Approx(std::log(2.0)).margin(1e-12));
  CHECK(bce(0.9, 1.0) == Catch::Approx(-std::log(0.9)).margin(1e-12));
  // clamp limit: perfect confident predictions go to ~0
  CHECK(bce(1.0, 1.0) < 1e-6);
  CHECK(bce(0.0, 0.0) < 1e-6);
  // clamp keeps the wrong-confident case finite
  CHECK(std::isfinite(bce(0.0, 1.0)));
}

TEST_CASE("forward is permutation-invariant and 0.5 at zero weights") {
  PointNet<double> net;
  net.init(7, 99, 16, 24, 12);
  Rng rng(2);
  int rows = 40;
  std::vector<double> X(rows * 7);
  for (auto& x : X) x = rng.normal();
  PointNetWorkspace<double> ws;
  double p = pointnet_forward(net, X.data(), rows, ws);
  CHECK(p > 0.0);
  CHECK(p < 1.0);

  // permute rows
  std::vector<int> perm(rows);
  for (int i = 0; i < rows; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<double> Xp(X.size());
  for (int i = 0; i < rows; ++i)
    std::copy(X.begin() + perm[i] * 7, X.begin() + (perm[i] + 1) * 7, Xp.begin() + i * 7);
  CHECK(pointnet_forward(net, Xp.data(), rows, ws) == p);

  PointNet<double> zero;
  zero.resize(7, 16, 24, 12);
  CHECK(pointnet_forward(zero, X.data(), rows, ws) == 0.5);
}

TEST_CASE("saturated nets have vanishing gradients") {
  PointNet<double> net;
  net.resize(4, 8, 8, 4);
  net.b4[0] = 50.0;  // huge logit
  Rng rng(5);
  std::vector<double> X(6 * 4);
  for (auto& x : X) x = rng.normal();
  PointNetWorkspace<double> ws;
  double p = pointnet_forward(net, X.data(), 6, ws);
  CHECK(p > 0.999999);
  PointNetGrads<double> grads;
  grads.zero(net);
  std::vector<double> dX(X.size());
  pointnet_backward(net, X.data(), 6, ws, p * (1 - p), grads, dX.data());
  for (double g : dX) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(11);
  double worst_param = 0, worst_input = 0;
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
        worst_param = std::max(worst_param, rel((lp - lm) / (2 * h), (*gblocks[b])[i]));
      }
    }
    for (size_t i = 0; i < X.size(); ++i) {
      double orig = X[i];
      X[i] = orig + h;
      double lp = bce(pointnet_forward(net, X.data(), rows, ws), target);
      X[i] = orig - h;
      double lm = bce(pointnet_forward(net, X.data(), rows, ws), target);
      X[i] = orig;
      worst_input = std::max(worst_input, rel((lp - lm) / (2 * h), dX[i]));
    }
  }
  CHECK(worst_param < 1e-4);
  CHECK(worst_input < 1e-4);
}

TEST_CASE("input gradients permute with the inputs") {
  PointNet<double> net;
  net.init(5, 31, 8, 12, 6);
  Rng rng(13);
  int rows = 9;
  std::vector<double> X(rows * 5);
  for (auto& x : X) x = rng.normal();
  PointNetWorkspace<double> ws;
  PointNetGrads<double> grads;
  grads.zero(net);
  std::vector<double> dX(X.size());
  double p = pointnet_forward(net, X.data(), rows, ws);
  pointnet_backward(net, X.data(), rows, ws, p - 1.0, grads, dX.data());

  std::vector<int> perm(rows);
  for (int i = 0; i < rows; ++i) perm[i] = (i + 4) % rows;
  std::vector<double> Xp(X.size()), dXp(X.size());
  for (int i = 0; i < rows; ++i)
    std::copy(X.begin() + perm[i] * 5, X.begin() + (perm[i] + 1) * 5, Xp.begin() + i * 5);
  PointNetGrads<double> grads2;
  grads2.zero(net);
  double p2 = pointnet_forward(net, Xp.data(), rows, ws);
  pointnet_backward(net, Xp.data(), rows, ws, p2 - 1.0, grads2, dXp.data());
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < 5; ++k)
      CHECK(dXp[i * 5 + k] == dX[perm[i] * 5 + k]);
}

TEST_CASE("net serialization round trip is exact") {
  SurrogateNet s;
  s.kind = SurrogateKind::manip;
  s.net.init(kManipFeatureDim, 77);
  s.seed = 77;
  auto path = (std::filesystem::temp_directory_path() / "hoi_net.bin").string();
  save_surrogate(s, path);
  SurrogateNet back = load_surrogate(path);
  CHECK(back.kind == SurrogateKind::manip);
  CHECK(back.net.in_dim == s.net.in_dim);
  auto a = s.net.param_blocks();
  auto b = back.net.param_blocks();
  for (size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);
  CHECK(std::filesystem::exists(path + ".json"));
  CHECK_THROWS(load_surrogate("/nonexistent/net.bin"));

  // corrupted magic is rejected
  {
    std::ofstream f(path, std::ios::binary);
    f << "XXXXGARBAGE";
  }
  CHECK_THROWS(load_surrogate(path));
}

TEST_CASE("training fits a separable toy problem and loss decreases") {
  Rng rng(9);
  auto make_set = [&](int n) {
    std::vector<TrainExample> out;
    for (int i = 0; i < n; ++i) {
      TrainExample e;
      int rows = 24;
      e.X.resize(rows * 5);
      for (auto& x : e.X) x = static_cast<float>(rng.normal());
      bool pos = rng.uniform() < 0.4;
      if (pos) e.X[rng.below(rows) * 5] = 2.5f;
      else
        for (int r = 0; r < rows; ++r) e.X[r * 5] = std::min(e.X[r * 5], 1.2f);
      e.hard = pos ? 1.f : 0.f;
      e.soft = pos ? 0.8f : 0.1f;
      out.push_back(std::move(e));
    }
    return out;
  };
  auto train = make_set(300), val = make_set(80), test = make_set(80);
  TrainConfig cfg;
  cfg.seed = 3;
  cfg.epochs = 30;
  cfg.early_stop_patience = 0;
  auto res = train_surrogate(SurrogateKind::grasp, 5, train, val, test, cfg);
  CHECK(res.holdout_fscore >= 0.9);
  // loss decreases monotonically over the first 10 epochs
  for (int e = 1; e < 10; ++e) CHECK(res.epoch_losses[e] <= res.epoch_losses[e - 1] + 1e-9);

  // all-positive labels converge to confident scores
  auto all_pos = make_set(60);
  for (auto& e : all_pos) {
    e.hard = 1.f;
    e.soft = 0.9f;
  }
  TrainConfig cfg2;
  cfg2.seed = 1;
  cfg2.epochs = 25;
  cfg2.early_stop_patience = 0;
  auto res2 = train_surrogate(SurrogateKind::grasp, 5, all_pos, {}, all_pos, cfg2);
  PointNetWorkspace<float> ws;
  for (const auto& e : all_pos)
    CHECK(pointnet_forward(res2.net.net, e.X.data(), 24, ws) > 0.5f);
}

TEST_CASE("training is deterministic per seed") {
  Rng rng(21);
  std::vector<TrainExample> train;
  for (int i = 0; i < 64; ++i) {
    TrainExample e;
    e.X.resize(10 * 5);
    for (auto& x : e.X) x = static_cast<float>(rng.normal());
    e.hard = i % 2 ? 1.f : 0.f;
    e.soft = i % 2 ? 0.7f : 0.2f;
    train.push_back(std::move(e));
  }
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.epochs = 5;
  auto r1 = train_surrogate(SurrogateKind::grasp, 5, train, {}, train, cfg);
  auto r2 = train_surrogate(SurrogateKind::grasp, 5, train, {}, train, cfg);
  auto a = r1.net.net.param_blocks();
  auto b = r2.net.net.param_blocks();
  for (size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);

  cfg.seed = 6;
  auto r3 = train_surrogate(SurrogateKind::grasp, 5, train, {}, train, cfg);
  CHECK_FALSE(r3.net.net.W1 == r1.net.net.W1);

  TrainConfig bad;
  bad.alpha_hard = 0;
  bad.alpha_soft = 0;
  CHECK_THROWS(train_surrogate(SurrogateKind::grasp, 5, train, {}, train, bad));
  CHECK_THROWS(train_surrogate(SurrogateKind::grasp, 5, {}, {}, {}, cfg));
}
