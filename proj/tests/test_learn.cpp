// Model forward pass, loss, analytic gradients, Adam, training loop, model
// files. Numeric paths are checked against plain-loop reference versions.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "mistaken/features.hpp"
#include "mistaken/generator.hpp"
#include "mistaken/model.hpp"
#include "mistaken/optimizer.hpp"
#include "mistaken/rng.hpp"
#include "mistaken/trainer.hpp"

#include "oracles.hpp"

using namespace mistaken;

namespace {

std::shared_ptr<FeatureSeq> random_seq(Rng& rng, int D, bool random_pad = false) {
  auto seq = std::make_shared<FeatureSeq>();
  seq->D = D;
  seq->data.resize(static_cast<std::size_t>(seq->T) * D);
  seq->pad.assign(static_cast<std::size_t>(D), 0.0f);
  for (float& v : seq->data) v = static_cast<float>(rng.next_double());
  if (random_pad)
    for (float& v : seq->pad) v = static_cast<float>(rng.next_double());
  for (int t = 0; t < kFrameCount; ++t) seq->presence[t] = true;
  return seq;
}

TrainExample random_example(Rng& rng, int D, bool random_pad = false) {
  TrainExample ex;
  ex.features = random_seq(rng, D, random_pad);
  for (int t = 0; t < kFrameCount; ++t) ex.targets[t] = rng.next_bool();
  return ex;
}

ModelParams random_params(Rng& rng, int K, int D) {
  ModelParams p = init_params(K, D, rng.next_u64());
  p.b = rng.next_uniform(-0.5, 0.5);
  for (double& w : p.w) w = rng.next_uniform(-1.0, 1.0);
  return p;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Training rows derived from generated scenes, tiny feature dimension.
std::vector<TrainExample> pose_rows(const Dataset& ds, int from, int to) {
  std::vector<TrainExample> rows;
  for (int si = from; si < to; ++si) {
    const Scene& s = ds.scenes[static_cast<std::size_t>(si)];
    for (int c = 0; c < kCharacterCount; ++c) {
      bool ever = false;
      for (const Frame& f : s.frames) ever = ever || f.characters[c].present;
      if (!ever) continue;
      TrainExample ex;
      ex.features = std::make_shared<FeatureSeq>(
          baseline_features(s, CharacterId{c}, BaselineKind::TimePose));
      for (int t = 0; t < kFrameCount; ++t) ex.targets[t] = s.labels.matrix[c][t];
      ex.scene_index = si;
      ex.character_id = c;
      rows.push_back(std::move(ex));
    }
  }
  return rows;
}

}  // namespace

TEST_CASE("init_params seeds a bounded uniform kernel with zero bias") {
  const ModelParams p = init_params(7, 32, 5);
  CHECK(p.b == 0.0);
  REQUIRE(p.w.size() == 7u * 32u);
  const double bound = 1.0 / std::sqrt(7.0 * 32.0);
  for (double w : p.w) {
    CHECK(w >= -bound);
    CHECK(w <= bound);
  }
  const ModelParams q = init_params(7, 32, 5);
  CHECK(p.w == q.w);
  const ModelParams r = init_params(7, 32, 6);
  CHECK(r.w != p.w);

  CHECK_THROWS_AS(init_params(0, 8, 1), ValidationError);
  CHECK_THROWS_AS(init_params(4, 8, 1), ValidationError);
  CHECK_THROWS_AS(init_params(-3, 8, 1), ValidationError);
}

TEST_CASE("sigmoid is stable at extreme logits") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1000.0) == 1.0);
  CHECK(sigmoid(-1000.0) == 0.0);
  CHECK(sigmoid(5.0) + sigmoid(-5.0) == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("forward matches the loop oracle across kernel sizes") {
  Rng rng(0xF02D);
  for (int K : {1, 3, 5, 7, 15}) {
    for (int D : {1, 2, 4, 16}) {
      for (int trial = 0; trial < 10; ++trial) {
        const ModelParams p = random_params(rng, K, D);
        const auto seq = random_seq(rng, D, /*random_pad=*/true);
        const std::vector<double> a = forward(p, *seq);
        const std::vector<double> b = oracles::forward_loops(p, *seq);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(rel_diff(a[i], b[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("forward rejects shape mismatches") {
  Rng rng(1);
  const auto seq = random_seq(rng, 4);
  CHECK_THROWS_AS(forward(random_params(rng, 3, 5), *seq), ValidationError);
  // K beyond 2T-1 = 15 cannot align with any frame window.
  CHECK_THROWS_AS(forward(random_params(rng, 17, 4), *seq), ValidationError);
  auto bad_pad = random_seq(rng, 4);
  bad_pad->pad.resize(3);
  CHECK_THROWS_AS(forward(random_params(rng, 3, 4), *bad_pad), ValidationError);
}

TEST_CASE("out-of-range kernel taps read the pad vector") {
  Rng rng(0xBAD);
  const int D = 3;
  ModelParams p = random_params(rng, 3, D);
  auto seq = random_seq(rng, D);
  for (float& v : seq->pad) v = 1.0f;

  const std::vector<double> with_ones = forward_logits(p, *seq);
  for (float& v : seq->pad) v = 0.0f;
  const std::vector<double> with_zeros = forward_logits(p, *seq);

  // Only the boundary frames touch the pad (K=3 reaches one step out).
  CHECK(with_ones[0] != with_zeros[0]);
  CHECK(with_ones[kFrameCount - 1] != with_zeros[kFrameCount - 1]);
  for (int t = 1; t < kFrameCount - 1; ++t) REQUIRE(with_ones[t] == with_zeros[t]);
}

TEST_CASE("loss matches the loop oracle and stays finite when saturated") {
  Rng rng(0x105E);
  for (int trial = 0; trial < 50; ++trial) {
    const int D = 5;
    const ModelParams p = random_params(rng, 5, D);
    std::vector<TrainExample> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(random_example(rng, D, true));
    const double a = loss(p, batch, 0.37);
    const double b = oracles::loss_loops(p, batch, 0.37);
    REQUIRE(rel_diff(a, b) <= 1e-12);
  }

  // Saturated probabilities hit the log clamp instead of producing inf.
  ModelParams p = init_params(1, 2, 0);
  p.b = 10000.0;
  TrainExample ex;
  ex.features = random_seq(rng, 2);
  ex.targets.fill(false);
  const double saturated = loss(p, {ex}, 0.0);
  CHECK(std::isfinite(saturated));
  CHECK(saturated == Catch::Approx(-std::log(1e-12)).epsilon(1e-6));

  CHECK_THROWS_AS(loss(p, {}, 0.0), ValidationError);
}

TEST_CASE("analytic gradients pass finite-difference checks on small instances") {
  Rng rng(0x96AD);
  for (int trial = 0; trial < 5; ++trial) {
    const int D = 4;
    const ModelParams p = random_params(rng, 3, D);
    std::vector<TrainExample> batch;
    for (int i = 0; i < 5; ++i) batch.push_back(random_example(rng, D, true));
    CHECK(grad_check(p, batch, 1e-5, 0.5) < 1e-6);
    CHECK(grad_check(p, batch, 1e-5, 0.0) < 1e-6);
  }
}

TEST_CASE("grad_check detects a corrupted gradient") {
  Rng rng(0xC0BB);
  const int D = 4;
  const ModelParams p = random_params(rng, 3, D);
  std::vector<TrainExample> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(random_example(rng, D));
  Gradients g = gradients(p, batch, 0.5);
  g.dw[0] = g.dw[0] * 1.1 + 1e-3;
  CHECK(grad_check_against(p, batch, 1e-5, 0.5, g) > 1e-4);
  g = gradients(p, batch, 0.5);
  g.db += 1e-3;
  CHECK(grad_check_against(p, batch, 1e-5, 0.5, g) > 1e-4);
}

TEST_CASE("grad_check validates its step size") {
  Rng rng(2);
  const ModelParams p = random_params(rng, 1, 2);
  std::vector<TrainExample> batch{random_example(rng, 2)};
  CHECK_THROWS_AS(grad_check(p, batch, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(grad_check(p, batch, -1e-4, 0.0), ValidationError);
}

TEST_CASE("a K=1 model's frame score ignores every other frame") {
  Rng rng(0x51);
  const int D = 6;
  const ModelParams p = random_params(rng, 1, D);
  const auto seq = random_seq(rng, D);
  const std::vector<double> base = forward(p, *seq);

  for (int touched = 0; touched < kFrameCount; ++touched) {
    auto mutated = std::make_shared<FeatureSeq>(*seq);
    for (int d = 0; d < D; ++d)
      mutated->data[static_cast<std::size_t>(touched) * D + d] =
          static_cast<float>(rng.next_double());
    const std::vector<double> after = forward(p, *mutated);
    for (int t = 0; t < kFrameCount; ++t) {
      if (t == touched) continue;
      // Bit-identical, not merely close.
      REQUIRE(std::memcmp(&after[t], &base[t], sizeof(double)) == 0);
    }
  }
}

TEST_CASE("the first adam step moves by lr * g / (|g| + eps)") {
  ModelParams p;
  p.K = 1;
  p.D = 3;
  p.b = 0.25;
  p.w = {0.5, -0.25, 2.0};
  AdamState st = make_adam_state(p);
  Gradients g;
  g.dw = {0.5, -2.0, 0.25};  // dyadic values keep the algebra exact
  g.db = 1.5;
  const AdamConfig cfg{0.01, 0.9, 0.999, 1e-8};
  const ModelParams before = p;
  adam_step(st, p, g, cfg);
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    const double expect =
        before.w[i] - cfg.learning_rate * g.dw[i] / (std::abs(g.dw[i]) + cfg.epsilon);
    REQUIRE(p.w[i] == expect);
  }
  CHECK(p.b == before.b - cfg.learning_rate * g.db / (std::abs(g.db) + cfg.epsilon));
  CHECK(st.step == 1);

  Gradients wrong;
  wrong.dw = {1.0, 1.0};
  CHECK_THROWS_AS(adam_step(st, p, wrong, cfg), ValidationError);
}

TEST_CASE("adam step sizes decay once gradients vanish") {
  ModelParams p;
  p.K = 1;
  p.D = 1;
  p.w = {1.0};
  AdamState st = make_adam_state(p);
  const AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  Gradients g;
  g.dw = {1.0};
  g.db = 0.0;
  adam_step(st, p, g, cfg);
  const double first_move = std::abs(1.0 - p.w[0]);
  CHECK(first_move == Catch::Approx(cfg.learning_rate).epsilon(1e-6));

  g.dw = {0.0};
  for (int i = 0; i < 199; ++i) adam_step(st, p, g, cfg);
  const double before = p.w[0];
  adam_step(st, p, g, cfg);
  CHECK(std::abs(p.w[0] - before) < first_move * 1e-6);
}

TEST_CASE("training is deterministic and returns the best-validation epoch") {
  const Dataset ds = generate_dataset(60, 0x7EA1);
  const auto train_rows = pose_rows(ds, 0, 48);
  const auto val_rows = pose_rows(ds, 48, 60);

  TrainConfig cfg;
  cfg.K = 3;
  cfg.learning_rate = 3e-4;
  cfg.weight_decay = 0.01;
  cfg.max_epochs = 12;
  cfg.seed = 9;

  const TrainResult a = train(train_rows, val_rows, cfg);
  const TrainResult b = train(train_rows, val_rows, cfg);
  REQUIRE(a.params.w == b.params.w);
  REQUIRE(a.params.b == b.params.b);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
    CHECK(a.history[i].val_accuracy == b.history[i].val_accuracy);
  }

  double best = -1.0;
  for (const EpochStat& e : a.history) best = std::max(best, e.val_accuracy);
  CHECK(joint_accuracy(a.params, val_rows) == best);
}

TEST_CASE("early stopping fires after patience epochs without improvement") {
  const Dataset ds = generate_dataset(40, 0x57A1E);
  const auto train_rows = pose_rows(ds, 0, 32);
  const auto val_rows = pose_rows(ds, 32, 40);

  TrainConfig cfg;
  cfg.K = 1;
  cfg.learning_rate = 0.0;  // nothing can improve: epoch 0 is the best forever
  cfg.patience = 3;
  cfg.max_epochs = 50;
  const TrainResult r = train(train_rows, val_rows, cfg);
  REQUIRE(r.history.size() == 4);  // first epoch sets the bar, then 3 stale
  CHECK(r.history[0].val_accuracy == r.history[3].val_accuracy);
}

TEST_CASE("train validates its inputs") {
  const Dataset ds = generate_dataset(12, 3);
  const auto rows = pose_rows(ds, 0, 12);
  TrainConfig cfg;
  CHECK_THROWS_AS(train({}, rows, cfg), ValidationError);
  CHECK_THROWS_AS(train(rows, {}, cfg), ValidationError);

  auto mixed = rows;
  TrainExample odd;
  Rng rng(1);
  odd.features = random_seq(rng, 2);
  mixed.push_back(odd);
  CHECK_THROWS_AS(train(mixed, rows, cfg), ValidationError);
}

TEST_CASE("model files round trip parameters, config, and history") {
  const std::string dir =
      (std::filesystem::temp_directory_path() / "mistaken_learn_test").string();
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/model.json";

  Rng rng(0x10AD);
  const ModelParams p = random_params(rng, 3, 17);
  TrainConfig cfg;
  cfg.learning_rate = 3e-4;
  cfg.K = 3;
  cfg.seed = 99;
  std::vector<EpochStat> hist{{0, 0.693, 50.0}, {1, 0.401, 83.25}};

  save_model(path, p, cfg, hist);
  const LoadedModel m = load_model(path);
  CHECK(m.params.K == p.K);
  CHECK(m.params.D == p.D);
  CHECK(m.params.b == p.b);
  REQUIRE(m.params.w == p.w);  // exact doubles through the text format
  CHECK(m.config.learning_rate == cfg.learning_rate);
  CHECK(m.config.seed == cfg.seed);
  REQUIRE(m.history.size() == 2);
  CHECK(m.history[1].val_accuracy == 83.25);

  nlohmann::json j = parse_json_file(path);
  j["version"] = "99";
  write_text_file(path, dump_json(j));
  CHECK_THROWS_AS(load_model(path), CodecError);
  std::filesystem::remove_all(dir);
}
