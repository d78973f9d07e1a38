#pragma once

// Training loop: shuffled mini-batches, Adam updates, early stopping on
// validation joint accuracy, best-epoch parameter selection. Also the
// finite-difference gradient checker and the model file codec.

#include <algorithm>
#include <string>
#include <vector>

#include "mistaken/model.hpp"
#include "mistaken/optimizer.hpp"
#include "mistaken/rng.hpp"

namespace mistaken {

struct TrainConfig {
  double learning_rate = 1e-5;
  int batch_size = 32;
  int K = 7;
  double weight_decay = 1.0;
  int patience = 3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 200;
  std::uint64_t seed = 0;
};

struct EpochStat {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;  // percent
};

namespace train_detail {

// One batch: data loss (pre-update) plus gradients, sharing the forward pass.
inline double batch_grads(const ModelParams& p, const std::vector<TrainExample>& batch,
                          double weight_decay, Gradients& g) {
  g.dw.assign(p.w.size(), 0.0);
  g.db = 0.0;
  double data = 0.0;
  const int half = (p.K - 1) / 2;
  const double n = static_cast<double>(batch.size()) * kFrameCount;
  for (const TrainExample& ex : batch) {
    const FeatureSeq& f = *ex.features;
    const std::vector<double> s = forward(p, f);
    for (int t = 0; t < f.T; ++t) {
      const double y = ex.targets[t] ? 1.0 : 0.0;
      const double st = s[static_cast<std::size_t>(t)];
      data += -(y * clamped_log(st) + (1.0 - y) * clamped_log(1.0 - st));
      const double dz = (st - y) / n;
      g.db += dz;
      for (int k = 0; k < p.K; ++k) {
        const int src = t + k - half;
        const float* vec = (src >= 0 && src < f.T)
                               ? f.data.data() + static_cast<std::size_t>(src) * f.D
                               : f.pad.data();
        double* grow = g.dw.data() + static_cast<std::size_t>(k) * f.D;
        for (int d = 0; d < f.D; ++d) grow[d] += dz * static_cast<double>(vec[d]);
      }
    }
  }
  double reg = 0.0;
  for (double v : p.w) reg += v * v;
  for (std::size_t i = 0; i < p.w.size(); ++i) g.dw[i] += 2.0 * weight_decay * p.w[i];
  return data / n + weight_decay * reg;
}

}  // namespace train_detail

// Joint accuracy in percent over every (example, frame) cell; a score >= 0.5
// counts as a positive call.
inline double joint_accuracy(const ModelParams& p,
                             const std::vector<TrainExample>& examples) {
  if (examples.empty()) throw ValidationError("joint_accuracy: empty set");
  long long hit = 0, total = 0;
  for (const TrainExample& ex : examples) {
    const std::vector<double> s = forward(p, *ex.features);
    for (int t = 0; t < kFrameCount; ++t) {
      const bool call = s[static_cast<std::size_t>(t)] >= 0.5;
      hit += call == ex.targets[t];
      ++total;
    }
  }
  return 100.0 * static_cast<double>(hit) / static_cast<double>(total);
}

struct TrainResult {
  ModelParams params;
  std::vector<EpochStat> history;
};

inline TrainResult train(const std::vector<TrainExample>& train_set,
                         const std::vector<TrainExample>& val_set,
                         const TrainConfig& cfg) {
  if (train_set.empty() || val_set.empty())
    throw ValidationError("train: empty split");
  const int D = train_set[0].features->D;
  for (const TrainExample& ex : train_set)
    if (ex.features->D != D) throw ValidationError("train: mixed feature dimensions");

  TrainResult out;
  out.params = init_params(cfg.K, D, cfg.seed);
  ModelParams best = out.params;
  AdamState adam = make_adam_state(out.params);
  const AdamConfig acfg{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};

  std::vector<int> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  double best_acc = -1.0;
  int stale = 0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, 0xE90Cull + static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);

    double loss_sum = 0.0;
    long long loss_n = 0;
    Gradients g;
    for (std::size_t at = 0; at < order.size(); at += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), at + cfg.batch_size);
      std::vector<TrainExample> batch;
      batch.reserve(end - at);
      for (std::size_t i = at; i < end; ++i)
        batch.push_back(train_set[static_cast<std::size_t>(order[i])]);
      loss_sum += train_detail::batch_grads(out.params, batch, cfg.weight_decay, g) *
                  static_cast<double>(batch.size());
      loss_n += static_cast<long long>(batch.size());
      adam_step(adam, out.params, g, acfg);
    }

    const double val_acc = joint_accuracy(out.params, val_set);
    out.history.push_back(
        {epoch, loss_sum / static_cast<double>(loss_n), val_acc});
    if (val_acc > best_acc) {
      best_acc = val_acc;
      best = out.params;
      stale = 0;
    } else {
      ++stale;
      if (stale >= cfg.patience) break;
    }
  }
  out.params = best;
  return out;
}

// Central-difference verification of the analytic gradients. Checks the bias
// plus either every weight coordinate (small instances) or a seeded sample
// of at least 200. Returns the maximum relative error.
inline double grad_check_against(ModelParams params,
                                 const std::vector<TrainExample>& batch, double eps,
                                 double weight_decay, const Gradients& analytic,
                                 std::uint64_t seed = 0) {
  if (eps <= 0) throw ValidationError("grad_check: eps must be positive");
  const std::size_t total = params.w.size();
  std::vector<std::size_t> coords;
  if (total <= 512) {
    coords.resize(total);
    for (std::size_t i = 0; i < total; ++i) coords[i] = i;
  } else {
    Rng rng(mix_seed(seed, 0x6eadull));
    coords.resize(256);
    for (auto& c : coords)
      c = static_cast<std::size_t>(
          rng.next_int(0, static_cast<int>(total) - 1));
  }

  auto rel = [](double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
  };

  double worst = 0.0;
  for (std::size_t c : coords) {
    const double keep = params.w[c];
    params.w[c] = keep + eps;
    const double lp = loss(params, batch, weight_decay);
    params.w[c] = keep - eps;
    const double lm = loss(params, batch, weight_decay);
    params.w[c] = keep;
    worst = std::max(worst, rel(analytic.dw[c], (lp - lm) / (2 * eps)));
  }
  const double keep = params.b;
  params.b = keep + eps;
  const double lp = loss(params, batch, weight_decay);
  params.b = keep - eps;
  const double lm = loss(params, batch, weight_decay);
  params.b = keep;
  worst = std::max(worst, rel(analytic.db, (lp - lm) / (2 * eps)));
  return worst;
}

inline double grad_check(const ModelParams& params,
                         const std::vector<TrainExample>& batch, double eps,
                         double weight_decay, std::uint64_t seed = 0) {
  const Gradients g = gradients(params, batch, weight_decay);
  return grad_check_against(params, batch, eps, weight_decay, g, seed);
}

// --- model file -------------------------------------------------------------

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  nlohmann::json j;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["K"] = c.K;
  j["weight_decay"] = c.weight_decay;
  j["patience"] = c.patience;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["max_epochs"] = c.max_epochs;
  j["seed"] = c.seed;
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.K = j.at("K").get<int>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.patience = j.at("patience").get<int>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

struct LoadedModel {
  ModelParams params;
  TrainConfig config;
  std::vector<EpochStat> history;
};

inline void save_model(const std::string& path, const ModelParams& params,
                       const TrainConfig& config,
                       const std::vector<EpochStat>& history) {
  nlohmann::json j = params_to_json(params);
  j["config"] = train_config_to_json(config);
  nlohmann::json h = nlohmann::json::array();
  for (const EpochStat& e : history) {
    nlohmann::json row;
    row["epoch"] = e.epoch;
    row["train_loss"] = e.train_loss;
    row["val_accuracy"] = e.val_accuracy;
    h.push_back(std::move(row));
  }
  j["history"] = std::move(h);
  write_text_file(path, dump_json(j));
}

inline LoadedModel load_model(const std::string& path) {
  const nlohmann::json j = parse_json_file(path);
  LoadedModel m;
  m.params = params_from_json(j);
  m.config = train_config_from_json(j.at("config"));
  for (const auto& row : j.at("history")) {
    EpochStat e;
    e.epoch = row.at("epoch").get<int>();
    e.train_loss = row.at("train_loss").get<double>();
    e.val_accuracy = row.at("val_accuracy").get<double>();
    m.history.push_back(e);
  }
  return m;
}

}  // namespace mistaken
