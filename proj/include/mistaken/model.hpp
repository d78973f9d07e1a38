#pragma once

// Temporal convolutional logistic regression. A kernel w of K per-frame
// blocks slides over the T feature vectors (centered, zero-padded at the
// ends) and a sigmoid turns each windowed dot product plus bias into a
// per-frame mistake score. Loss is mean binary cross-entropy over every
// (example, frame) pair plus an L2 penalty on w (bias exempt). All math in
// 64-bit with fixed accumulation order.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mistaken/core.hpp"
#include "mistaken/features.hpp"
#include "mistaken/json_codec.hpp"
#include "mistaken/rng.hpp"

namespace mistaken {

struct ModelParams {
  int K = 7;
  int D = 0;
  double b = 0.0;
  std::vector<double> w;  // K*D, kernel-position-major

  double wk(int k, int d) const { return w[static_cast<std::size_t>(k) * D + d]; }
  double& wk(int k, int d) { return w[static_cast<std::size_t>(k) * D + d]; }
};

inline ModelParams init_params(int K, int D, std::uint64_t seed) {
  if (K < 1 || K % 2 == 0)
    throw ValidationError("init_params: K must be odd and positive, got " +
                          std::to_string(K));
  ModelParams p;
  p.K = K;
  p.D = D;
  p.b = 0.0;
  p.w.resize(static_cast<std::size_t>(K) * D);
  const double half_width = 1.0 / std::sqrt(static_cast<double>(K) * D);
  Rng rng(mix_seed(seed, 0x1717ull));
  for (double& v : p.w) v = rng.next_uniform(-half_width, half_width);
  return p;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace model_detail {

inline void check_shapes(const ModelParams& p, const FeatureSeq& f) {
  if (p.D != f.D)
    throw ValidationError("forward: feature dimension " + std::to_string(f.D) +
                          " does not match model D " + std::to_string(p.D));
  if (p.K % 2 == 0 || p.K < 1)
    throw ValidationError("forward: K must be odd and positive");
  if (p.K > 2 * f.T - 1)
    throw ValidationError("forward: K exceeds 2T-1");
  if (static_cast<int>(f.pad.size()) != f.D)
    throw ValidationError("forward: pad vector has wrong dimension");
}

}  // namespace model_detail

// Pre-sigmoid scores. Out-of-range temporal positions contribute the
// sequence's pad vector (all zeros except the Present baseline).
inline std::vector<double> forward_logits(const ModelParams& p, const FeatureSeq& f) {
  model_detail::check_shapes(p, f);
  const int half = (p.K - 1) / 2;
  std::vector<double> z(static_cast<std::size_t>(f.T), 0.0);
  for (int t = 0; t < f.T; ++t) {
    double acc = p.b;
    for (int k = 0; k < p.K; ++k) {
      const int src = t + k - half;
      const float* vec = (src >= 0 && src < f.T)
                             ? f.data.data() + static_cast<std::size_t>(src) * f.D
                             : f.pad.data();
      const double* wrow = p.w.data() + static_cast<std::size_t>(k) * f.D;
      for (int d = 0; d < f.D; ++d) acc += wrow[d] * static_cast<double>(vec[d]);
    }
    z[static_cast<std::size_t>(t)] = acc;
  }
  return z;
}

inline std::vector<double> forward(const ModelParams& p, const FeatureSeq& f) {
  std::vector<double> s = forward_logits(p, f);
  for (double& v : s) v = sigmoid(v);
  return s;
}

struct TrainExample {
  std::shared_ptr<const FeatureSeq> features;
  std::array<bool, kFrameCount> targets{};
  int scene_index = -1;
  int character_id = -1;
};

inline double clamped_log(double x) { return std::log(x < 1e-12 ? 1e-12 : x); }

inline double loss(const ModelParams& p, const std::vector<TrainExample>& batch,
                   double weight_decay) {
  if (batch.empty()) throw ValidationError("loss: empty batch");
  double data = 0.0;
  long long pairs = 0;
  for (const TrainExample& ex : batch) {
    const std::vector<double> s = forward(p, *ex.features);
    for (int t = 0; t < kFrameCount; ++t) {
      const double y = ex.targets[t] ? 1.0 : 0.0;
      data += -(y * clamped_log(s[t]) + (1.0 - y) * clamped_log(1.0 - s[t]));
      ++pairs;
    }
  }
  double reg = 0.0;
  for (double v : p.w) reg += v * v;
  return data / static_cast<double>(pairs) + weight_decay * reg;
}

struct Gradients {
  std::vector<double> dw;  // K*D
  double db = 0.0;
};

inline Gradients gradients(const ModelParams& p, const std::vector<TrainExample>& batch,
                           double weight_decay) {
  if (batch.empty()) throw ValidationError("gradients: empty batch");
  Gradients g;
  g.dw.assign(p.w.size(), 0.0);
  const int half = (p.K - 1) / 2;
  const double n = static_cast<double>(batch.size()) * kFrameCount;
  for (const TrainExample& ex : batch) {
    const FeatureSeq& f = *ex.features;
    const std::vector<double> s = forward(p, f);
    for (int t = 0; t < f.T; ++t) {
      const double y = ex.targets[t] ? 1.0 : 0.0;
      const double dz = (s[static_cast<std::size_t>(t)] - y) / n;
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
  for (std::size_t i = 0; i < p.w.size(); ++i) g.dw[i] += 2.0 * weight_decay * p.w[i];
  return g;
}

inline nlohmann::json params_to_json(const ModelParams& p) {
  nlohmann::json j;
  j["version"] = kSceneSchemaVersion;
  j["K"] = p.K;
  j["D"] = p.D;
  j["b"] = p.b;
  j["w"] = p.w;
  return j;
}

inline ModelParams params_from_json(const nlohmann::json& j) {
  const auto ver = j.at("version").get<std::string>();
  if (ver != kSceneSchemaVersion)
    throw CodecError("model: unsupported schema version \"" + ver + "\"");
  ModelParams p;
  p.K = j.at("K").get<int>();
  p.D = j.at("D").get<int>();
  p.b = j.at("b").get<double>();
  p.w = j.at("w").get<std::vector<double>>();
  if (static_cast<int>(p.w.size()) != p.K * p.D)
    throw CodecError("model: w has " + std::to_string(p.w.size()) +
                     " entries, expected K*D");
  return p;
}

}  // namespace mistaken
