#pragma once

// Adam with bias correction, written against the (w, b) parameter shape.
// epsilon sits outside the square root, so the very first step is
// -lr * g / (|g| + eps).

#include <cmath>
#include <vector>

#include "mistaken/model.hpp"

namespace mistaken {

struct AdamState {
  std::vector<double> mw, vw;
  double mb = 0.0, vb = 0.0;
  long long step = 0;
};

inline AdamState make_adam_state(const ModelParams& p) {
  AdamState s;
  s.mw.assign(p.w.size(), 0.0);
  s.vw.assign(p.w.size(), 0.0);
  return s;
}

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline void adam_step(AdamState& st, ModelParams& p, const Gradients& g,
                      const AdamConfig& cfg) {
  if (st.mw.size() != p.w.size() || g.dw.size() != p.w.size())
    throw ValidationError("adam_step: shape mismatch");
  st.step += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < p.w.size(); ++i) {
    st.mw[i] = cfg.beta1 * st.mw[i] + (1.0 - cfg.beta1) * g.dw[i];
    st.vw[i] = cfg.beta2 * st.vw[i] + (1.0 - cfg.beta2) * g.dw[i] * g.dw[i];
    const double mhat = st.mw[i] / c1;
    const double vhat = st.vw[i] / c2;
    p.w[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
  st.mb = cfg.beta1 * st.mb + (1.0 - cfg.beta1) * g.db;
  st.vb = cfg.beta2 * st.vb + (1.0 - cfg.beta2) * g.db * g.db;
  p.b -= cfg.learning_rate * (st.mb / c1) / (std::sqrt(st.vb / c2) + cfg.epsilon);
}

}  // namespace mistaken
