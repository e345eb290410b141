/**
 * @file fd_check.hpp
 * @brief Central finite-difference gradient checking used across suites.
 *
 * The checker treats a network evaluation as a pure function of its
 * parameters by copying the store for every probe, so batchnorm running-stat
 * updates cannot leak between evaluations.
 */
#pragma once

#include <cmath>
#include <functional>

#include "gfscma/layers.hpp"
#include "gfscma/models.hpp"
#include "gfscma/param_store.hpp"
#include "gfscma/training.hpp"

namespace fdcheck {

constexpr double kStep = 1e-5;

inline double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / denom;
}

/// Scalar projection loss sum(r .* y); grad wrt y is r.
inline double proj_loss(const gfscma::Tensor& y, const gfscma::Tensor& r) {
  double acc = 0.0;
  for (int64_t i = 0; i < y.size(); ++i) acc += y[i] * r[i];
  return acc;
}

/// Max relative error between analytic and central finite-difference
/// gradients of a projection loss through one layer, over both the layer
/// parameters and the input.
inline double check_layer(const gfscma::Layer& layer, const gfscma::ParamStore& ps0,
                          const gfscma::Tensor& x, const gfscma::Tensor& r) {
  using namespace gfscma;
  auto eval = [&](const ParamStore& ps, const Tensor& input) {
    ParamStore copy = ps;
    return proj_loss(layer.forward(copy, input, Mode::kTrain, nullptr, nullptr), r);
  };

  // analytic
  ParamStore ps = ps0;
  LayerCache cache;
  layer.forward(ps, x, Mode::kTrain, nullptr, &cache);
  const Tensor gin = layer.backward(ps, cache, r);

  double worst = 0.0;
  for (const auto& [name, p] : ps0.params()) {
    for (int64_t i = 0; i < p.value.size(); ++i) {
      ParamStore plus = ps0, minus = ps0;
      plus.param(name).value[i] += kStep;
      minus.param(name).value[i] -= kStep;
      const double fd = (eval(plus, x) - eval(minus, x)) / (2.0 * kStep);
      worst = std::max(worst, rel_err(ps.param(name).grad[i], fd));
    }
  }
  for (int64_t i = 0; i < x.size(); ++i) {
    Tensor xp = x, xm = x;
    xp[i] += kStep;
    xm[i] -= kStep;
    const double fd = (eval(ps0, xp) - eval(ps0, xm)) / (2.0 * kStep);
    worst = std::max(worst, rel_err(gin[i], fd));
  }
  return worst;
}

/// Full-chain loss of the composite model delta -> PGN -> noiseless airlink
/// -> (UAEN,) AUDN -> BCE, as a pure function of the three stores.
/// y_d and delta are fixed constants; train mode throughout.
inline double chain_loss(gfscma::ModelBundle& mb, const gfscma::ParamStore& pgn_ps,
                         const gfscma::ParamStore& uaen_ps, const gfscma::ParamStore& audn_ps,
                         const gfscma::Tensor& delta, const gfscma::Tensor& y_d) {
  using namespace gfscma;
  ParamStore pgn_copy = pgn_ps, uaen_copy = uaen_ps, audn_copy = audn_ps;
  const int64_t batch = delta.dim(0);
  const int64_t n = delta.dim(1);
  const Tensor rows = mb.pgn.normalized_rows(pgn_copy);
  const int64_t width = rows.dim(1);
  Tensor y_p = Tensor::zeros({batch, width});
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t u = 0; u < n; ++u) {
      if (delta.at2(b, u) == 0.0) continue;
      for (int64_t k = 0; k < width; ++k) y_p.at2(b, k) += rows.at2(u, k);
    }
  }
  Tensor input = y_p;
  if (mb.uaen) {
    const Tensor alpha = mb.uaen->forward(uaen_copy, y_d, Mode::kTrain, nullptr);
    input = Tensor::zeros({batch, n + width});
    for (int64_t b = 0; b < batch; ++b) {
      for (int64_t u = 0; u < n; ++u) input.at2(b, u) = alpha.at2(b, u);
      for (int64_t k = 0; k < width; ++k) input.at2(b, n + k) = y_p.at2(b, k);
    }
  }
  const Tensor scores = mb.audn.forward(audn_copy, input, Mode::kTrain, nullptr, nullptr);
  return bce_loss(delta, scores);
}

}  // namespace fdcheck
