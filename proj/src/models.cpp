#include "gfscma/models.hpp"

#include <cmath>

#include "gfscma/error.hpp"

namespace gfscma {

std::vector<double> pack_complex(const std::vector<cplx>& v) {
  std::vector<double> out(v.size() * 2);
  for (size_t i = 0; i < v.size(); ++i) {
    out[2 * i] = v[i].real();
    out[2 * i + 1] = v[i].imag();
  }
  return out;
}

std::vector<cplx> unpack_complex(const std::vector<double>& packed) {
  if (packed.size() % 2 != 0) throw Error("numeric", "unpack_complex: odd length");
  std::vector<cplx> out(packed.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = cplx(packed[2 * i], packed[2 * i + 1]);
  }
  return out;
}

// ---------------------------------------------------------------- PgnBank

PgnBank::PgnBank(int n_users, int k_preamble) : n_users_(n_users), k_preamble_(k_preamble) {
  if (n_users < 1 || k_preamble < 1) {
    throw Error("config_invalid", "pgn: user count and preamble length must be positive");
  }
}

void PgnBank::init(ParamStore& ps) const {
  ps.create(param_name(), {n_users_, 2LL * k_preamble_});
}

void PgnBank::init_weights(ParamStore& ps, Rng& rng) const {
  Tensor& dirs = ps.param(param_name()).value;
  for (int64_t i = 0; i < dirs.size(); ++i) dirs[i] = rng.next_gaussian();
}

Tensor PgnBank::normalized_rows(const ParamStore& ps) const {
  const Tensor& dirs = ps.param(param_name()).value;
  const int64_t width = 2LL * k_preamble_;
  Tensor rows = Tensor::zeros({n_users_, width});
  for (int n = 0; n < n_users_; ++n) {
    const double* v = dirs.data.data() + n * width;
    double norm_sq = 0.0;
    for (int64_t i = 0; i < width; ++i) norm_sq += v[i] * v[i];
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
      throw Error("numeric", "pgn: direction vector for user " + std::to_string(n) +
                                 " has degenerate norm");
    }
    double* r = rows.data.data() + n * width;
    for (int64_t i = 0; i < width; ++i) r[i] = v[i] / norm;
  }
  return rows;
}

void PgnBank::backward_rows(ParamStore& ps, const Tensor& grad_rows) const {
  Param& dirs = ps.param(param_name());
  const int64_t width = 2LL * k_preamble_;
  for (int n = 0; n < n_users_; ++n) {
    const double* v = dirs.value.data.data() + n * width;
    const double* g = grad_rows.data.data() + n * width;
    double norm_sq = 0.0, dot_vg = 0.0;
    for (int64_t i = 0; i < width; ++i) {
      norm_sq += v[i] * v[i];
      dot_vg += v[i] * g[i];
    }
    const double norm = std::sqrt(norm_sq);
    // d(v/|v|)/dv applied to g: (g - u (u.g)) / |v| with u = v/|v|
    const double proj = dot_vg / norm_sq;
    double* gd = dirs.grad.data.data() + n * width;
    for (int64_t i = 0; i < width; ++i) {
      gd[i] += (g[i] - v[i] * proj) / norm;
    }
  }
}

std::vector<cplx> PgnBank::emit(int delta_n, int user_index, const ParamStore& ps) const {
  if (user_index < 0 || user_index >= n_users_) {
    throw Error("config_invalid", "pgn: user index out of range");
  }
  if (delta_n == 0) {
    return std::vector<cplx>(static_cast<size_t>(k_preamble_), cplx(0.0, 0.0));
  }
  const Tensor rows = normalized_rows(ps);
  const int64_t width = 2LL * k_preamble_;
  std::vector<double> packed(rows.data.begin() + user_index * width,
                             rows.data.begin() + (user_index + 1) * width);
  return unpack_complex(packed);
}

// ---------------------------------------------------------------- UaenConfig

void UaenConfig::validate() const {
  if (n_users < 1 || l_slots < 1 || k_data < 1) {
    throw Error("config_invalid", "uaen: dimensions must be positive");
  }
  if (l_hidden < 1) throw Error("config_invalid", "uaen: l_hidden must be >= 1");
  if (!fully_connected) {
    if (n_kernel_1 < 1 || n_kernel_2 < 1) {
      throw Error("config_invalid", "uaen: kernel counts must be positive");
    }
    if (n_kernel_1 <= n_kernel_2) {
      throw Error("config_invalid", "uaen: n_kernel_1 (" + std::to_string(n_kernel_1) +
                                        ") must exceed n_kernel_2 (" + std::to_string(n_kernel_2) +
                                        ")");
    }
  } else if (fc_hidden_layers < 1) {
    throw Error("config_invalid", "uaen: fc_hidden_layers must be >= 1");
  }
}

std::vector<int> UaenConfig::dense_widths() const {
  std::vector<int> w;
  for (int i = 1; i <= l_hidden; ++i) w.push_back((l_hidden - i + 1) * n_users);
  return w;
}

// ---------------------------------------------------------------- Uaen

Uaen::Uaen(const UaenConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (!cfg_.fully_connected) {
    seq_.add(std::make_unique<Conv1d>("uaen.conv1", 2 * cfg_.k_data, cfg_.n_kernel_1));
    seq_.add(std::make_unique<BatchNorm>("uaen.bn1", cfg_.n_kernel_1));
    seq_.add(std::make_unique<Relu>());
    seq_.add(std::make_unique<Conv1d>("uaen.conv2", cfg_.n_kernel_1, cfg_.n_kernel_2));
    seq_.add(std::make_unique<BatchNorm>("uaen.bn2", cfg_.n_kernel_2));
    seq_.add(std::make_unique<Relu>());
    seq_.add(std::make_unique<Flatten>(cfg_.l_slots, cfg_.n_kernel_2));
    int prev = cfg_.l_slots * cfg_.n_kernel_2;
    const auto widths = cfg_.dense_widths();
    for (size_t i = 0; i < widths.size(); ++i) {
      const std::string name = "uaen.fc" + std::to_string(i + 1);
      seq_.add(std::make_unique<Dense>(name, prev, widths[i]));
      if (i + 1 < widths.size()) {
        seq_.add(std::make_unique<BatchNorm>("uaen.bn_fc" + std::to_string(i + 1), widths[i]));
        seq_.add(std::make_unique<Relu>());
      } else {
        seq_.add(std::make_unique<Sigmoid>());
      }
      prev = widths[i];
    }
  } else {
    const int width = fc_matched_width(cfg_);
    seq_.add(std::make_unique<Flatten>(cfg_.l_slots, 2 * cfg_.k_data));
    int prev = cfg_.l_slots * 2 * cfg_.k_data;
    for (int i = 1; i <= cfg_.fc_hidden_layers; ++i) {
      const bool last = (i == cfg_.fc_hidden_layers);
      const int out = last ? cfg_.n_users : width;
      seq_.add(std::make_unique<Dense>("uaen.fc" + std::to_string(i), prev, out));
      if (!last) {
        seq_.add(std::make_unique<BatchNorm>("uaen.bn_fc" + std::to_string(i), out));
        seq_.add(std::make_unique<Relu>());
      } else {
        seq_.add(std::make_unique<Sigmoid>());
      }
      prev = out;
    }
  }
}

Tensor Uaen::forward(ParamStore& ps, const Tensor& y_d, Mode mode, LayerCache* cache) const {
  if (y_d.ndim() != 3 || y_d.dim(1) != cfg_.l_slots || y_d.dim(2) != 2 * cfg_.k_data) {
    throw Error("numeric", "uaen: input shape " + y_d.shape_str() + " does not match [B," +
                               std::to_string(cfg_.l_slots) + "," +
                               std::to_string(2 * cfg_.k_data) + "]");
  }
  return seq_.forward(ps, y_d, mode, nullptr, cache);
}

Tensor Uaen::backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_alpha) const {
  return seq_.backward(ps, cache, grad_alpha);
}

int Uaen::fc_matched_width(const UaenConfig& cfg) {
  if (cfg.fc_hidden_layers < 2) return 1;  // single layer has no free width
  UaenConfig conv_cfg = cfg;
  conv_cfg.fully_connected = false;
  const int64_t target = Uaen(conv_cfg).param_count();
  const int64_t d = static_cast<int64_t>(cfg.l_slots) * 2 * cfg.k_data;
  const int64_t n = cfg.n_users;
  const int64_t h = cfg.fc_hidden_layers;
  // params(W) for h layers, last emitting N with no BN:
  //   (d*W + W) + 2W  +  (h-2) * (W*W + W + 2W)  +  (W*N + N)
  auto fc_params = [&](int64_t w) {
    int64_t p = d * w + w + 2 * w;
    p += (h - 2) * (w * w + 3 * w);
    p += w * n + n;
    return p;
  };
  int best_w = 1;
  int64_t best_err = -1;
  for (int w = 1; w <= 65536; ++w) {
    const int64_t err = std::llabs(fc_params(w) - target);
    if (best_err < 0 || err < best_err) {
      best_err = err;
      best_w = w;
    }
    if (fc_params(w) > target && err > best_err) break;
  }
  return best_w;
}

// ---------------------------------------------------------------- Audn

void AudnConfig::validate() const {
  if (n_users < 1 || k_preamble < 1) {
    throw Error("config_invalid", "audn: dimensions must be positive");
  }
  if (l_hidden < 1) throw Error("config_invalid", "audn: l_hidden must be >= 1");
  if (p_drop < 0.0 || p_drop >= 1.0) {
    throw Error("config_invalid", "audn: p_drop must be in [0,1)");
  }
}

Audn::Audn(const AudnConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int w = cfg_.width();
  seq_.add(std::make_unique<Dense>("audn.proj", cfg_.input_dim(), w));
  for (int i = 1; i <= cfg_.l_hidden; ++i) {
    auto inner = std::make_unique<Sequential>();
    const std::string prefix = "audn.block" + std::to_string(i);
    inner->add(std::make_unique<Dense>(prefix + ".fc", w, w));
    inner->add(std::make_unique<BatchNorm>(prefix + ".bn", w));
    inner->add(std::make_unique<Relu>());
    inner->add(std::make_unique<Dropout>(cfg_.p_drop));
    seq_.add(std::make_unique<Residual>(std::move(inner)));
  }
  seq_.add(std::make_unique<Dense>("audn.out", w, cfg_.n_users));
  seq_.add(std::make_unique<Sigmoid>());
}

Tensor Audn::forward(ParamStore& ps, const Tensor& input, Mode mode, Rng* dropout_rng,
                     LayerCache* cache) const {
  if (input.ndim() != 2 || input.dim(1) != cfg_.input_dim()) {
    throw Error("numeric", "audn: input shape " + input.shape_str() + " does not match [B," +
                               std::to_string(cfg_.input_dim()) + "]");
  }
  return seq_.forward(ps, input, mode, dropout_rng, cache);
}

Tensor Audn::backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_scores) const {
  return seq_.backward(ps, cache, grad_scores);
}

// ---------------------------------------------------------------- Decisions

ActivityVector threshold_decide(const std::vector<double>& scores, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error("config_invalid", "threshold_decide: gamma must be in (0,1)");
  }
  ActivityVector v;
  v.delta.resize(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    v.delta[i] = scores[i] > gamma ? 1 : 0;
  }
  return v;
}

CrossCorrStats preamble_cross_correlation(const Tensor& rows) {
  const int64_t n = rows.dim(0);
  const int64_t width = rows.dim(1);
  const int64_t k = width / 2;
  CrossCorrStats stats;
  int64_t pairs = 0;
  for (int64_t a = 0; a < n; ++a) {
    for (int64_t b = a + 1; b < n; ++b) {
      const double* pa = rows.data.data() + a * width;
      const double* pb = rows.data.data() + b * width;
      double re = 0.0, im = 0.0;  // <p_a, p_b> with conjugated second argument
      for (int64_t i = 0; i < k; ++i) {
        const double ar = pa[2 * i], ai = pa[2 * i + 1];
        const double br = pb[2 * i], bi = pb[2 * i + 1];
        re += ar * br + ai * bi;
        im += ai * br - ar * bi;
      }
      const double mag = std::sqrt(re * re + im * im);
      stats.max_abs = std::max(stats.max_abs, mag);
      stats.mean_abs += mag;
      ++pairs;
    }
  }
  if (pairs > 0) stats.mean_abs /= static_cast<double>(pairs);
  return stats;
}

}  // namespace gfscma
