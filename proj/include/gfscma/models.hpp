/**
 * @file models.hpp
 * @brief The three trainable networks: PGN, UAEN, AUDN.
 *
 * Complex packing convention used everywhere: re/im interleaved per element,
 * so a length-K complex vector becomes 2K reals [re0, im0, re1, im1, ...].
 */
#pragma once

#include <complex>
#include <string>
#include <vector>

#include "gfscma/airlink.hpp"
#include "gfscma/layers.hpp"

namespace gfscma {

std::vector<double> pack_complex(const std::vector<cplx>& v);
std::vector<cplx> unpack_complex(const std::vector<double>& packed);

/**
 * Preamble generation bank: one learnable direction vector of 2*K_p reals
 * per user. An active user emits its direction vector normalized to unit
 * complex L2 norm; an inactive user emits exactly zero. A single dense layer
 * driven by the activity scalar with no bias reduces to exactly this gated
 * vector, which guarantees the exact-zero inactive path.
 */
class PgnBank {
 public:
  PgnBank(int n_users, int k_preamble);

  void init(ParamStore& ps) const;
  void init_weights(ParamStore& ps, Rng& rng) const;

  /// All N preambles, unit-normalized, as rows of an [N, 2K_p] tensor.
  /// Throws on a direction vector with norm below 1e-12.
  Tensor normalized_rows(const ParamStore& ps) const;

  /// Chain rule through v -> v/|v| for every row; accumulates into grads.
  void backward_rows(ParamStore& ps, const Tensor& grad_rows) const;

  /// Spec-level single-user emission: zero when inactive, else the
  /// unit-norm preamble as K_p complex elements.
  std::vector<cplx> emit(int delta_n, int user_index, const ParamStore& ps) const;

  int n_users() const { return n_users_; }
  int k_preamble() const { return k_preamble_; }
  int64_t param_count() const { return static_cast<int64_t>(n_users_) * 2 * k_preamble_; }
  static const char* param_name() { return "pgn.dirs"; }

 private:
  int n_users_, k_preamble_;
};

struct UaenConfig {
  int n_kernel_1 = 256;
  int n_kernel_2 = 32;
  int l_hidden = 3;  // L^(h): dense combiner depth, last layer emits N
  int l_slots = 16;  // L
  int n_users = 64;  // N
  int k_data = 4;    // K_d
  bool fully_connected = false;  // ablation: dense stack instead of convs
  int fc_hidden_layers = 6;      // L^(h) for the FC ablation

  void validate() const;
  /// Dense widths of the conv variant: (l_hidden - i + 1) * N for i = 1..l_hidden.
  std::vector<int> dense_widths() const;
};

struct AudnConfig {
  int l_hidden = 10;  // L^(g) residual blocks
  int n_users = 64;
  int k_preamble = 16;
  double p_drop = 0.1;
  bool preamble_only = false;  // ablation: input is y_p alone

  void validate() const;
  int width() const { return 5 * n_users; }
  int input_dim() const { return (preamble_only ? 0 : n_users) + 2 * k_preamble; }
};

/// User activity extraction network: per-slot conv stages followed by a
/// dense combiner, sigmoid output of per-user activity probabilities.
class Uaen {
 public:
  explicit Uaen(const UaenConfig& cfg);

  void init(ParamStore& ps) const { seq_.init(ps); }
  void init_weights(ParamStore& ps, Rng& rng) const { seq_.init_weights(ps, rng); }

  /// y_d packed as [B, L, 2K_d] -> activity probabilities [B, N] in (0,1).
  Tensor forward(ParamStore& ps, const Tensor& y_d, Mode mode, LayerCache* cache) const;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_alpha) const;

  const UaenConfig& config() const { return cfg_; }
  int64_t param_count() const { return seq_.param_count(); }
  const Sequential& pipeline() const { return seq_; }

  /// Budget-matched uniform hidden width for the FC ablation.
  static int fc_matched_width(const UaenConfig& cfg);

 private:
  UaenConfig cfg_;
  Sequential seq_;
};

/// Active user detection network: dense projection to 5N, L^(g) residual
/// blocks (dense+BN+ReLU+dropout with identity skip), sigmoid head.
class Audn {
 public:
  explicit Audn(const AudnConfig& cfg);

  void init(ParamStore& ps) const { seq_.init(ps); }
  void init_weights(ParamStore& ps, Rng& rng) const { seq_.init_weights(ps, rng); }

  /// Input rows are concat(alpha, packed y_p) of length N + 2K_p (or just
  /// packed y_p when preamble_only). Returns soft scores [B, N] in (0,1).
  Tensor forward(ParamStore& ps, const Tensor& input, Mode mode, Rng* dropout_rng,
                 LayerCache* cache) const;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_scores) const;

  const AudnConfig& config() const { return cfg_; }
  int64_t param_count() const { return seq_.param_count(); }
  const Sequential& pipeline() const { return seq_; }

 private:
  AudnConfig cfg_;
  Sequential seq_;
};

/// Binary decisions: entry n active iff scores[n] > gamma (strict).
ActivityVector threshold_decide(const std::vector<double>& scores, double gamma);

/// Max and mean absolute pairwise complex cross-correlation of unit-norm
/// preamble rows [N, 2K_p]; off-diagonal pairs only.
struct CrossCorrStats {
  double max_abs = 0.0;
  double mean_abs = 0.0;
};
CrossCorrStats preamble_cross_correlation(const Tensor& rows);

}  // namespace gfscma
