/**
 * @file training.hpp
 * @brief Losses, frame/batch synthesis, self-supervised pre-training, and
 *        end-to-end fine-tuning with staged learning rates.
 *
 * Data is synthesized on the fly from the run seed. Activity vectors are
 * fixed per (split, sample index); payload bits, SNR draw, and noise are
 * redrawn per presentation (epoch) for the training splits and fixed for
 * validation/test. Resume is therefore bit-exact from any epoch boundary.
 */
#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "gfscma/codebook.hpp"
#include "gfscma/config.hpp"
#include "gfscma/models.hpp"

namespace gfscma {

/// Sample-index spaces; also part of the RNG substream identity.
enum class Split : uint64_t { kTrain1 = 0, kTrain2 = 1, kValidation = 2, kTest = 3 };

struct LossReport {
  int step = 0;    // 1 = pre-training, 2 = end-to-end
  int epoch = 0;   // global epoch index within the step
  int period = 0;  // step-2 learning-rate period (0 in step 1)
  double lr = 0.0;
  std::string split;  // "train" | "validation"
  double loss = 0.0;
  double ader = 0.0;
};

/// The three networks plus their parameter stores.
struct ModelBundle {
  PgnBank pgn;
  std::unique_ptr<Uaen> uaen;  // absent for the preamble-only variant
  Audn audn;
  ParamStore pgn_ps, uaen_ps, audn_ps;
};

/// Builds and deterministically initializes all networks for a config.
ModelBundle build_models(const RunConfig& cfg, uint64_t seed);

/// The configured codebook set: built-in default or the configured file.
Codebook codebook_for(const RunConfig& cfg);

/// Sum over users of the binary cross entropy, averaged over the batch.
/// Predictions are clamped to [1e-12, 1-1e-12] before the logs.
double bce_loss(const Tensor& target, const Tensor& prediction);
Tensor bce_grad(const Tensor& target, const Tensor& prediction);

/// Batch of synthesized frames, without the preamble-field observation
/// (which depends on the live PGN parameters).
struct FrameBatch {
  Tensor delta;    // [B, N] in {0,1}
  Tensor y_d;      // [B, L, 2K_d] noisy data field, re/im packed
  Tensor noise_p;  // [B, 2K_p] preamble-field noise at the frame's SNR
};

class FrameSource {
 public:
  FrameSource(const RunConfig& cfg, const Codebook& cb, uint64_t seed);

  /// Frames [first, first+count) of a split. `presentation` tags the
  /// redraw of bits/SNR/noise; pass 0 for validation/test.
  /// `fixed_snr_db`, when set, overrides the uniform SNR draw.
  FrameBatch make_frames(Split split, int64_t first, int64_t count, uint64_t presentation,
                         std::optional<double> fixed_snr_db = std::nullopt) const;

  const Codebook& codebook() const { return cb_; }
  uint64_t seed() const { return seed_; }

 private:
  RunConfig cfg_;
  Codebook cb_;
  uint64_t seed_;
};

/// Full observation batch for a given PGN state: y_p = delta * P + noise.
struct Batch {
  Tensor y_p;  // [B, 2K_p]
  Tensor y_d;  // [B, L, 2K_d]
  Tensor delta;
};
Batch make_batch(const FrameSource& src, const PgnBank& pgn, const ParamStore& pgn_ps,
                 Split split, int64_t first, int64_t count, uint64_t presentation,
                 std::optional<double> fixed_snr_db = std::nullopt);

/// Adam wrapper that treats lr == 0 as a freeze (no parameter changes).
void maybe_adam_step(ParamStore& store, double lr);

/// Step 1: trains theta^(h) alone on (y_d -> delta); leaves the best-
/// validation parameters in mb.uaen_ps. PGN and AUDN stores are untouched.
std::vector<LossReport> pretrain_uaen(ModelBundle& mb, const FrameSource& src,
                                      const RunConfig& cfg);

/// Step 2: joint training through delta -> PGN -> airlink -> (UAEN, AUDN).
/// Variant behavior (frozen UAEN, no UAEN, ...) follows cfg.variant.
/// `on_period_end(period_index, mb)` fires after each learning-rate period;
/// `start_period` skips completed periods when resuming from a checkpoint.
std::vector<LossReport> train_end_to_end(
    ModelBundle& mb, const FrameSource& src, const RunConfig& cfg,
    const std::function<void(int, const ModelBundle&)>& on_period_end = {}, int start_period = 0);

/// Evaluation forward pass over one batch: returns soft scores [B, N].
Tensor eval_scores(ModelBundle& mb, const Batch& batch);

std::string loss_report_csv(const std::vector<LossReport>& reports, uint64_t config_digest,
                            uint64_t seed);

}  // namespace gfscma
