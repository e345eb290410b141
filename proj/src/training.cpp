#include "gfscma/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gfscma/error.hpp"

namespace gfscma {

namespace {

constexpr double kClampLo = 1e-12;
constexpr double kClampHi = 1.0 - 1e-12;

uint64_t stream_word(Stream s, Split split) {
  return (static_cast<uint64_t>(s) << 8) | static_cast<uint64_t>(split);
}

double clampp(double p) { return std::min(kClampHi, std::max(kClampLo, p)); }

/// Miss/false-alarm counts of thresholded scores against the truth batch.
void count_confusion(const Tensor& scores, const Tensor& truth, double gamma, int64_t* misses,
                     int64_t* false_alarms) {
  for (int64_t i = 0; i < scores.size(); ++i) {
    const bool active = truth[i] != 0.0;
    const bool decided = scores[i] > gamma;
    if (active && !decided) ++*misses;
    if (!active && decided) ++*false_alarms;
  }
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  const int64_t batch = a.dim(0);
  const int64_t wa = a.dim(1), wb = b.dim(1);
  Tensor out = Tensor::zeros({batch, wa + wb});
  for (int64_t r = 0; r < batch; ++r) {
    std::copy_n(a.data.data() + r * wa, wa, out.data.data() + r * (wa + wb));
    std::copy_n(b.data.data() + r * wb, wb, out.data.data() + r * (wa + wb) + wa);
  }
  return out;
}

}  // namespace

Codebook codebook_for(const RunConfig& cfg) {
  return cfg.codebook_file.empty() ? default_codebook() : load_codebook(cfg.codebook_file);
}

ModelBundle build_models(const RunConfig& cfg, uint64_t seed) {
  cfg.validate();
  const Variant variant = cfg.variant_enum();
  ModelBundle mb{PgnBank(cfg.n_users, cfg.k_preamble),
                 variant == Variant::kPreambleOnly ? nullptr
                                                   : std::make_unique<Uaen>(cfg.uaen_config()),
                 Audn(cfg.audn_config()),
                 ParamStore{},
                 ParamStore{},
                 ParamStore{}};
  mb.pgn.init(mb.pgn_ps);
  Rng rng_pgn = Rng::derive(seed, kStreamInitPgn);
  mb.pgn.init_weights(mb.pgn_ps, rng_pgn);
  if (mb.uaen) {
    mb.uaen->init(mb.uaen_ps);
    Rng rng_uaen = Rng::derive(seed, kStreamInitUaen);
    mb.uaen->init_weights(mb.uaen_ps, rng_uaen);
  }
  mb.audn.init(mb.audn_ps);
  Rng rng_audn = Rng::derive(seed, kStreamInitAudn);
  mb.audn.init_weights(mb.audn_ps, rng_audn);
  return mb;
}

double bce_loss(const Tensor& target, const Tensor& prediction) {
  if (!target.same_shape(prediction) || target.ndim() != 2) {
    throw Error("numeric", "bce_loss: target " + target.shape_str() + " vs prediction " +
                               prediction.shape_str());
  }
  const int64_t batch = target.dim(0);
  double total = 0.0;
  for (int64_t i = 0; i < target.size(); ++i) {
    const double p = clampp(prediction[i]);
    total -= target[i] != 0.0 ? std::log(p) : std::log(1.0 - p);
  }
  return total / static_cast<double>(batch);
}

Tensor bce_grad(const Tensor& target, const Tensor& prediction) {
  if (!target.same_shape(prediction) || target.ndim() != 2) {
    throw Error("numeric", "bce_grad: shape mismatch");
  }
  const double inv_batch = 1.0 / static_cast<double>(target.dim(0));
  Tensor g = Tensor::zeros(target.shape);
  for (int64_t i = 0; i < target.size(); ++i) {
    const double p = clampp(prediction[i]);
    g[i] = inv_batch * (target[i] != 0.0 ? -1.0 / p : 1.0 / (1.0 - p));
  }
  return g;
}

// ---------------------------------------------------------------- FrameSource

FrameSource::FrameSource(const RunConfig& cfg, const Codebook& cb, uint64_t seed)
    : cfg_(cfg), cb_(cb), seed_(seed) {
  if (cb_.j_cbs != cfg_.j_codebooks || cb_.m_order != cfg_.m_order ||
      cb_.k_data != cfg_.k_data) {
    throw Error("config_invalid", "frame source: codebook dimensions (J=" +
                                      std::to_string(cb_.j_cbs) + ", M=" +
                                      std::to_string(cb_.m_order) + ", Kd=" +
                                      std::to_string(cb_.k_data) +
                                      ") do not match config");
  }
}

FrameBatch FrameSource::make_frames(Split split, int64_t first, int64_t count,
                                    uint64_t presentation,
                                    std::optional<double> fixed_snr_db) const {
  const int n = cfg_.n_users;
  const int l = cfg_.l_slots;
  const int kd = cfg_.k_data;
  const int kp = cfg_.k_preamble;
  const int bpb = cb_.bits_per_block();

  FrameBatch out;
  out.delta = Tensor::zeros({count, n});
  out.y_d = Tensor::zeros({count, l, 2LL * kd});
  out.noise_p = Tensor::zeros({count, 2LL * kp});

  const ActivityPrior prior{cfg_.p_bar};
  for (int64_t f = 0; f < count; ++f) {
    const uint64_t idx = static_cast<uint64_t>(first + f);

    Rng rng_act = Rng::derive(seed_, stream_word(kStreamActivity, split), idx);
    const ActivityVector act = sample_activity(prior, n, rng_act);
    for (int u = 0; u < n; ++u) out.delta.data[f * n + u] = act.delta[static_cast<size_t>(u)];

    double snr_db;
    if (fixed_snr_db) {
      snr_db = *fixed_snr_db;
    } else {
      Rng rng_snr = Rng::derive(seed_, stream_word(kStreamSnr, split), idx, presentation);
      snr_db = sample_snr(cfg_.snr_lo_db, cfg_.snr_hi_db, rng_snr);
    }
    const double nv_d = snr_to_noise_var(snr_db, 1.0 / kd);
    const double nv_p = snr_to_noise_var(snr_db, 1.0 / kp);

    Rng rng_bits = Rng::derive(seed_, stream_word(kStreamBits, split), idx, presentation);
    std::vector<CtuPayload> ctus;
    std::vector<uint8_t> bits(static_cast<size_t>(l) * bpb);
    for (int u = 0; u < n; ++u) {
      if (!act.delta[static_cast<size_t>(u)]) continue;
      for (uint8_t& b : bits) b = rng_bits.next_bernoulli(0.5) ? 1 : 0;
      ctus.push_back(build_ctu(u, bits, cb_));
    }

    Rng rng_nd = Rng::derive(seed_, stream_word(kStreamNoiseData, split), idx, presentation);
    const ChannelRealization chan = awgn_channel(n, snr_db);
    const std::vector<cplx> y_d = superpose_data(act, ctus, chan, nv_d, rng_nd, l, kd);
    double* yd_row = out.y_d.data.data() + f * l * 2 * kd;
    for (size_t i = 0; i < y_d.size(); ++i) {
      yd_row[2 * i] = y_d[i].real();
      yd_row[2 * i + 1] = y_d[i].imag();
    }

    Rng rng_np = Rng::derive(seed_, stream_word(kStreamNoisePreamble, split), idx, presentation);
    const double s = std::sqrt(nv_p / 2.0);
    double* np_row = out.noise_p.data.data() + f * 2 * kp;
    for (int k = 0; k < 2 * kp; ++k) np_row[k] = s * rng_np.next_gaussian();
  }
  return out;
}

Batch make_batch(const FrameSource& src, const PgnBank& pgn, const ParamStore& pgn_ps,
                 Split split, int64_t first, int64_t count, uint64_t presentation,
                 std::optional<double> fixed_snr_db) {
  FrameBatch fb = src.make_frames(split, first, count, presentation, fixed_snr_db);
  const Tensor rows = pgn.normalized_rows(pgn_ps);
  const int64_t n = rows.dim(0);
  const int64_t width = rows.dim(1);
  Batch batch;
  batch.y_p = std::move(fb.noise_p);
  for (int64_t b = 0; b < count; ++b) {
    double* yp = batch.y_p.data.data() + b * width;
    const double* d = fb.delta.data.data() + b * n;
    for (int64_t u = 0; u < n; ++u) {
      if (d[u] == 0.0) continue;
      const double* p = rows.data.data() + u * width;
      for (int64_t k = 0; k < width; ++k) yp[k] += p[k];
    }
  }
  batch.y_d = std::move(fb.y_d);
  batch.delta = std::move(fb.delta);
  return batch;
}

void maybe_adam_step(ParamStore& store, double lr) {
  if (lr == 0.0) return;  // schedule-level freeze
  adam_step(store, lr);
}

// ---------------------------------------------------------------- Step 1

std::vector<LossReport> pretrain_uaen(ModelBundle& mb, const FrameSource& src,
                                      const RunConfig& cfg) {
  if (!mb.uaen) {
    throw Error("config_invalid", "pretrain: the " + cfg.variant + " variant has no UAEN");
  }
  std::vector<LossReport> reports;
  const int total_epochs = cfg.step1_epochs_hi + cfg.step1_epochs_lo;
  if (total_epochs == 0 || cfg.step1_train == 0) return reports;

  const int64_t bsz = cfg.batch_size;
  ParamStore best = mb.uaen_ps;
  double best_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < total_epochs; ++epoch) {
    const double lr = epoch < cfg.step1_epochs_hi ? cfg.step1_lr : cfg.step1_lr / 10.0;
    double loss_sum = 0.0;
    int64_t misses = 0, fas = 0, frames = 0;
    for (int64_t first = 0; first < cfg.step1_train; first += bsz) {
      const int64_t count = std::min(bsz, cfg.step1_train - first);
      const FrameBatch fb =
          src.make_frames(Split::kTrain1, first, count, static_cast<uint64_t>(epoch));
      LayerCache cache;
      const Tensor alpha = mb.uaen->forward(mb.uaen_ps, fb.y_d, Mode::kTrain, &cache);
      const double loss = bce_loss(fb.delta, alpha);
      if (!std::isfinite(loss)) {
        throw Error("numeric", "pretrain: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", frame " + std::to_string(first));
      }
      mb.uaen->backward(mb.uaen_ps, cache, bce_grad(fb.delta, alpha));
      maybe_adam_step(mb.uaen_ps, lr);
      loss_sum += loss * static_cast<double>(count);
      count_confusion(alpha, fb.delta, cfg.gamma, &misses, &fas);
      frames += count;
    }
    reports.push_back({1, epoch, 0, lr, "train", loss_sum / static_cast<double>(frames),
                       static_cast<double>(misses + fas) /
                           static_cast<double>(frames * cfg.n_users)});

    double val_sum = 0.0;
    int64_t vmiss = 0, vfa = 0;
    for (int64_t first = 0; first < cfg.validation; first += bsz) {
      const int64_t count = std::min(bsz, cfg.validation - first);
      const FrameBatch fb = src.make_frames(Split::kValidation, first, count, 0);
      const Tensor alpha = mb.uaen->forward(mb.uaen_ps, fb.y_d, Mode::kEval, nullptr);
      val_sum += bce_loss(fb.delta, alpha) * static_cast<double>(count);
      count_confusion(alpha, fb.delta, cfg.gamma, &vmiss, &vfa);
    }
    const double val_loss = val_sum / static_cast<double>(cfg.validation);
    reports.push_back({1, epoch, 0, lr, "validation", val_loss,
                       static_cast<double>(vmiss + vfa) /
                           static_cast<double>(cfg.validation * cfg.n_users)});
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = mb.uaen_ps;
    }
  }
  mb.uaen_ps = best;
  return reports;
}

// ---------------------------------------------------------------- Step 2

namespace {

struct ChainStep {
  double loss = 0.0;
  int64_t misses = 0, false_alarms = 0;
};

/// One evaluation pass of the full chain over a split.
ChainStep evaluate_chain(ModelBundle& mb, const FrameSource& src, const RunConfig& cfg,
                         Split split, int64_t total, std::optional<double> fixed_snr = {}) {
  ChainStep out;
  const int64_t bsz = cfg.batch_size;
  double loss_sum = 0.0;
  for (int64_t first = 0; first < total; first += bsz) {
    const int64_t count = std::min(bsz, total - first);
    const Batch batch = make_batch(src, mb.pgn, mb.pgn_ps, split, first, count, 0, fixed_snr);
    const Tensor scores = eval_scores(mb, batch);
    loss_sum += bce_loss(batch.delta, scores) * static_cast<double>(count);
    count_confusion(scores, batch.delta, cfg.gamma, &out.misses, &out.false_alarms);
  }
  out.loss = loss_sum / static_cast<double>(total);
  return out;
}

}  // namespace

Tensor eval_scores(ModelBundle& mb, const Batch& batch) {
  Tensor input = batch.y_p;
  if (mb.uaen) {
    const Tensor alpha = mb.uaen->forward(mb.uaen_ps, batch.y_d, Mode::kEval, nullptr);
    input = concat_cols(alpha, batch.y_p);
  }
  return mb.audn.forward(mb.audn_ps, input, Mode::kEval, nullptr, nullptr);
}

std::vector<LossReport> train_end_to_end(
    ModelBundle& mb, const FrameSource& src, const RunConfig& cfg,
    const std::function<void(int, const ModelBundle&)>& on_period_end, int start_period) {
  const Variant variant = cfg.variant_enum();
  const bool train_uaen =
      mb.uaen != nullptr && variant != Variant::kFrozenUaen;
  const int n_periods = static_cast<int>(cfg.step2_periods.size());
  if (start_period < 0 || start_period > n_periods) {
    throw Error("config_invalid", "train: start period out of range");
  }
  const int64_t bsz = cfg.batch_size;
  const int64_t n_batches = (cfg.step2_train + bsz - 1) / bsz;
  const int n = cfg.n_users;
  const int64_t yp_width = 2LL * cfg.k_preamble;

  std::vector<LossReport> reports;
  int global_epoch = 0;
  for (int q = 0; q < start_period; ++q) global_epoch += cfg.step2_periods[static_cast<size_t>(q)];
  uint64_t steps_done = static_cast<uint64_t>(global_epoch) * static_cast<uint64_t>(n_batches);

  ParamStore best_pgn = mb.pgn_ps, best_uaen = mb.uaen_ps, best_audn = mb.audn_ps;
  double best_loss = std::numeric_limits<double>::infinity();
  bool have_best = false;

  for (int q = start_period; q < n_periods; ++q) {
    const double lr = cfg.step2_initial_lr / std::pow(10.0, static_cast<double>(q));
    for (int t = 0; t < cfg.step2_periods[static_cast<size_t>(q)]; ++t) {
      double loss_sum = 0.0;
      int64_t misses = 0, fas = 0, frames = 0;
      for (int64_t first = 0; first < cfg.step2_train; first += bsz) {
        const int64_t count = std::min(bsz, cfg.step2_train - first);
        const FrameBatch fb = src.make_frames(Split::kTrain2, first, count,
                                              static_cast<uint64_t>(global_epoch));
        // Preamble field: y_p = delta * P + noise, P the unit-norm bank rows.
        const Tensor rows = mb.pgn.normalized_rows(mb.pgn_ps);
        Tensor y_p = fb.noise_p;
        for (int64_t b = 0; b < count; ++b) {
          double* yp = y_p.data.data() + b * yp_width;
          const double* d = fb.delta.data.data() + b * n;
          for (int u = 0; u < n; ++u) {
            if (d[u] == 0.0) continue;
            const double* p = rows.data.data() + u * yp_width;
            for (int64_t k = 0; k < yp_width; ++k) yp[k] += p[k];
          }
        }

        LayerCache uaen_cache;
        Tensor input = y_p;
        if (mb.uaen) {
          const Tensor alpha =
              mb.uaen->forward(mb.uaen_ps, fb.y_d, train_uaen ? Mode::kTrain : Mode::kEval,
                               train_uaen ? &uaen_cache : nullptr);
          input = concat_cols(alpha, y_p);
        }

        Rng dropout_rng = Rng::derive(src.seed(), kStreamDropout, steps_done);
        LayerCache audn_cache;
        const Tensor scores =
            mb.audn.forward(mb.audn_ps, input, Mode::kTrain, &dropout_rng, &audn_cache);
        const double loss = bce_loss(fb.delta, scores);
        if (!std::isfinite(loss)) {
          throw Error("numeric", "train: non-finite loss in period " + std::to_string(q) +
                                     ", epoch " + std::to_string(t) + ", frame " +
                                     std::to_string(first));
        }
        const Tensor gin =
            mb.audn.backward(mb.audn_ps, audn_cache, bce_grad(fb.delta, scores));

        // Split the input gradient into the alpha and y_p parts.
        const int64_t in_width = gin.dim(1);
        const int64_t alpha_width = mb.uaen ? n : 0;
        if (train_uaen) {
          Tensor g_alpha = Tensor::zeros({count, alpha_width});
          for (int64_t b = 0; b < count; ++b) {
            std::copy_n(gin.data.data() + b * in_width, alpha_width,
                        g_alpha.data.data() + b * alpha_width);
          }
          mb.uaen->backward(mb.uaen_ps, uaen_cache, g_alpha);
        }
        Tensor g_rows = Tensor::zeros({n, yp_width});
        for (int64_t b = 0; b < count; ++b) {
          const double* gyp = gin.data.data() + b * in_width + alpha_width;
          const double* d = fb.delta.data.data() + b * n;
          for (int u = 0; u < n; ++u) {
            if (d[u] == 0.0) continue;
            double* gr = g_rows.data.data() + u * yp_width;
            for (int64_t k = 0; k < yp_width; ++k) gr[k] += gyp[k];
          }
        }
        mb.pgn.backward_rows(mb.pgn_ps, g_rows);

        maybe_adam_step(mb.pgn_ps, lr);
        if (train_uaen) maybe_adam_step(mb.uaen_ps, lr);
        maybe_adam_step(mb.audn_ps, lr);

        loss_sum += loss * static_cast<double>(count);
        count_confusion(scores, fb.delta, cfg.gamma, &misses, &fas);
        frames += count;
        ++steps_done;
      }
      reports.push_back({2, global_epoch, q, lr, "train",
                         loss_sum / static_cast<double>(frames),
                         static_cast<double>(misses + fas) /
                             static_cast<double>(frames * cfg.n_users)});

      const ChainStep val = evaluate_chain(mb, src, cfg, Split::kValidation, cfg.validation);
      reports.push_back({2, global_epoch, q, lr, "validation", val.loss,
                         static_cast<double>(val.misses + val.false_alarms) /
                             static_cast<double>(cfg.validation * cfg.n_users)});
      if (!have_best || val.loss < best_loss) {
        have_best = true;
        best_loss = val.loss;
        best_pgn = mb.pgn_ps;
        best_uaen = mb.uaen_ps;
        best_audn = mb.audn_ps;
      }
      ++global_epoch;
    }
    if (on_period_end) on_period_end(q, mb);
  }
  if (have_best) {
    mb.pgn_ps = std::move(best_pgn);
    mb.uaen_ps = std::move(best_uaen);
    mb.audn_ps = std::move(best_audn);
  }
  return reports;
}

std::string loss_report_csv(const std::vector<LossReport>& reports, uint64_t config_digest,
                            uint64_t seed) {
  std::string out = "# config_digest=" + std::to_string(config_digest) +
                    " seed=" + std::to_string(seed) + "\n";
  out += "epoch,step,period,lr,split,loss,ader\n";
  char buf[160];
  for (const LossReport& r : reports) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.10g,%s,%.10g,%.10g\n", r.epoch, r.step, r.period,
                  r.lr, r.split.c_str(), r.loss, r.ader);
    out += buf;
  }
  return out;
}

}  // namespace gfscma
