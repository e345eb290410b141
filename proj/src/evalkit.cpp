#include "gfscma/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gfscma/checkpoint.hpp"
#include "gfscma/error.hpp"

namespace gfscma {

AderReport ader(const std::vector<ActivityVector>& decisions,
                const std::vector<ActivityVector>& truth) {
  if (decisions.size() != truth.size() || decisions.empty()) {
    throw Error("numeric", "ader: decision/truth batch size mismatch or empty");
  }
  const size_t n = truth[0].delta.size();
  AderReport r;
  r.frames = static_cast<int64_t>(decisions.size());
  for (size_t f = 0; f < decisions.size(); ++f) {
    if (decisions[f].delta.size() != n || truth[f].delta.size() != n) {
      throw Error("numeric", "ader: activity vector length mismatch at frame " +
                                 std::to_string(f));
    }
    for (size_t u = 0; u < n; ++u) {
      const bool active = truth[f].delta[u] != 0;
      const bool decided = decisions[f].delta[u] != 0;
      if (active && !decided) ++r.misses;
      if (!active && decided) ++r.false_alarms;
    }
  }
  const double denom = static_cast<double>(n) * static_cast<double>(r.frames);
  r.ader = static_cast<double>(r.misses + r.false_alarms) / denom;
  r.std_err = std::sqrt(r.ader * (1.0 - r.ader) / denom);
  return r;
}

ActivityVector correlation_baseline(const std::vector<cplx>& y_p,
                                    const std::vector<cplx>& preambles, int k_preamble,
                                    double gamma_corr) {
  if (preambles.size() % static_cast<size_t>(k_preamble) != 0 ||
      y_p.size() != static_cast<size_t>(k_preamble)) {
    throw Error("numeric", "correlation_baseline: shape mismatch");
  }
  const size_t n = preambles.size() / static_cast<size_t>(k_preamble);
  ActivityVector out;
  out.delta.resize(n);
  for (size_t u = 0; u < n; ++u) {
    const cplx* p = preambles.data() + u * static_cast<size_t>(k_preamble);
    cplx acc(0.0, 0.0);
    for (int k = 0; k < k_preamble; ++k) {
      acc += y_p[static_cast<size_t>(k)] * std::conj(p[k]);
    }
    out.delta[u] = std::abs(acc) > gamma_corr ? 1 : 0;
  }
  return out;
}

LoadedModel load_model(const std::string& checkpoint_path) {
  CheckpointData data = load_checkpoint(checkpoint_path);
  auto cfg_it = data.meta.find("config");
  if (cfg_it == data.meta.end()) {
    throw Error("checkpoint_mismatch", checkpoint_path + ": no embedded config");
  }
  RunConfig cfg = parse_config_text(cfg_it->second);
  if (cfg.digest() != data.config_digest) {
    throw Error("checkpoint_mismatch",
                checkpoint_path + ": embedded config does not match stored digest");
  }
  uint64_t seed = 0;
  if (auto it = data.meta.find("seed"); it != data.meta.end()) {
    seed = std::stoull(it->second);
  }
  LoadedModel out{cfg, build_models(cfg, seed), seed, hex64(file_digest(checkpoint_path))};
  auto need = [&](const char* store) -> const ParamStore& {
    auto it = data.stores.find(store);
    if (it == data.stores.end()) {
      throw Error("checkpoint_mismatch",
                  checkpoint_path + ": missing store \"" + store + "\" (is this a full model?)");
    }
    return it->second;
  };
  copy_store_checked(out.mb.pgn_ps, need("pgn"), checkpoint_path + " pgn");
  if (out.mb.uaen) copy_store_checked(out.mb.uaen_ps, need("uaen"), checkpoint_path + " uaen");
  copy_store_checked(out.mb.audn_ps, need("audn"), checkpoint_path + " audn");
  return out;
}

AderReport evaluate_point(LoadedModel& model, double snr_db, int64_t frames, uint64_t seed,
                          const std::string& scheme, const std::string& denominator) {
  if (frames < 1) {
    throw Error("config_invalid", "evaluate_point: frame count must be >= 1");
  }
  const RunConfig& cfg = model.cfg;
  FrameSource src(cfg, codebook_for(cfg), seed);
  const int64_t bsz = cfg.batch_size;
  AderReport r;
  r.scheme = scheme;
  r.snr_db = snr_db;
  r.p_bar = cfg.p_bar;
  r.l_slots = cfg.l_slots;
  r.frames = frames;
  r.seed = seed;
  r.checkpoint_digest = model.file_digest_hex;
  r.denominator = denominator;
  int64_t active_entries = 0;
  for (int64_t first = 0; first < frames; first += bsz) {
    const int64_t count = std::min(bsz, frames - first);
    const Batch batch =
        make_batch(src, model.mb.pgn, model.mb.pgn_ps, Split::kTest, first, count, 0, snr_db);
    const Tensor scores = eval_scores(model.mb, batch);
    for (int64_t i = 0; i < scores.size(); ++i) {
      const bool active = batch.delta[i] != 0.0;
      const bool decided = scores[i] > cfg.gamma;
      if (active) ++active_entries;
      if (active && !decided) ++r.misses;
      if (!active && decided) ++r.false_alarms;
    }
  }
  const double denom = denominator == "active"
                           ? static_cast<double>(std::max<int64_t>(active_entries, 1))
                           : static_cast<double>(cfg.n_users) * static_cast<double>(frames);
  r.ader = static_cast<double>(r.misses + r.false_alarms) / denom;
  r.std_err = std::sqrt(r.ader * std::max(0.0, 1.0 - r.ader) / denom);
  return r;
}

std::vector<AderReport> sweep(const SweepSpec& spec, const RunConfig& base_cfg, uint64_t seed) {
  if (spec.frames_per_point < 1) {
    throw Error("config_invalid", "sweep: frames per point must be >= 1");
  }
  struct Point {
    std::string checkpoint;
    double snr_db;
    std::string scheme_hint;  // expected variant for the scheme axis
    int expected_l = 0;       // expected L for the data_length axis
  };
  std::vector<Point> points;
  if (spec.axis == "snr") {
    if (spec.values.empty()) throw Error("config_invalid", "sweep: empty SNR grid");
    if (spec.checkpoints.size() != 1) {
      throw Error("config_invalid", "sweep: the snr axis takes exactly one checkpoint");
    }
    for (double v : spec.values) points.push_back({spec.checkpoints[0], v, "", 0});
  } else if (spec.axis == "data_length") {
    if (spec.values.empty()) throw Error("config_invalid", "sweep: empty value list");
    if (spec.checkpoints.size() != spec.values.size()) {
      throw Error("config_invalid", "sweep: the data_length axis needs one checkpoint per value");
    }
    for (size_t i = 0; i < spec.values.size(); ++i) {
      points.push_back(
          {spec.checkpoints[i], spec.fixed_snr_db, "", static_cast<int>(spec.values[i])});
    }
  } else if (spec.axis == "scheme") {
    if (spec.schemes.empty()) throw Error("config_invalid", "sweep: empty scheme list");
    if (spec.checkpoints.size() != spec.schemes.size()) {
      throw Error("config_invalid", "sweep: the scheme axis needs one checkpoint per scheme");
    }
    for (size_t i = 0; i < spec.schemes.size(); ++i) {
      points.push_back({spec.checkpoints[i], spec.fixed_snr_db, spec.schemes[i], 0});
    }
  } else {
    throw Error("config_invalid", "sweep: unknown axis \"" + spec.axis + "\"");
  }

  std::vector<AderReport> reports;
  for (const Point& pt : points) {
    LoadedModel model = load_model(pt.checkpoint);
    if (model.cfg.n_users != base_cfg.n_users || model.cfg.k_preamble != base_cfg.k_preamble ||
        model.cfg.p_bar != base_cfg.p_bar) {
      throw Error("checkpoint_mismatch",
                  pt.checkpoint + ": system dimensions differ from the sweep config");
    }
    if (pt.expected_l > 0 && model.cfg.l_slots != pt.expected_l) {
      throw Error("checkpoint_mismatch", pt.checkpoint + ": trained for L=" +
                                             std::to_string(model.cfg.l_slots) +
                                             ", expected L=" + std::to_string(pt.expected_l));
    }
    if (!pt.scheme_hint.empty() && model.cfg.variant != pt.scheme_hint) {
      throw Error("checkpoint_mismatch", pt.checkpoint + ": trained variant \"" +
                                             model.cfg.variant + "\" does not match scheme \"" +
                                             pt.scheme_hint + "\"");
    }
    reports.push_back(evaluate_point(model, pt.snr_db, spec.frames_per_point, seed,
                                     model.cfg.variant, base_cfg.ader_denominator));
  }
  return reports;
}

std::string ader_csv(const std::vector<AderReport>& reports) {
  std::string out =
      "scheme,snr_db,p_bar,L,frames,misses,false_alarms,ader,stderr,seed,checkpoint_digest,"
      "denominator\n";
  char buf[256];
  for (const AderReport& r : reports) {
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%d,%lld,%lld,%lld,%.10g,%.10g,%llu,%s,%s\n",
                  r.scheme.c_str(), r.snr_db, r.p_bar, r.l_slots,
                  static_cast<long long>(r.frames), static_cast<long long>(r.misses),
                  static_cast<long long>(r.false_alarms), r.ader, r.std_err,
                  static_cast<unsigned long long>(r.seed), r.checkpoint_digest.c_str(),
                  r.denominator.c_str());
    out += buf;
  }
  return out;
}

}  // namespace gfscma
