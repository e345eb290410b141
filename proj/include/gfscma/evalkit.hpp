/**
 * @file evalkit.hpp
 * @brief ADER accounting, experiment sweeps, and non-learned baselines.
 */
#pragma once

#include <string>
#include <vector>

#include "gfscma/training.hpp"

namespace gfscma {

struct AderReport {
  std::string scheme;
  double snr_db = 0.0;
  double p_bar = 0.0;
  int l_slots = 0;
  int64_t frames = 0;
  int64_t misses = 0;
  int64_t false_alarms = 0;
  double ader = 0.0;
  double std_err = 0.0;  // binomial standard error of the ADER estimate
  uint64_t seed = 0;
  std::string checkpoint_digest;
  std::string denominator = "all";  // "all": N*frames; "active": labeled alternative
};

/// Batch ADER with the all-potential-users denominator N * frames.
AderReport ader(const std::vector<ActivityVector>& decisions,
                const std::vector<ActivityVector>& truth);

struct SweepSpec {
  std::string axis;  // "snr" | "data_length" | "scheme"
  std::vector<double> values;        // snr grid or L values
  std::vector<std::string> schemes;  // for the scheme axis
  int64_t frames_per_point = 0;
  std::vector<std::string> checkpoints;  // one for snr, one per value otherwise
  double fixed_snr_db = 15.0;            // operating SNR for non-snr axes
};

/// Evaluates checkpoints over the spec's operating points in eval mode.
/// Deterministic: repeated calls produce identical reports and CSV bytes.
std::vector<AderReport> sweep(const SweepSpec& spec, const RunConfig& base_cfg, uint64_t seed);

std::string ader_csv(const std::vector<AderReport>& reports);

/// Matched-filter floor baseline: user n active iff |<y_p, p_n>| > gamma_corr.
ActivityVector correlation_baseline(const std::vector<cplx>& y_p,
                                    const std::vector<cplx>& preambles, int k_preamble,
                                    double gamma_corr);

/// Loads a checkpoint, rebuilds its models from the embedded config, and
/// verifies internal digest consistency. Used by sweep and the CLI.
struct LoadedModel {
  RunConfig cfg;
  ModelBundle mb;
  uint64_t seed = 0;
  std::string file_digest_hex;
};
LoadedModel load_model(const std::string& checkpoint_path);

/// Counts misses/false alarms of a model over `frames` test frames at a
/// fixed SNR; returns a filled report.
AderReport evaluate_point(LoadedModel& model, double snr_db, int64_t frames, uint64_t seed,
                          const std::string& scheme, const std::string& denominator);

}  // namespace gfscma
