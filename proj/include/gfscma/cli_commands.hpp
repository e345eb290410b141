/**
 * @file cli_commands.hpp
 * @brief Implementations behind the CLI subcommands.
 *
 * Commands throw Error on failure; the CLI entry point maps that to a
 * one-line `error: <category>: <message>` on stderr and a nonzero exit.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfscma/config.hpp"

namespace gfscma {

struct CommonOptions {
  std::string config_path;       // empty -> built-in defaults
  std::optional<uint64_t> seed;  // overrides [run] seed
  std::string out_dir = "out";
  int workers = 1;
};

/// Resolves config + seed from options (CLI seed wins over [run] seed).
struct ResolvedRun {
  RunConfig cfg;
  uint64_t seed = 0;
};
ResolvedRun resolve_run(const CommonOptions& opts);

/// Step-1 pre-training; writes checkpoint_step1.ckpt, pretrain_log.csv,
/// and config_echo.cfg under out_dir.
void cmd_pretrain(const CommonOptions& opts);

/// Step-2 end-to-end training. `checkpoint` may be empty, a step-1
/// checkpoint (initializes theta^(h)), or a period checkpoint (resumes).
/// Writes checkpoint_period<i>.ckpt per period and checkpoint_final.ckpt.
void cmd_train(const CommonOptions& opts, const std::string& checkpoint);

/// Evaluation sweep; writes sweep_<axis>.csv under out_dir.
void cmd_sweep(const CommonOptions& opts, const std::string& axis,
               const std::vector<std::string>& values,
               const std::vector<std::string>& checkpoints,
               std::optional<int64_t> frames_override, std::optional<double> snr_override);

/// Text artifacts on stdout: codebook | preambles | model-summary.
void cmd_dump(const CommonOptions& opts, const std::string& what, const std::string& checkpoint);

/// Model summary text (layer table, parameter counts, count ratio).
std::string model_summary_text(const RunConfig& cfg, uint64_t seed);

}  // namespace gfscma
