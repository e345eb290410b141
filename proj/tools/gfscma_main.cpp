/**
 * @file gfscma_main.cpp
 * @brief CLI entry point: pretrain, train, sweep, dump.
 */
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gfscma/cli_commands.hpp"
#include "gfscma/error.hpp"

namespace {

void add_common(CLI::App* cmd, gfscma::CommonOptions* opts, std::optional<uint64_t>* seed) {
  cmd->add_option("--config", opts->config_path, "Config file (defaults when omitted)");
  cmd->add_option("--seed", *seed, "Seed override (wins over [run] seed)");
  cmd->add_option("--out", opts->out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--workers", opts->workers, "Worker count (1 = bit-reproducible)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grant-free SCMA link simulator with autoencoder-based active user detection"};
  app.require_subcommand(1);

  gfscma::CommonOptions opts;
  std::optional<uint64_t> seed;
  std::string checkpoint;
  std::string axis = "snr";
  std::vector<std::string> values;
  std::vector<std::string> checkpoints;
  std::optional<int64_t> frames;
  std::optional<double> snr;
  std::string what;

  CLI::App* pretrain = app.add_subcommand("pretrain", "Step-1 self-supervised UAEN training");
  add_common(pretrain, &opts, &seed);

  CLI::App* train = app.add_subcommand("train", "Step-2 end-to-end training");
  add_common(train, &opts, &seed);
  train->add_option("--checkpoint", checkpoint,
                    "Step-1 checkpoint to initialize the UAEN, or a period checkpoint to resume");

  CLI::App* sweep = app.add_subcommand("sweep", "Evaluate checkpoints over an experiment axis");
  add_common(sweep, &opts, &seed);
  sweep->add_option("--axis", axis, "snr | data_length | scheme")->capture_default_str();
  sweep->add_option("--values", values,
                    "Axis values (SNR grid, L values, or scheme names); comma separated")
      ->delimiter(',');
  sweep->add_option("--checkpoint", checkpoints,
                    "Checkpoint file(s); one for snr, one per value otherwise");
  sweep->add_option("--frames", frames, "Frames per operating point");
  sweep->add_option("--snr", snr, "Fixed SNR (dB) for non-snr axes");

  CLI::App* dump = app.add_subcommand("dump", "Print a text artifact to stdout");
  add_common(dump, &opts, &seed);
  dump->add_option("--what", what, "codebook | preambles | model-summary")->required();
  dump->add_option("--checkpoint", checkpoint, "Model checkpoint (required for preambles)");

  CLI11_PARSE(app, argc, argv);
  opts.seed = seed;

  try {
    if (pretrain->parsed()) {
      gfscma::cmd_pretrain(opts);
    } else if (train->parsed()) {
      gfscma::cmd_train(opts, checkpoint);
    } else if (sweep->parsed()) {
      gfscma::cmd_sweep(opts, axis, values, checkpoints, frames, snr);
    } else if (dump->parsed()) {
      gfscma::cmd_dump(opts, what, checkpoint);
    }
  } catch (const gfscma::Error& e) {
    std::cerr << e.one_line() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
