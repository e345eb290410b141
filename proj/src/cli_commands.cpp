#include "gfscma/cli_commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gfscma/checkpoint.hpp"
#include "gfscma/error.hpp"
#include "gfscma/evalkit.hpp"

namespace gfscma {

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create output directory " + dir + ": " + ec.message());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("io", "cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw Error("io", "short write: " + path);
}

std::string provenance(const RunConfig& cfg, uint64_t seed) {
  return "# config_digest=" + hex64(cfg.digest()) + " seed=" + std::to_string(seed) + "\n";
}

void write_echo(const std::string& out_dir, const RunConfig& cfg, uint64_t seed) {
  write_file(out_dir + "/config_echo.cfg", provenance(cfg, seed) + cfg.canonical_string());
}

CheckpointData bundle_checkpoint(const ModelBundle& mb, const RunConfig& cfg, uint64_t seed,
                                 const std::string& kind) {
  CheckpointData data;
  data.config_digest = cfg.digest();
  data.meta["config"] = cfg.canonical_string();
  data.meta["seed"] = std::to_string(seed);
  data.meta["kind"] = kind;
  data.meta["variant"] = cfg.variant;
  data.stores.emplace("pgn", mb.pgn_ps);
  if (mb.uaen) data.stores.emplace("uaen", mb.uaen_ps);
  data.stores.emplace("audn", mb.audn_ps);
  return data;
}

void check_system_compatible(const RunConfig& a, const RunConfig& b, const std::string& what) {
  auto fail = [&](const std::string& field) {
    throw Error("checkpoint_mismatch", what + ": checkpoint config differs in " + field);
  };
  if (a.n_users != b.n_users) fail("[system] n_users");
  if (a.j_codebooks != b.j_codebooks) fail("[system] j_codebooks");
  if (a.m_order != b.m_order) fail("[system] m_order");
  if (a.k_preamble != b.k_preamble) fail("[system] k_preamble");
  if (a.k_data != b.k_data) fail("[system] k_data");
  if (a.l_slots != b.l_slots) fail("[system] l_slots");
  if (a.p_bar != b.p_bar) fail("[system] p_bar");
  if (a.codebook_file != b.codebook_file) fail("[system] codebook_file");
  if (a.snr_lo_db != b.snr_lo_db || a.snr_hi_db != b.snr_hi_db) fail("[channel] snr range");
  if (a.channel_mode != b.channel_mode) fail("[channel] mode");
}

RunConfig embedded_config(const CheckpointData& data, const std::string& path) {
  auto it = data.meta.find("config");
  if (it == data.meta.end()) {
    throw Error("checkpoint_mismatch", path + ": no embedded config");
  }
  RunConfig cfg = parse_config_text(it->second);
  if (cfg.digest() != data.config_digest) {
    throw Error("checkpoint_mismatch", path + ": embedded config does not match stored digest");
  }
  return cfg;
}

}  // namespace

ResolvedRun resolve_run(const CommonOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
  cfg.validate();
  if (opts.workers < 1) throw Error("usage", "--workers must be >= 1");
  return {cfg, opts.seed ? *opts.seed : cfg.seed};
}

void cmd_pretrain(const CommonOptions& opts) {
  auto [cfg, seed] = resolve_run(opts);
  ensure_dir(opts.out_dir);
  const Codebook cb = codebook_for(cfg);
  FrameSource src(cfg, cb, seed);
  ModelBundle mb = build_models(cfg, seed);
  const auto reports = pretrain_uaen(mb, src, cfg);

  const std::string ckpt_path = opts.out_dir + "/checkpoint_step1.ckpt";
  CheckpointData data;
  data.config_digest = cfg.digest();
  data.meta["config"] = cfg.canonical_string();
  data.meta["seed"] = std::to_string(seed);
  data.meta["kind"] = "pretrain";
  data.meta["variant"] = cfg.variant;
  data.stores.emplace("uaen", mb.uaen_ps);
  save_checkpoint(ckpt_path, data);
  write_file(opts.out_dir + "/pretrain_log.csv", loss_report_csv(reports, cfg.digest(), seed));
  write_echo(opts.out_dir, cfg, seed);
  std::cout << "pretrain complete: " << ckpt_path << " digest=" << hex64(file_digest(ckpt_path))
            << "\n";
}

void cmd_train(const CommonOptions& opts, const std::string& checkpoint) {
  auto [cfg, seed] = resolve_run(opts);
  ensure_dir(opts.out_dir);
  const Codebook cb = codebook_for(cfg);
  FrameSource src(cfg, cb, seed);
  ModelBundle mb = build_models(cfg, seed);
  const Variant variant = cfg.variant_enum();
  int start_period = 0;

  if (!checkpoint.empty()) {
    if (variant == Variant::kPreambleOnly || variant == Variant::kNoPretrain) {
      std::cerr << "warning: variant " << cfg.variant << " ignores checkpoint " << checkpoint
                << "\n";
    } else {
      const CheckpointData data = load_checkpoint(checkpoint);
      const auto kind_it = data.meta.find("kind");
      const std::string kind = kind_it == data.meta.end() ? "" : kind_it->second;
      const RunConfig ck_cfg = embedded_config(data, checkpoint);
      if (kind == "pretrain") {
        check_system_compatible(cfg, ck_cfg, checkpoint);
        copy_store_checked(mb.uaen_ps, data.stores.at("uaen"), checkpoint + " uaen");
      } else if (kind == "period") {
        if (ck_cfg.digest() != cfg.digest()) {
          throw Error("checkpoint_mismatch",
                      checkpoint + ": config digest mismatch; resume requires an identical config");
        }
        if (data.meta.at("seed") != std::to_string(seed)) {
          throw Error("checkpoint_mismatch",
                      checkpoint + ": seed mismatch; resume requires the original seed");
        }
        copy_store_checked(mb.pgn_ps, data.stores.at("pgn"), checkpoint + " pgn");
        if (mb.uaen) copy_store_checked(mb.uaen_ps, data.stores.at("uaen"), checkpoint + " uaen");
        copy_store_checked(mb.audn_ps, data.stores.at("audn"), checkpoint + " audn");
        start_period = std::stoi(data.meta.at("periods_done"));
      } else {
        throw Error("checkpoint_mismatch",
                    checkpoint + ": kind \"" + kind +
                        "\" cannot seed training (expected pretrain or period)");
      }
    }
  } else if (variant == Variant::kFrozenUaen) {
    std::cerr << "warning: frozen-uaen without a pre-trained checkpoint freezes random "
                 "initialization\n";
  }

  const RunConfig cfg_copy = cfg;  // for capture
  const uint64_t seed_copy = seed;
  const std::string out_dir = opts.out_dir;
  const auto reports = train_end_to_end(
      mb, src, cfg,
      [&cfg_copy, seed_copy, &out_dir](int period, const ModelBundle& state) {
        CheckpointData data = bundle_checkpoint(state, cfg_copy, seed_copy, "period");
        data.meta["periods_done"] = std::to_string(period + 1);
        save_checkpoint(out_dir + "/checkpoint_period" + std::to_string(period + 1) + ".ckpt",
                        data);
      },
      start_period);

  const std::string final_path = opts.out_dir + "/checkpoint_final.ckpt";
  save_checkpoint(final_path, bundle_checkpoint(mb, cfg, seed, "final"));
  write_file(opts.out_dir + "/train_log.csv", loss_report_csv(reports, cfg.digest(), seed));
  write_echo(opts.out_dir, cfg, seed);
  std::cout << "train complete: " << final_path << " digest=" << hex64(file_digest(final_path))
            << "\n";
}

void cmd_sweep(const CommonOptions& opts, const std::string& axis,
               const std::vector<std::string>& values,
               const std::vector<std::string>& checkpoints,
               std::optional<int64_t> frames_override, std::optional<double> snr_override) {
  auto [cfg, seed] = resolve_run(opts);
  ensure_dir(opts.out_dir);
  if (checkpoints.empty()) {
    throw Error("config_invalid", "sweep: no checkpoints given");
  }
  SweepSpec spec;
  spec.axis = axis;
  spec.checkpoints = checkpoints;
  spec.frames_per_point = frames_override.value_or(cfg.frames_per_point);
  spec.fixed_snr_db = snr_override.value_or(cfg.eval_snr_db);
  if (axis == "scheme") {
    spec.schemes = values;
  } else {
    for (const std::string& v : values) {
      try {
        size_t pos = 0;
        spec.values.push_back(std::stod(v, &pos));
        if (pos != v.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error("usage", "sweep: bad numeric value \"" + v + "\"");
      }
    }
    if (axis == "snr" && spec.values.empty()) spec.values = cfg.test_snr_grid;
  }
  const auto reports = sweep(spec, cfg, seed);
  const std::string path = opts.out_dir + "/sweep_" + axis + ".csv";
  write_file(path, provenance(cfg, seed) + ader_csv(reports));
  write_echo(opts.out_dir, cfg, seed);
  std::cout << "sweep complete: " << path << " (" << reports.size() << " points)\n";
}

std::string model_summary_text(const RunConfig& cfg, uint64_t seed) {
  const ModelBundle mb = build_models(cfg, seed);
  std::string s = "# model summary\n" + provenance(cfg, seed);
  s += "variant: " + cfg.variant + "\n";
  s += "n_users=" + std::to_string(cfg.n_users) + " j_codebooks=" +
       std::to_string(cfg.j_codebooks) + " m_order=" + std::to_string(cfg.m_order) +
       " k_preamble=" + std::to_string(cfg.k_preamble) + " k_data=" + std::to_string(cfg.k_data) +
       " l_slots=" + std::to_string(cfg.l_slots) + "\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "p_bar=%g gamma=%g batch_size=%d\n", cfg.p_bar, cfg.gamma,
                cfg.batch_size);
  s += buf;
  s += "n_kernel_1=" + std::to_string(cfg.n_kernel_1) + " n_kernel_2=" +
       std::to_string(cfg.n_kernel_2) + " l_h=" + std::to_string(cfg.l_h) + " l_g=" +
       std::to_string(cfg.l_g);
  std::snprintf(buf, sizeof(buf), " p_drop=%g\n", cfg.p_drop);
  s += buf;
  std::snprintf(buf, sizeof(buf),
                "step1_epochs=(%d,%d) step1_lr=%g step2_initial_lr=%g step2_periods=",
                cfg.step1_epochs_hi, cfg.step1_epochs_lo, cfg.step1_lr, cfg.step2_initial_lr);
  s += buf;
  for (size_t i = 0; i < cfg.step2_periods.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(cfg.step2_periods[i]);
  }
  s += "\n[pgn]\n  direction bank: " + std::to_string(cfg.n_users) + " x " +
       std::to_string(2 * cfg.k_preamble) + "\n";
  s += "pgn_params: " + std::to_string(mb.pgn.param_count()) + "\n";
  if (mb.uaen) {
    s += "[uaen]\n";
    const Sequential& useq = mb.uaen->pipeline();
    for (size_t i = 0; i < useq.size(); ++i) s += "  " + useq.layer(i).describe() + "\n";
    s += "uaen_params: " + std::to_string(mb.uaen->param_count()) + "\n";
  }
  s += "[audn]\n";
  const Sequential& aseq = mb.audn.pipeline();
  for (size_t i = 0; i < aseq.size(); ++i) s += "  " + aseq.layer(i).describe() + "\n";
  s += "audn_params: " + std::to_string(mb.audn.param_count()) + "\n";
  if (mb.uaen) {
    std::snprintf(buf, sizeof(buf), "uaen_to_audn_param_ratio_percent: %.4f\n",
                  100.0 * static_cast<double>(mb.uaen->param_count()) /
                      static_cast<double>(mb.audn.param_count()));
    s += buf;
  }
  return s;
}

void cmd_dump(const CommonOptions& opts, const std::string& what, const std::string& checkpoint) {
  if (what == "codebook") {
    auto [cfg, seed] = resolve_run(opts);
    std::cout << provenance(cfg, seed) << format_codebook(codebook_for(cfg));
    return;
  }
  if (what == "preambles") {
    if (checkpoint.empty()) throw Error("usage", "dump preambles requires --checkpoint");
    LoadedModel model = load_model(checkpoint);
    const Tensor rows = model.mb.pgn.normalized_rows(model.mb.pgn_ps);
    const CrossCorrStats stats = preamble_cross_correlation(rows);
    std::cout << provenance(model.cfg, model.seed);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "# n_users=%d k_preamble=%d\n", model.cfg.n_users,
                  model.cfg.k_preamble);
    std::cout << buf;
    std::snprintf(buf, sizeof(buf), "# max_offdiag_abs_corr=%.10g mean_offdiag_abs_corr=%.10g\n",
                  stats.max_abs, stats.mean_abs);
    std::cout << buf;
    for (int64_t r = 0; r < rows.dim(0); ++r) {
      for (int64_t c = 0; c < rows.dim(1); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", rows.at2(r, c));
        std::cout << buf << (c + 1 == rows.dim(1) ? "\n" : " ");
      }
    }
    return;
  }
  if (what == "model-summary") {
    if (!checkpoint.empty()) {
      LoadedModel model = load_model(checkpoint);
      std::cout << model_summary_text(model.cfg, model.seed);
    } else {
      auto [cfg, seed] = resolve_run(opts);
      std::cout << model_summary_text(cfg, seed);
    }
    return;
  }
  throw Error("usage", "dump: unknown artifact \"" + what +
                           "\" (expected codebook, preambles, or model-summary)");
}

}  // namespace gfscma
