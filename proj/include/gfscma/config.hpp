/**
 * @file config.hpp
 * @brief Run configuration: parsing, validation, canonical form, digest.
 *
 * Format: line-oriented `key = value` pairs grouped under bracketed section
 * headers, '#' comments. Unknown sections or keys are hard errors. Defaults
 * reproduce the paper-scale setup; see configs/ for shipped profiles.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfscma/models.hpp"

namespace gfscma {

enum class Variant { kFull, kNoPretrain, kFrozenUaen, kPreambleOnly, kFcUaen };

Variant variant_from_string(const std::string& s);
std::string variant_name(Variant v);

struct RunConfig {
  // [system]
  int n_users = 64;
  int j_codebooks = 6;
  int m_order = 4;
  int k_preamble = 16;
  int k_data = 4;
  int l_slots = 16;
  double p_bar = 0.05;
  std::string codebook_file;  // empty -> built-in default set

  // [channel]
  double snr_lo_db = 15.0;
  double snr_hi_db = 20.0;
  std::string channel_mode = "awgn";

  // [model]
  std::string variant = "full";
  int n_kernel_1 = 256;
  int n_kernel_2 = 32;
  int l_h = 3;
  int l_g = 10;
  double p_drop = 0.1;
  double gamma = 0.4;
  int fc_hidden_layers = 6;

  // [schedule]
  int step1_epochs_hi = 15;   // T1^(1) at lr eta
  int step1_epochs_lo = 10;   // T2^(1) at lr eta/10
  double step1_lr = 0.01;     // eta
  std::vector<int> step2_periods = {10, 10, 10, 10};  // {T_n^(2)}, Q entries
  double step2_initial_lr = 0.01;                     // eta_0
  int batch_size = 20;

  // [data]
  int64_t step1_train = 250000;
  int64_t step2_train = 480000;
  int64_t validation = 60000;
  int64_t test = 60000;

  // [eval]
  std::vector<double> test_snr_grid = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  int64_t frames_per_point = 60000;
  double eval_snr_db = 15.0;
  std::string ader_denominator = "all";  // or "active"

  // [run]
  uint64_t seed = 1;

  void validate() const;
  /// Fixed-order serialization of every field; digest input and echo format.
  std::string canonical_string() const;
  uint64_t digest() const;

  Variant variant_enum() const { return variant_from_string(variant); }
  UaenConfig uaen_config() const;
  AudnConfig audn_config() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace gfscma
