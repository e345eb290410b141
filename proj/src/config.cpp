#include "gfscma/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "gfscma/checkpoint.hpp"
#include "gfscma/error.hpp"

namespace gfscma {

Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::kFull;
  if (s == "no-pretrain") return Variant::kNoPretrain;
  if (s == "frozen-uaen") return Variant::kFrozenUaen;
  if (s == "preamble-only") return Variant::kPreambleOnly;
  if (s == "fc-uaen") return Variant::kFcUaen;
  throw Error("config_invalid",
              "[model] variant must be one of full, no-pretrain, frozen-uaen, "
              "preamble-only, fc-uaen; got \"" +
                  s + "\"");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoPretrain: return "no-pretrain";
    case Variant::kFrozenUaen: return "frozen-uaen";
    case Variant::kPreambleOnly: return "preamble-only";
    case Variant::kFcUaen: return "fc-uaen";
  }
  return "?";
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt_double(v[i]);
  }
  return s;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct FieldSetter {
  std::function<void(const std::string& value, const std::string& where)> set;
};

int64_t parse_i64(const std::string& v, const std::string& where) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw Error("config_invalid", where + ": expected an integer, got \"" + v + "\"");
  }
}

double parse_f64(const std::string& v, const std::string& where) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    if (!std::isfinite(x)) throw std::invalid_argument("nonfinite");
    return x;
  } catch (const std::exception&) {
    throw Error("config_invalid", where + ": expected a number, got \"" + v + "\"");
  }
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(v);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;

  std::map<std::string, FieldSetter> fields;
  auto add_int = [&](const std::string& key, int* dst) {
    fields[key] = {[dst](const std::string& v, const std::string& w) {
      *dst = static_cast<int>(parse_i64(v, w));
    }};
  };
  auto add_i64 = [&](const std::string& key, int64_t* dst) {
    fields[key] = {[dst](const std::string& v, const std::string& w) { *dst = parse_i64(v, w); }};
  };
  auto add_f64 = [&](const std::string& key, double* dst) {
    fields[key] = {[dst](const std::string& v, const std::string& w) { *dst = parse_f64(v, w); }};
  };
  auto add_str = [&](const std::string& key, std::string* dst) {
    fields[key] = {[dst](const std::string& v, const std::string&) { *dst = v; }};
  };

  add_int("system.n_users", &cfg.n_users);
  add_int("system.j_codebooks", &cfg.j_codebooks);
  add_int("system.m_order", &cfg.m_order);
  add_int("system.k_preamble", &cfg.k_preamble);
  add_int("system.k_data", &cfg.k_data);
  add_int("system.l_slots", &cfg.l_slots);
  add_f64("system.p_bar", &cfg.p_bar);
  add_str("system.codebook_file", &cfg.codebook_file);

  add_f64("channel.snr_lo_db", &cfg.snr_lo_db);
  add_f64("channel.snr_hi_db", &cfg.snr_hi_db);
  add_str("channel.mode", &cfg.channel_mode);

  add_str("model.variant", &cfg.variant);
  add_int("model.n_kernel_1", &cfg.n_kernel_1);
  add_int("model.n_kernel_2", &cfg.n_kernel_2);
  add_int("model.l_h", &cfg.l_h);
  add_int("model.l_g", &cfg.l_g);
  add_f64("model.p_drop", &cfg.p_drop);
  add_f64("model.gamma", &cfg.gamma);
  add_int("model.fc_hidden_layers", &cfg.fc_hidden_layers);

  add_int("schedule.step1_epochs_hi", &cfg.step1_epochs_hi);
  add_int("schedule.step1_epochs_lo", &cfg.step1_epochs_lo);
  add_f64("schedule.step1_lr", &cfg.step1_lr);
  fields["schedule.step2_periods"] = {[&cfg](const std::string& v, const std::string& w) {
    cfg.step2_periods.clear();
    for (const std::string& tok : split_commas(v)) {
      cfg.step2_periods.push_back(static_cast<int>(parse_i64(tok, w)));
    }
  }};
  add_f64("schedule.step2_initial_lr", &cfg.step2_initial_lr);
  add_int("schedule.batch_size", &cfg.batch_size);

  add_i64("data.step1_train", &cfg.step1_train);
  add_i64("data.step2_train", &cfg.step2_train);
  add_i64("data.validation", &cfg.validation);
  add_i64("data.test", &cfg.test);

  fields["eval.test_snr_grid"] = {[&cfg](const std::string& v, const std::string& w) {
    cfg.test_snr_grid.clear();
    for (const std::string& tok : split_commas(v)) {
      cfg.test_snr_grid.push_back(parse_f64(tok, w));
    }
  }};
  add_i64("eval.frames_per_point", &cfg.frames_per_point);
  add_f64("eval.eval_snr_db", &cfg.eval_snr_db);
  add_str("eval.ader_denominator", &cfg.ader_denominator);

  fields["run.seed"] = {[&cfg](const std::string& v, const std::string& w) {
    try {
      size_t pos = 0;
      cfg.seed = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error("config_invalid", w + ": expected an unsigned integer, got \"" + v + "\"");
    }
  }};

  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error("config_invalid", "line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "system" && section != "channel" && section != "model" &&
          section != "schedule" && section != "data" && section != "eval" && section != "run") {
        throw Error("config_invalid",
                    "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("config_invalid", "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw Error("config_invalid",
                  "line " + std::to_string(line_no) + ": key \"" + key + "\" outside any section");
    }
    const std::string full_key = section + "." + key;
    auto it = fields.find(full_key);
    if (it == fields.end()) {
      throw Error("config_invalid",
                  "line " + std::to_string(line_no) + ": unknown key \"" + key + "\" in [" +
                      section + "]");
    }
    it->second.set(value, "[" + section + "] " + key);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("io", "cannot open config file: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error("config_invalid", msg); };
  if (n_users < 1) fail("[system] n_users must be >= 1");
  if (j_codebooks < 1) fail("[system] j_codebooks must be >= 1");
  if (m_order < 2 || (m_order & (m_order - 1)) != 0) {
    fail("[system] m_order must be a power of two >= 2");
  }
  if (k_preamble < 1) fail("[system] k_preamble must be >= 1");
  if (k_data < 1) fail("[system] k_data must be >= 1");
  if (l_slots < 1) fail("[system] l_slots must be >= 1");
  if (p_bar < 0.0 || p_bar > 1.0) fail("[system] p_bar must be in [0,1]");
  if (snr_lo_db > snr_hi_db) fail("[channel] snr_lo_db must not exceed snr_hi_db");
  if (channel_mode != "awgn" && channel_mode != "rayleigh") {
    fail("[channel] mode must be awgn or rayleigh");
  }
  variant_from_string(variant);  // throws with field message
  if (n_kernel_1 < 1) fail("[model] n_kernel_1 must be >= 1");
  if (n_kernel_2 < 1) fail("[model] n_kernel_2 must be >= 1");
  if (n_kernel_1 <= n_kernel_2) {
    fail("[model] n_kernel_1 (" + std::to_string(n_kernel_1) + ") must exceed n_kernel_2 (" +
         std::to_string(n_kernel_2) + ")");
  }
  if (l_h < 1) fail("[model] l_h must be >= 1");
  if (l_g < 1) fail("[model] l_g must be >= 1");
  if (p_drop < 0.0 || p_drop >= 1.0) fail("[model] p_drop must be in [0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("[model] gamma must be in (0,1)");
  if (fc_hidden_layers < 1) fail("[model] fc_hidden_layers must be >= 1");
  if (step1_epochs_hi < 0 || step1_epochs_lo < 0) {
    fail("[schedule] step1 epoch counts must be >= 0");
  }
  if (!(step1_lr > 0.0)) fail("[schedule] step1_lr must be > 0");
  if (step2_periods.empty()) fail("[schedule] step2_periods must be non-empty");
  for (int t : step2_periods) {
    if (t < 0) fail("[schedule] step2_periods entries must be >= 0");
  }
  if (!(step2_initial_lr > 0.0)) fail("[schedule] step2_initial_lr must be > 0");
  if (batch_size < 1) fail("[schedule] batch_size must be >= 1");
  if (step1_train < 0 || step2_train < 0 || validation < 1 || test < 1) {
    fail("[data] dataset sizes must be positive (step sizes may be 0)");
  }
  if (test_snr_grid.empty()) fail("[eval] test_snr_grid must be non-empty");
  if (frames_per_point < 1) fail("[eval] frames_per_point must be >= 1");
  if (ader_denominator != "all" && ader_denominator != "active") {
    fail("[eval] ader_denominator must be all or active");
  }
}

std::string RunConfig::canonical_string() const {
  std::string s;
  s += "[system]\n";
  s += "n_users = " + std::to_string(n_users) + "\n";
  s += "j_codebooks = " + std::to_string(j_codebooks) + "\n";
  s += "m_order = " + std::to_string(m_order) + "\n";
  s += "k_preamble = " + std::to_string(k_preamble) + "\n";
  s += "k_data = " + std::to_string(k_data) + "\n";
  s += "l_slots = " + std::to_string(l_slots) + "\n";
  s += "p_bar = " + fmt_double(p_bar) + "\n";
  s += "codebook_file = " + codebook_file + "\n";
  s += "[channel]\n";
  s += "snr_lo_db = " + fmt_double(snr_lo_db) + "\n";
  s += "snr_hi_db = " + fmt_double(snr_hi_db) + "\n";
  s += "mode = " + channel_mode + "\n";
  s += "[model]\n";
  s += "variant = " + variant + "\n";
  s += "n_kernel_1 = " + std::to_string(n_kernel_1) + "\n";
  s += "n_kernel_2 = " + std::to_string(n_kernel_2) + "\n";
  s += "l_h = " + std::to_string(l_h) + "\n";
  s += "l_g = " + std::to_string(l_g) + "\n";
  s += "p_drop = " + fmt_double(p_drop) + "\n";
  s += "gamma = " + fmt_double(gamma) + "\n";
  s += "fc_hidden_layers = " + std::to_string(fc_hidden_layers) + "\n";
  s += "[schedule]\n";
  s += "step1_epochs_hi = " + std::to_string(step1_epochs_hi) + "\n";
  s += "step1_epochs_lo = " + std::to_string(step1_epochs_lo) + "\n";
  s += "step1_lr = " + fmt_double(step1_lr) + "\n";
  s += "step2_periods = " + join_ints(step2_periods) + "\n";
  s += "step2_initial_lr = " + fmt_double(step2_initial_lr) + "\n";
  s += "batch_size = " + std::to_string(batch_size) + "\n";
  s += "[data]\n";
  s += "step1_train = " + std::to_string(step1_train) + "\n";
  s += "step2_train = " + std::to_string(step2_train) + "\n";
  s += "validation = " + std::to_string(validation) + "\n";
  s += "test = " + std::to_string(test) + "\n";
  s += "[eval]\n";
  s += "test_snr_grid = " + join_doubles(test_snr_grid) + "\n";
  s += "frames_per_point = " + std::to_string(frames_per_point) + "\n";
  s += "eval_snr_db = " + fmt_double(eval_snr_db) + "\n";
  s += "ader_denominator = " + ader_denominator + "\n";
  return s;
}

uint64_t RunConfig::digest() const { return fnv1a64(canonical_string()); }

UaenConfig RunConfig::uaen_config() const {
  UaenConfig u;
  u.n_kernel_1 = n_kernel_1;
  u.n_kernel_2 = n_kernel_2;
  u.l_hidden = l_h;
  u.l_slots = l_slots;
  u.n_users = n_users;
  u.k_data = k_data;
  u.fully_connected = (variant_enum() == Variant::kFcUaen);
  u.fc_hidden_layers = fc_hidden_layers;
  return u;
}

AudnConfig RunConfig::audn_config() const {
  AudnConfig a;
  a.l_hidden = l_g;
  a.n_users = n_users;
  a.k_preamble = k_preamble;
  a.p_drop = p_drop;
  a.preamble_only = (variant_enum() == Variant::kPreambleOnly);
  return a;
}

}  // namespace gfscma
