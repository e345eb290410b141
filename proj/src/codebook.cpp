#include "gfscma/codebook.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gfscma/error.hpp"

namespace gfscma {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

int log2_int(int x) {
  int n = 0;
  while ((1 << n) < x) ++n;
  return n;
}

double codeword_energy(const cplx* cw, int k_data) {
  double e = 0.0;
  for (int k = 0; k < k_data; ++k) e += std::norm(cw[k]);
  return e;
}

/// Derives the factor matrix from nonzero structure and checks sparsity.
void validate(Codebook& cb, double energy_tol) {
  const int J = cb.j_cbs, M = cb.m_order, Kd = cb.k_data;
  if (J < 1 || M < 1 || Kd < 1) {
    throw Error("config_invalid", "codebook dimensions must be positive");
  }
  if (!is_power_of_two(M)) {
    throw Error("config_invalid", "codebook M must be a power of two, got " + std::to_string(M));
  }
  cb.factor_matrix.assign(static_cast<size_t>(Kd) * J, 0);
  for (int j = 0; j < J; ++j) {
    int occupied = 0;
    for (int k = 0; k < Kd; ++k) {
      bool nonzero = false;
      for (int m = 0; m < M; ++m) {
        const cplx v = cb.codeword(j, m)[k];
        if (v.real() != 0.0 || v.imag() != 0.0) nonzero = true;
      }
      if (nonzero) {
        cb.factor_matrix[static_cast<size_t>(k) * J + j] = 1;
        ++occupied;
      }
    }
    if (Kd == 4 && occupied != 2) {
      throw Error("config_invalid", "codebook " + std::to_string(j) + " occupies " +
                                        std::to_string(occupied) + " of 4 resources, expected 2");
    }
    for (int m = 0; m < M; ++m) {
      const double e = codeword_energy(cb.codeword(j, m), Kd);
      if (std::abs(e - 1.0) > energy_tol) {
        throw Error("config_invalid", "codeword (j=" + std::to_string(j) + ", m=" +
                                          std::to_string(m) + ") energy " + std::to_string(e) +
                                          " violates unit-energy invariant");
      }
    }
  }
  if (cb.j_cbs == 6 && Kd == 4) {
    for (int a = 0; a < J; ++a) {
      for (int b = a + 1; b < J; ++b) {
        bool same = true;
        for (int k = 0; k < Kd; ++k) {
          if (cb.factor_matrix[static_cast<size_t>(k) * J + a] !=
              cb.factor_matrix[static_cast<size_t>(k) * J + b]) {
            same = false;
            break;
          }
        }
        if (same) {
          throw Error("config_invalid", "codebooks " + std::to_string(a) + " and " +
                                            std::to_string(b) + " share an occupancy pattern");
        }
      }
    }
  }
}

}  // namespace

int Codebook::bits_per_block() const { return log2_int(m_order); }

int assign_codebook(int user_index, int num_codebooks) {
  if (user_index < 0) {
    throw Error("config_invalid", "assign_codebook: negative user_index");
  }
  if (num_codebooks < 1) {
    throw Error("config_invalid", "assign_codebook: num_codebooks must be >= 1");
  }
  return user_index % num_codebooks;
}

Codebook default_codebook() {
  Codebook cb;
  cb.j_cbs = 6;
  cb.m_order = 4;
  cb.k_data = 4;
  cb.entries.assign(static_cast<size_t>(6) * 4 * 4, cplx(0.0, 0.0));
  static const int patterns[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < 6; ++j) {
    const cplx rot = std::polar(1.0, kPi * j / 6.0);
    for (int m = 0; m < 4; ++m) {
      const cplx sym = std::polar(1.0, kPi / 4.0 + kPi * m / 2.0);  // QPSK
      cplx* cw = cb.entries.data() + (static_cast<size_t>(j) * 4 + m) * 4;
      cw[patterns[j][0]] = sym * inv_sqrt2;
      cw[patterns[j][1]] = sym * rot * inv_sqrt2;
    }
  }
  validate(cb, 1e-12);
  return cb;
}

Codebook parse_codebook(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  int J = 0, M = 0, Kd = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    if (!have_header) {
      if (!(fields >> J >> M >> Kd)) continue;  // blank/comment line before header
      std::string extra;
      if (fields >> extra) {
        throw Error("config_invalid", "codebook header line has trailing fields");
      }
      have_header = true;
      continue;
    }
    std::vector<double> vals;
    double v = 0.0;
    while (fields >> v) vals.push_back(v);
    if (vals.empty()) continue;
    if (static_cast<int>(vals.size()) != 2 * Kd) {
      throw Error("config_invalid", "codebook line " + std::to_string(line_no) + " has " +
                                        std::to_string(vals.size()) + " fields, expected " +
                                        std::to_string(2 * Kd));
    }
    for (double x : vals) {
      if (!std::isfinite(x)) {
        throw Error("config_invalid",
                    "codebook line " + std::to_string(line_no) + " has a non-finite value");
      }
    }
    rows.push_back(std::move(vals));
  }
  if (!have_header) {
    throw Error("config_invalid", "codebook file is missing the \"J M Kd\" header");
  }
  if (static_cast<int>(rows.size()) != J * M) {
    throw Error("config_invalid", "codebook has " + std::to_string(rows.size()) +
                                      " codeword lines, expected " + std::to_string(J * M));
  }
  Codebook cb;
  cb.j_cbs = J;
  cb.m_order = M;
  cb.k_data = Kd;
  cb.entries.resize(rows.size() * static_cast<size_t>(Kd));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int k = 0; k < Kd; ++k) {
      cb.entries[r * Kd + k] = cplx(rows[r][2 * k], rows[r][2 * k + 1]);
    }
  }
  validate(cb, 1e-9);
  return cb;
}

Codebook load_codebook(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw Error("io", "cannot open codebook file: " + path);
  }
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_codebook(buf.str());
}

std::string format_codebook(const Codebook& cb) {
  std::string out = "# SCMA codebook set: J codebooks of M codewords over Kd resources\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d %d %d\n", cb.j_cbs, cb.m_order, cb.k_data);
  out += buf;
  for (int j = 0; j < cb.j_cbs; ++j) {
    for (int m = 0; m < cb.m_order; ++m) {
      const cplx* cw = cb.codeword(j, m);
      for (int k = 0; k < cb.k_data; ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g", cw[k].real(), cw[k].imag());
        out += buf;
        out += (k + 1 == cb.k_data) ? "\n" : " ";
      }
    }
  }
  return out;
}

std::vector<cplx> encode_block(const BitBlock& block, int codebook_index, const Codebook& cb) {
  if (codebook_index < 0 || codebook_index >= cb.j_cbs) {
    throw Error("config_invalid", "encode_block: codebook index out of range");
  }
  if (static_cast<int>(block.bits.size()) != cb.bits_per_block()) {
    throw Error("config_invalid", "encode_block: bit block length " +
                                      std::to_string(block.bits.size()) + ", expected " +
                                      std::to_string(cb.bits_per_block()));
  }
  int m = 0;  // big-endian: bits[0] is the MSB
  for (uint8_t b : block.bits) m = (m << 1) | (b ? 1 : 0);
  const cplx* cw = cb.codeword(codebook_index, m);
  return std::vector<cplx>(cw, cw + cb.k_data);
}

CtuPayload build_ctu(int user_index, const std::vector<uint8_t>& bit_stream, const Codebook& cb) {
  const int bpb = cb.bits_per_block();
  if (bit_stream.empty() || bit_stream.size() % static_cast<size_t>(bpb) != 0) {
    throw Error("config_invalid", "build_ctu: bit stream length " +
                                      std::to_string(bit_stream.size()) +
                                      " is not a positive multiple of " + std::to_string(bpb));
  }
  const int j = assign_codebook(user_index, cb.j_cbs);
  CtuPayload ctu;
  ctu.user_index = user_index;
  ctu.k_data = cb.k_data;
  ctu.l_slots = static_cast<int>(bit_stream.size()) / bpb;
  ctu.codewords.reserve(static_cast<size_t>(ctu.l_slots) * cb.k_data);
  BitBlock block;
  for (int l = 0; l < ctu.l_slots; ++l) {
    block.bits.assign(bit_stream.begin() + static_cast<long>(l) * bpb,
                      bit_stream.begin() + static_cast<long>(l + 1) * bpb);
    const auto cw = encode_block(block, j, cb);
    ctu.codewords.insert(ctu.codewords.end(), cw.begin(), cw.end());
  }
  return ctu;
}

}  // namespace gfscma
