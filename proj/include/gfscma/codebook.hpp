/**
 * @file codebook.hpp
 * @brief SCMA codebooks, round-robin assignment, bit-block encoding, CTU assembly.
 *
 * A codebook set holds J codebooks of M complex codewords spread over K_d
 * orthogonal resources. Codewords are sparse: with K_d = 4 each codebook
 * occupies exactly 2 resources, and with J = 6 the occupancy patterns are
 * the six distinct 2-of-4 combinations.
 */
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace gfscma {

using cplx = std::complex<double>;

/// Immutable after construction/load; safe for concurrent readers.
struct Codebook {
  int j_cbs = 0;     // J
  int m_order = 0;   // M, power of two
  int k_data = 0;    // K_d resources per codeword
  /// entries[(j*M + m)*K_d + k]; unit energy per codeword.
  std::vector<cplx> entries;
  /// factor_matrix[k*J + j] == 1 iff codebook j occupies resource k.
  std::vector<uint8_t> factor_matrix;

  const cplx* codeword(int j, int m) const {
    return entries.data() + (static_cast<size_t>(j) * m_order + m) * k_data;
  }

  int bits_per_block() const;
};

/// One user's bit block of length log2(M).
struct BitBlock {
  std::vector<uint8_t> bits;
};

/// A user's L encoded codewords (the data part of its CTU).
struct CtuPayload {
  int user_index = 0;
  int l_slots = 0;
  int k_data = 0;
  std::vector<cplx> codewords;  // row-major L x K_d

  const cplx* row(int l) const { return codewords.data() + static_cast<size_t>(l) * k_data; }
};

/// Round-robin codebook index for a user: user_index mod num_codebooks.
int assign_codebook(int user_index, int num_codebooks);

/// Built-in default set with J=6, M=4, K_d=4: QPSK symbols on the six
/// 2-of-4 occupancy patterns with a per-codebook phase rotation
/// exp(i*pi*j/J) on the second occupied resource, unit-energy normalized.
Codebook default_codebook();

/// Parses the line-oriented text format: header "J M Kd", then J*M lines of
/// 2*Kd decimal floats (re im pairs). '#' starts a comment. Validates all
/// codebook invariants; throws Error("config_invalid", ...) on violation.
Codebook load_codebook(const std::string& path);
Codebook parse_codebook(const std::string& text);

/// Serializes in the same text format with round-trip-exact float precision.
std::string format_codebook(const Codebook& cb);

/// Codeword for a bit block under codebook j (big-endian bit-to-index order).
std::vector<cplx> encode_block(const BitBlock& block, int codebook_index, const Codebook& cb);

/// Splits bit_stream into L blocks and encodes each with the user's codebook.
CtuPayload build_ctu(int user_index, const std::vector<uint8_t>& bit_stream, const Codebook& cb);

}  // namespace gfscma
