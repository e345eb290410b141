#include <complex>
#include <set>

#include "gfscma/codebook.hpp"
#include "gfscma/error.hpp"
#include "gfscma/rng.hpp"
#include "test_util.hpp"

using namespace gfscma;
using testutil::run_test;

namespace {

void test_assign_codebook() {
  CHECK(assign_codebook(0, 6) == 0);
  CHECK(assign_codebook(7, 6) == 1);
  CHECK(assign_codebook(63, 6) == 3);
  CHECK_THROWS(assign_codebook(-1, 6), "negative");
  CHECK_THROWS(assign_codebook(0, 0), "num_codebooks");
  // period-J reuse
  for (int k = 0; k < 100; ++k) {
    CHECK_MSG(assign_codebook(k, 6) == assign_codebook(k + 6, 6), "period-J reuse at k");
  }
}

void test_default_codebook() {
  const Codebook cb = default_codebook();
  CHECK(cb.j_cbs == 6);
  CHECK(cb.m_order == 4);
  CHECK(cb.k_data == 4);
  // unit energy per codeword
  for (int j = 0; j < 6; ++j) {
    for (int m = 0; m < 4; ++m) {
      double e = 0.0;
      for (int k = 0; k < 4; ++k) e += std::norm(cb.codeword(j, m)[k]);
      CHECK_NEAR(e, 1.0, 1e-12);
    }
  }
  // exactly 2 of 4 resources per codebook, all six patterns distinct
  std::set<std::vector<uint8_t>> patterns;
  for (int j = 0; j < 6; ++j) {
    std::vector<uint8_t> col;
    int occ = 0;
    for (int k = 0; k < 4; ++k) {
      col.push_back(cb.factor_matrix[static_cast<size_t>(k) * 6 + j]);
      occ += col.back();
    }
    CHECK(occ == 2);
    patterns.insert(col);
  }
  CHECK(patterns.size() == 6);
  // codewords vanish off their factor-matrix support
  for (int j = 0; j < 6; ++j) {
    for (int m = 0; m < 4; ++m) {
      for (int k = 0; k < 4; ++k) {
        if (!cb.factor_matrix[static_cast<size_t>(k) * 6 + j]) {
          CHECK(cb.codeword(j, m)[k] == cplx(0.0, 0.0));
        }
      }
    }
  }
}

void test_codebook_round_trip() {
  const Codebook cb = default_codebook();
  const std::string text = format_codebook(cb);
  const Codebook back = parse_codebook(text);
  CHECK(back.j_cbs == cb.j_cbs && back.m_order == cb.m_order && back.k_data == cb.k_data);
  CHECK(back.entries == cb.entries);  // bit-for-bit through the text format
  CHECK(back.factor_matrix == cb.factor_matrix);
}

void test_codebook_errors() {
  // energy violation: scale one codeword to energy 2
  Codebook bad = default_codebook();
  for (int k = 0; k < 4; ++k) bad.entries[k] *= std::sqrt(2.0);
  CHECK_THROWS(parse_codebook(format_codebook(bad)), "energy");

  CHECK_THROWS(parse_codebook("garbage header\n"), "header");
  CHECK_THROWS(parse_codebook("2 4 4\n1 0 0 0 0 0 0 0\n"), "codeword lines");
  // wrong field count on a codeword line
  CHECK_THROWS(parse_codebook("1 2 4\n1 0 0 0\n0 1 0 0 0 0 0 0\n"), "fields");
  // occupancy violation: 3 of 4 resources used
  std::string text = "1 2 4\n";
  text += "0.57735 0 0.57735 0 0.57735 0 0 0\n";
  text += "0.57735 0 0.57735 0 0 0 0.57735 0\n";
  CHECK_THROWS(parse_codebook(text), "occupies");
  CHECK_THROWS(load_codebook("/nonexistent/path/cb.txt"), "cannot open");
}

void test_encode_block() {
  const Codebook cb = default_codebook();
  BitBlock b00{{0, 0}}, b11{{1, 1}};
  const auto w00 = encode_block(b00, 0, cb);
  CHECK(std::equal(w00.begin(), w00.end(), cb.codeword(0, 0)));
  const auto w11 = encode_block(b11, 2, cb);
  CHECK(std::equal(w11.begin(), w11.end(), cb.codeword(2, 3)));
  CHECK_THROWS(encode_block(b00, 6, cb), "out of range");
  CHECK_THROWS(encode_block(BitBlock{{1}}, 0, cb), "length");

  // bijection: the 4 blocks map onto the 4 distinct codewords, every j
  for (int j = 0; j < cb.j_cbs; ++j) {
    std::set<std::pair<double, double>> seen;
    for (int m = 0; m < 4; ++m) {
      BitBlock blk{{static_cast<uint8_t>((m >> 1) & 1), static_cast<uint8_t>(m & 1)}};
      const auto w = encode_block(blk, j, cb);
      CHECK(std::equal(w.begin(), w.end(), cb.codeword(j, m)));
      // fingerprint the first occupied entry to confirm distinctness
      for (const auto& v : w) {
        if (v != cplx(0.0, 0.0)) {
          seen.insert({v.real(), v.imag()});
          break;
        }
      }
    }
    CHECK(seen.size() == 4);
  }
}

void test_build_ctu() {
  const Codebook cb = default_codebook();
  const CtuPayload one = build_ctu(0, {0, 0}, cb);
  CHECK(one.l_slots == 1);
  CHECK(std::equal(one.row(0), one.row(0) + 4, cb.codeword(0, 0)));

  const CtuPayload two = build_ctu(0, {0, 0, 1, 1}, cb);
  CHECK(two.l_slots == 2);
  CHECK(std::equal(two.row(0), two.row(0) + 4, cb.codeword(0, 0)));
  CHECK(std::equal(two.row(1), two.row(1) + 4, cb.codeword(0, 3)));

  CHECK_THROWS(build_ctu(0, {0, 0, 1}, cb), "multiple");

  // random 64-bit stream: every row is a codeword of codebook nu(user),
  // and each row has unit energy
  Rng rng(42);
  std::vector<uint8_t> bits(64);
  for (auto& b : bits) b = rng.next_bernoulli(0.5) ? 1 : 0;
  const int user = 7;
  const CtuPayload ctu = build_ctu(user, bits, cb);
  CHECK(ctu.l_slots == 32);
  const int j = assign_codebook(user, cb.j_cbs);
  for (int l = 0; l < ctu.l_slots; ++l) {
    bool member = false;
    for (int m = 0; m < cb.m_order; ++m) {
      if (std::equal(ctu.row(l), ctu.row(l) + 4, cb.codeword(j, m))) member = true;
    }
    CHECK_MSG(member, "CTU row is a codeword of the assigned codebook");
    double e = 0.0;
    for (int k = 0; k < 4; ++k) e += std::norm(ctu.row(l)[k]);
    CHECK_NEAR(e, 1.0, 1e-12);
  }
}

}  // namespace

int main() {
  run_test("assign_codebook", test_assign_codebook);
  run_test("default_codebook", test_default_codebook);
  run_test("codebook_round_trip", test_codebook_round_trip);
  run_test("codebook_errors", test_codebook_errors);
  run_test("encode_block", test_encode_block);
  run_test("build_ctu", test_build_ctu);
  return testutil::finish("test_scma_core");
}
