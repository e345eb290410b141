/**
 * @file test_util.hpp
 * @brief Minimal assertion harness shared by the test executables.
 */
#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace testutil {

inline int tests_passed = 0;
inline int tests_failed = 0;

#define CHECK(cond)                                                                  \
  do {                                                                               \
    if (cond) {                                                                      \
      ++testutil::tests_passed;                                                      \
    } else {                                                                         \
      ++testutil::tests_failed;                                                      \
      std::cout << "  [FAIL] " << __FILE__ << ":" << __LINE__ << "  " #cond << "\n"; \
    }                                                                                \
  } while (0)

#define CHECK_MSG(cond, msg)                                                        \
  do {                                                                              \
    if (cond) {                                                                     \
      ++testutil::tests_passed;                                                     \
    } else {                                                                        \
      ++testutil::tests_failed;                                                     \
      std::cout << "  [FAIL] " << __FILE__ << ":" << __LINE__ << "  " << (msg)      \
                << "\n";                                                            \
    }                                                                               \
  } while (0)

#define CHECK_NEAR(a, b, tol)                                                              \
  do {                                                                                     \
    const double va_ = (a), vb_ = (b), vt_ = (tol);                                        \
    if (std::abs(va_ - vb_) <= vt_) {                                                      \
      ++testutil::tests_passed;                                                            \
    } else {                                                                               \
      ++testutil::tests_failed;                                                            \
      std::cout << "  [FAIL] " << __FILE__ << ":" << __LINE__ << "  " #a " = " << va_      \
                << " vs " #b " = " << vb_ << " (tol " << vt_ << ", diff "                  \
                << std::abs(va_ - vb_) << ")\n";                                           \
    }                                                                                      \
  } while (0)

/// Expects fn() to throw an exception whose what() contains `needle`.
template <typename Fn>
void check_throws(Fn&& fn, const std::string& needle, const char* file, int line) {
  try {
    fn();
  } catch (const std::exception& e) {
    if (std::string(e.what()).find(needle) != std::string::npos || needle.empty()) {
      ++tests_passed;
      return;
    }
    ++tests_failed;
    std::cout << "  [FAIL] " << file << ":" << line << "  threw \"" << e.what()
              << "\", expected substring \"" << needle << "\"\n";
    return;
  }
  ++tests_failed;
  std::cout << "  [FAIL] " << file << ":" << line << "  expected an exception (\"" << needle
            << "\")\n";
}

#define CHECK_THROWS(expr, needle) \
  testutil::check_throws([&] { (void)(expr); }, needle, __FILE__, __LINE__)

inline void run_test(const std::string& name, const std::function<void()>& fn) {
  std::cout << "-- " << name << "\n";
  fn();
}

inline int finish(const char* suite) {
  std::cout << suite << ": " << tests_passed << " passed, " << tests_failed << " failed\n";
  return tests_failed == 0 ? 0 : 1;
}

}  // namespace testutil
