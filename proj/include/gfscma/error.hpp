/**
 * @file error.hpp
 * @brief Categorized runtime error used across the library and CLI.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace gfscma {

/// Categories: "usage", "config_invalid", "io", "checkpoint_mismatch", "numeric".
/// The CLI prints `error: <category>: <message>` on one line and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const { return category_; }

  std::string one_line() const { return "error: " + category_ + ": " + what(); }

 private:
  std::string category_;
};

}  // namespace gfscma
