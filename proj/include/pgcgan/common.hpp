#pragma once

#include <stdexcept>
#include <string>

namespace pgcgan {

// Bad input, configuration, or file content. The CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke an interface contract (shape mismatch, out-of-range label).
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Training produced a non-finite or exploding loss.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pgcgan
