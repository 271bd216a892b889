#pragma once

#include <stdexcept>
#include <string>

namespace setreg {

// Bad user input: malformed scene files, dimension mismatches, parameter
// violations. CLI maps this to exit code 2.
class input_error : public std::runtime_error {
  public:
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Estimator-level diagnostic: an oracle could not produce a usable value
// (e.g. no intersection member found within the search region). Exit code 3.
class numeric_error : public std::runtime_error {
  public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace setreg
