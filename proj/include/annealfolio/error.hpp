#pragma once

#include <stdexcept>
#include <string>

namespace annealfolio {

/// Bad input data or configuration. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver or pipeline stage could not produce a result. Exit code 1.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace annealfolio
