#pragma once

#include <stdexcept>
#include <string>

namespace fsg {

// I/O failure: file missing, unreadable, short write. Exit code 2 in the CLI.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file content: bad magic, out-of-range values, truncated payload.
// Exit code 3 in the CLI.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: eigensolver non-convergence and friends. Exit code 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fsg
