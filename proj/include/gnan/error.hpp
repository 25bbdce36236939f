#pragma once

#include <stdexcept>
#include <string>

namespace gnan {

/// Rejected argument or malformed input (bad index, bad probability, bad config).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerically degenerate state, e.g. a zero expected rate on an observed entry.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parse failure in one of the text formats. Carries the offending line number.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gnan
