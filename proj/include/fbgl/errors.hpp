#ifndef FBGL_ERRORS_HPP
#define FBGL_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbgl {

// Non-finite or out-of-range arguments.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Fiber/channel configuration that violates lmax + lc = M * lambda or a
// derived relation.
class InconsistentGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs for which an angle or plane is undefined (zero endpoint).
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Innovation variance <= 0, covariance blow-up and similar.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simulator state outside the admissible workspace.
class InvalidState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& what)
      : std::runtime_error(format(key, line, what)),
        key_(std::move(key)),
        line_(line) {}

  const std::string& key() const noexcept { return key_; }
  // Zero when the error is not tied to a line (derived-value checks).
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, std::size_t line,
                            const std::string& what) {
    std::string msg = "config error";
    if (line > 0) msg += " at line " + std::to_string(line);
    if (!key.empty()) msg += " [" + key + "]";
    return msg + ": " + what;
  }

  std::string key_;
  std::size_t line_;
};

}  // namespace fbgl

#endif  // FBGL_ERRORS_HPP
