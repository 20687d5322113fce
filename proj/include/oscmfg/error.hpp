#pragma once

#include <stdexcept>
#include <string>

namespace oscmfg {

// Numerical or domain failure inside a module. `kind` is a short machine tag
// such as "undefined_mean" or "path_lost".
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Malformed or invalid experiment configuration. line is 0 when the problem
// is not tied to a particular line of the document.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace oscmfg
