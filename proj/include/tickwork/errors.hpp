#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tickwork {

/// Library-wide error type. `kind` is a short machine-readable tag
/// ("validation", "parse", "degeneracy", ...) that the CLI forwards as the
/// error_kind field of its JSON error output; `what()` carries the detail.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& detail)
      : std::runtime_error(detail), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

[[noreturn]] inline void fail(const char* kind, const std::string& detail) {
  throw Error(kind, detail);
}

}  // namespace tickwork
