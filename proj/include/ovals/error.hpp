#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ovals {

enum class ErrorKind {
  InvalidInput,
  Domain,
  Singular,
  Stiffness,
  Branch,
  Normalization,
  Configuration,
  ConstructionFailed,
  Inapplicable,
  Resolution,
  Region,
  Unfit,
  Incompatible,
  Precondition,
  TipNotResolved,
};

std::string_view to_string(ErrorKind kind);

/// Every library failure is raised as this type; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace ovals
