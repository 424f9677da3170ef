#pragma once

#include <stdexcept>
#include <string>

namespace icmor {

/// Error raised by any icmor module. Carries the module name and, when one
/// exists, a hint on how to recover.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message, std::string hint = {})
      : std::runtime_error(module + ": " + message + (hint.empty() ? "" : " (hint: " + hint + ")")),
        module_(std::move(module)),
        hint_(std::move(hint)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& hint() const noexcept { return hint_; }

 private:
  std::string module_;
  std::string hint_;
};

/// A reduced (or full) system matrix that must be Hurwitz is not. The error
/// estimator is undefined in that case.
class HurwitzAssumptionViolated : public Error {
 public:
  HurwitzAssumptionViolated(std::string module, const std::string& detail)
      : Error(std::move(module), "Hurwitz assumption violated: " + detail,
              "choose another reduction method or order; the estimator needs a stable ROM") {}
};

}  // namespace icmor
