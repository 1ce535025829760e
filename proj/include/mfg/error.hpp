#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

enum class Errc {
  kInvalidShift,
  kGridTooLarge,
  kOutOfSimplex,
  kUnknownModel,
  kBadParameter,
  kIndexBug,
  kUnstableIntegration,
  kRateBoundViolation,
  kOracleTooLarge,
  kFlowLeftSimplex,
  kNoActions,
  kConsistencyFailure,
  kInfeasibleN,
  kConfigError,
  kIoError,
};

const char* errc_name(Errc code);

// All library failures are reported through this type; `code()` lets callers
// (the CLI in particular) map them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mfg
