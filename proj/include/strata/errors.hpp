#pragma once

#include <stdexcept>
#include <string>

namespace strata {

// Error taxonomy shared by all modules. The CLI maps categories to exit codes.
enum class ErrorCategory { config, validation, solver, analysis };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory cat, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), category_(cat), name_(std::move(name)) {}

  ErrorCategory category() const { return category_; }
  const std::string& name() const { return name_; }

private:
  ErrorCategory category_;
  std::string name_;
};

#define STRATA_DEFINE_ERROR(NAME, CATEGORY)                          \
  class NAME : public Error {                                        \
  public:                                                            \
    explicit NAME(const std::string& what)                           \
        : Error(ErrorCategory::CATEGORY, #NAME, what) {}             \
  }

STRATA_DEFINE_ERROR(GapViolation, validation);
STRATA_DEFINE_ERROR(BoundaryViolation, validation);
STRATA_DEFINE_ERROR(ThicknessViolation, validation);
STRATA_DEFINE_ERROR(WindowTooSmall, validation);
STRATA_DEFINE_ERROR(BadModelParams, validation);
STRATA_DEFINE_ERROR(UnresolvedLayer, validation);
STRATA_DEFINE_ERROR(UnsupportedScaling, validation);
STRATA_DEFINE_ERROR(RegimeMismatch, validation);
STRATA_DEFINE_ERROR(ConstraintConflict, validation);
STRATA_DEFINE_ERROR(NotPeriodic, validation);
STRATA_DEFINE_ERROR(GridMismatch, validation);
STRATA_DEFINE_ERROR(DegenerateField, analysis);
STRATA_DEFINE_ERROR(InsufficientEpsilons, analysis);
STRATA_DEFINE_ERROR(SolveFailure, solver);
STRATA_DEFINE_ERROR(NonFiniteState, solver);
STRATA_DEFINE_ERROR(ConfigParse, config);

#undef STRATA_DEFINE_ERROR

}  // namespace strata
