#pragma once

#include <stdexcept>
#include <string>

namespace zics {

enum class Errc {
  malformed_input,
  shape_mismatch,
  duplicate_species,
  non_integer_stoichiometry,
  dimension_mismatch,
  unresolvable_dependency,
  nonlinear_dependence,
  total_missing,
  non_finite_exponent,
  singular_jacobian,
  no_descent,
  iter_limit,
  invalid_network,
  reducible_chain,
  cap_exceeded,
  negative_propensity,
};

const char* errc_name(Errc c);

/// All domain failures are reported through this exception type; code()
/// distinguishes input errors from numerical/domain errors for exit codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace zics
