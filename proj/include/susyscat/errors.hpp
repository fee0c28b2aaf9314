#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace susyscat {

/// Failure categories reported by the library. Every thrown `Error` carries one.
enum class Errc {
  invalid_argument,
  singular_sigma,
  ambiguous_branch,
  unsupported_input,
  singular_factor,
  invalid_width,
  constraint_violation,
  pole_of_jost,
  singular_jost,
  threshold,
  not_2x2,
  non_unitary,
  discontinuity,
  no_convergence,
  wrong_sheet,
  insufficient_data,
  overflow,
  unreliable_result,
  dimension_mismatch,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace susyscat
