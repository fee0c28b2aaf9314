#include "susyscat/errors.hpp"

namespace susyscat {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::singular_sigma: return "singular-sigma";
    case Errc::ambiguous_branch: return "ambiguous-branch";
    case Errc::unsupported_input: return "unsupported-input";
    case Errc::singular_factor: return "singular-factor";
    case Errc::invalid_width: return "invalid-width";
    case Errc::constraint_violation: return "constraint-violation";
    case Errc::pole_of_jost: return "pole-of-jost";
    case Errc::singular_jost: return "singular-jost";
    case Errc::threshold: return "threshold";
    case Errc::not_2x2: return "not-2x2";
    case Errc::non_unitary: return "non-unitary";
    case Errc::discontinuity: return "discontinuity";
    case Errc::no_convergence: return "no-convergence";
    case Errc::wrong_sheet: return "wrong-sheet";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::overflow: return "overflow";
    case Errc::unreliable_result: return "unreliable-result";
    case Errc::dimension_mismatch: return "dimension-mismatch";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace susyscat
