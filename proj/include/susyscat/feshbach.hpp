#pragma once

// Exactly solvable two-channel Feshbach-resonance model.
//
// Zero potential, one non-conservative transformation with det C = det D = 0.
// Channel 1 (threshold 0) carries a resonance that a bound state of the closed
// channel 2 (threshold Δ) produces through the coupling β.

#include <utility>

#include "susyscat/channels.hpp"
#include "susyscat/susy.hpp"

namespace susyscat::feshbach {

/// A zero of det F̃: channel-1 momentum in the lower half-plane, channel 2 in the upper.
struct ResonancePole {
  cplx k1;
  cplx k2;
  cplx energy;  ///< k1² = E_R − iΓ/2

  double resonance_energy() const noexcept { return energy.real(); }
  double width() const noexcept { return -2.0 * energy.imag(); }
};

class FeshbachParams {
 public:
  /// From threshold gap Δ > 0, resonance energy E_R > 0 and width Γ > 0.
  static FeshbachParams from_physical(double delta, double e_r, double gamma);

  /// From κ2 > κ1 > 0 and β ≥ 0 with κ1κ2 > β². β = 0 gives the decoupled limit.
  static FeshbachParams from_raw(double kappa1, double kappa2, double beta);

  double delta() const noexcept { return delta_; }
  double resonance_energy() const noexcept { return e_r_; }
  double width() const noexcept { return gamma_; }
  double kappa1() const noexcept { return kappa1_; }
  double kappa2() const noexcept { return kappa2_; }
  double beta() const noexcept { return beta_; }
  double alpha1() const noexcept { return alpha1_; }
  double alpha2() const noexcept { return alpha2_; }

  /// E_R > Δ: allowed, but the resonance then has little effect on the physical region.
  bool above_threshold() const noexcept { return e_r_ > delta_; }
  bool decoupled() const noexcept { return beta_ == 0.0; }

  ChannelSet channels() const { return ChannelSet::two_channel(delta_); }
  RealMatrix u0() const;
  susy::TransformSpec transform_spec() const;

 private:
  FeshbachParams() = default;
  void derive_alphas();

  double delta_ = 0.0;
  double e_r_ = 0.0;
  double gamma_ = 0.0;
  double kappa1_ = 0.0;
  double kappa2_ = 0.0;
  double beta_ = 0.0;
  double alpha1_ = 0.0;
  double alpha2_ = 0.0;
};

/// The zero k_R of det F̃ and its mirror (−k1R*, −k2R*).
std::pair<ResonancePole, ResonancePole> resonance_zeros(const FeshbachParams& params);

/// Closed-form transformed potential; V11 ≥ 0 and V22 ≤ 0 everywhere.
RealMatrix potential_matrix(const FeshbachParams& params, double r);

/// Closed-form superpotential; U(0) = [[α1, β], [β, α2]], U(∞) = diag(−κ1, κ2).
RealMatrix superpotential_closed_form(const FeshbachParams& params, double r);

/// Closed-form Jost matrix at the given momenta (any sheet).
ComplexMatrix jost_matrix(const FeshbachParams& params, const ChannelMomenta& momenta);

/// det F̃ with channel 2 continued on its upper branch, as a function of k1.
cplx jost_determinant(const FeshbachParams& params, cplx k1);

}  // namespace susyscat::feshbach
