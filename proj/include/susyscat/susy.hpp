#pragma once

// Supersymmetric (Darboux) transformations of the coupled-channel radial
// Schrödinger equation, starting from the zero potential.
//
// A transformation is fixed by a factorization energy below every threshold and
// by the value U(0) of the superpotential at the origin. The factorization
// solution is finite and invertible at r = 0, so these transformations do not
// conserve the vanishing of regular solutions there ("non-conservative"). Unlike
// the conservative ones they can couple the scattering matrix of an uncoupled
// initial potential.

#include <cstddef>

#include "susyscat/channels.hpp"

namespace susyscat::susy {

/// Factorization energy, diagonal κ with κ_i = √(Δ_i − ℰ), and symmetric U(0).
class TransformSpec {
 public:
  TransformSpec(ChannelSet channels, double factorization_energy, RealMatrix u0);

  /// Builds the spec from κ directly: ℰ = −κ_1² and Δ_i = κ_i² − κ_1².
  static TransformSpec from_kappa(const RealVector& kappa, RealMatrix u0);

  const ChannelSet& channels() const noexcept { return channels_; }
  double factorization_energy() const noexcept { return energy_; }
  const RealVector& kappa() const noexcept { return kappa_; }
  const RealMatrix& u0() const noexcept { return u0_; }
  std::size_t size() const noexcept { return channels_.size(); }

 private:
  ChannelSet channels_;
  double energy_;
  RealVector kappa_;
  RealMatrix u0_;
};

struct SigmaOptions {
  /// Largest accepted condition number of the row-equilibrated σ(r).
  double condition_cap = 1e12;
};

/// σ(r) = cosh(κr) + sinh(κr) κ⁻¹ U(0).
RealMatrix factorization_solution(const TransformSpec& spec, double r);
/// σ′(r) = κ sinh(κr) + cosh(κr) U(0).
RealMatrix factorization_solution_derivative(const TransformSpec& spec, double r);

// Unvalidated forms, for boundary matrices that need not be symmetric.
RealMatrix factorization_solution(const RealVector& kappa, const RealMatrix& u0, double r);
RealMatrix factorization_solution_derivative(const RealVector& kappa, const RealMatrix& u0, double r);

/// U(r) = σ′(r) σ(r)⁻¹.
///
/// Evaluated from the row-scaled pair e^{−κr}σ, e^{−κr}σ′ so nothing overflows;
/// the upper triangle is formed with the decaying factors e^{−(κ_j−κ_i)r} and
/// mirrored. Throws Errc::singular_sigma when the scaled σ exceeds the
/// condition cap.
RealMatrix superpotential(const TransformSpec& spec, double r, const SigmaOptions& options = {});

/// Ṽ(r) = V − 2U′ for V ≡ 0, with U′ = κ² − U² taken from the Riccati identity.
RealMatrix transformed_potential(const TransformSpec& spec, double r, const SigmaOptions& options = {});

enum class AsymptoticBranch {
  regular,     ///< det C ≠ 0, U(∞) = κ
  degenerate,  ///< det C = 0, some channels decay
};

struct DegeneracyTolerance {
  /// |det C| / ‖C‖ⁿ below this is treated as exactly zero.
  double zero = 1e-10;
  /// Between `zero` and this, the branch is ambiguous and an error is raised.
  double ambiguous = 1e-6;
};

struct AsymptoticSuperpotential {
  RealVector diagonal;  ///< entries ±κ_i
  AsymptoticBranch branch = AsymptoticBranch::regular;
  bool det_c_zero = false;
  bool det_d_zero = false;
  double det_c = 0.0;
  double det_d = 0.0;

  RealMatrix matrix() const { return diagonal.asDiagonal(); }
};

/// U(∞) from the decomposition σ = e^{κr}C + e^{−κr}D, C = (I + κ⁻¹U(0))/2.
///
/// Classified cases: det C ≠ 0 (any N) and the two-channel det C = 0 case.
AsymptoticSuperpotential asymptotic_superpotential(const TransformSpec& spec,
                                                   const DegeneracyTolerance& tolerance = {});

/// ψ̃ = A⁻ψ = −ψ′ + Uψ.
ComplexMatrix transform_solution(const ComplexMatrix& psi, const ComplexMatrix& dpsi, const RealMatrix& u);

/// F̃(k) = [U(∞) − ik]⁻¹ [F(k) U(0) − f′ᵀ(k, 0)] for a general initial potential.
ComplexMatrix nonconservative_jost(const RealVector& u_inf, const RealMatrix& u0, const ComplexMatrix& jost,
                                   const ComplexMatrix& jost_derivative_t, const ChannelMomenta& momenta);

/// Same for the zero initial potential (F = I, f′(k, 0) = ik), with U(∞) from
/// asymptotic_superpotential().
ComplexMatrix nonconservative_jost(const TransformSpec& spec, const ChannelMomenta& momenta);

enum class ConservativeVariant {
  diverging_at_origin,  ///< F̃ = [−U(∞) − ik] F
  vanishing_at_origin,  ///< F̃ = [U(∞) − ik]⁻¹ F
};

ComplexMatrix conservative_jost(const ComplexMatrix& jost, const RealVector& u_inf, const ChannelMomenta& momenta,
                                ConservativeVariant variant);

/// U′ + U² − V − κ² with U′ from a five-point central difference of step `step`.
RealMatrix riccati_residual(const TransformSpec& spec, double r, double step = 1e-4);

/// W(σ, σ) = σᵀσ′ − σ′ᵀσ, accumulated in extended precision.
RealMatrix self_wronskian(const TransformSpec& spec, double r);
RealMatrix self_wronskian(const RealVector& kappa, const RealMatrix& u0, double r);

}  // namespace susyscat::susy
