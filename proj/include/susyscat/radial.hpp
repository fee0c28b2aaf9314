#pragma once

// Direct numerical integration of the coupled radial equation
//   −ψ″ + V(r) ψ = ψ k²
// used as an independent check of the closed-form Jost matrices.

#include <functional>
#include <span>
#include <vector>

#include "susyscat/channels.hpp"

namespace susyscat::radial {

using Potential = std::function<RealMatrix(double r)>;

class RadialGrid {
 public:
  /// The step is shrunk if needed so that (r_max − r_min)/step is an integer.
  RadialGrid(double r_max, double step, double r_min = 1e-6);

  /// As above, and checks that max |V_ij(r_max)| < decay_tolerance.
  static RadialGrid for_potential(const Potential& potential, double r_max, double step, double r_min = 1e-6,
                                  double decay_tolerance = 1e-14);

  double r_min() const noexcept { return r_min_; }
  double r_max() const noexcept { return r_max_; }
  double step() const noexcept { return step_; }
  long intervals() const noexcept { return intervals_; }

  RadialGrid refined(int factor) const { return RadialGrid(r_max_, step_ / factor, r_min_); }

 private:
  double r_min_;
  double r_max_;
  double step_;
  long intervals_;
};

struct IntegrationOptions {
  /// Accepted step-halving disagreement (absolute, or relative to |value| when that exceeds 1).
  double tolerance = 1e-6;
  bool estimate_error = true;
  bool throw_if_unreliable = true;
};

struct IntegrationResult {
  ComplexMatrix value;
  ComplexMatrix derivative;
  double at = 0.0;
  double estimated_error = 0.0;
  bool reliable = true;
};

struct NumericJost {
  ComplexMatrix matrix;
  double estimated_error = 0.0;
  bool reliable = true;
};

/// Jost matrix F = fᵀ(k, 0) by inward RK4 from f(r_max) = e^{ik r_max}.
/// The solution at r_min, 2r_min, 3r_min is extrapolated to the origin.
NumericJost integrate_jost_inward(const Potential& potential, const ChannelMomenta& momenta, const RadialGrid& grid,
                                  const IntegrationOptions& options = {});

/// Jost solution f(k, r) and f′(k, r) at each radius in [r_min, r_max].
std::vector<IntegrationResult> jost_solution_at(const Potential& potential, const ChannelMomenta& momenta,
                                                const RadialGrid& grid, std::span<const double> radii,
                                                const IntegrationOptions& options = {});

/// Regular solution φ(0) = 0, φ′(0) = I integrated outward to r_max.
IntegrationResult integrate_regular_outward(const Potential& potential, const ChannelMomenta& momenta,
                                            const RadialGrid& grid, const IntegrationOptions& options = {});

/// Regular solution at each radius in (0, r_max].
std::vector<IntegrationResult> regular_solution_at(const Potential& potential, const ChannelMomenta& momenta,
                                                   const RadialGrid& grid, std::span<const double> radii,
                                                   const IntegrationOptions& options = {});

/// W[a, b] = aᵀ b′ − a′ᵀ b.
ComplexMatrix wronskian(const IntegrationResult& a, const IntegrationResult& b);

struct CompareReport {
  double max_abs = 0.0;
  double max_rel = 0.0;
};

/// Entrywise difference; relative errors use max(|analytic|, 1e-3) denominators.
CompareReport oracle_compare(const ComplexMatrix& analytic, const ComplexMatrix& numeric);

}  // namespace susyscat::radial
