#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "susyscat/channels.hpp"
#include "susyscat/feshbach.hpp"

namespace susyscat::scattering {

/// Physical S-matrix restricted to the open channels at a real energy.
struct SMatrix {
  double energy = 0.0;
  std::vector<std::size_t> open_channels;
  ComplexMatrix matrix;
};

struct ThresholdOptions {
  /// Energies with |E − Δ_i| below this are refused.
  double exclusion = 1e-6;
};

/// S = k^{-1/2} F(−k) F(k)⁻¹ k^{1/2}, open-open block. `f_plus` is F at
/// `momenta` (physical sheet, real energy), `f_minus` is F at −k.
SMatrix s_matrix(const ComplexMatrix& f_plus, const ComplexMatrix& f_minus, const ChannelMomenta& momenta,
                 const ChannelSet& channels, const ThresholdOptions& options = {});

using JostFunction = std::function<ComplexMatrix(const ChannelMomenta&)>;

/// Evaluates `jost` at ±k on the physical sheet and forms the S-matrix.
SMatrix s_matrix(const JostFunction& jost, const ChannelSet& channels, double energy,
                 const ThresholdOptions& options = {});

double unitarity_defect(const ComplexMatrix& s);
double symmetry_defect(const ComplexMatrix& s);

/// Eigenphases and mixing parameter. With one open channel only delta1 is set.
struct EigenphaseSet {
  double energy = 0.0;
  double delta1 = 0.0;
  std::optional<double> delta2;
  std::optional<double> epsilon;

  std::size_t open_channels() const noexcept { return delta2 ? 2 : 1; }
};

/// Real-rotation diagonalization of a 2×2 unitary symmetric S:
/// S = O(ε)ᵀ diag(e^{2iδ1}, e^{2iδ2}) O(ε), O(ε) = [[cos ε, sin ε], [−sin ε, cos ε]],
/// ε ∈ (−π/4, π/4] so that δ1 belongs to the channel-1-dominant eigenvector.
EigenphaseSet eigenphases(const SMatrix& s, double unitarity_tolerance = 1e-8);

/// One- or two-open-channel decomposition, whichever `s` holds.
EigenphaseSet phases(const SMatrix& s, double unitarity_tolerance = 1e-8);

/// Rebuilds S from a two-channel EigenphaseSet.
ComplexMatrix reconstruct(const EigenphaseSet& phases);

/// Makes a scan continuous: shifts δ's by multiples of π, ε by multiples of π,
/// and picks between (δ1, δ2, ε) and (δ2, δ1, ε + π/2) at each step. Entries
/// must be ordered by strictly increasing energy. Throws Errc::discontinuity if
/// no choice keeps every phase step below π/2.
std::vector<EigenphaseSet> unwrap_scan(std::vector<EigenphaseSet> scan);

struct NewtonOptions {
  double residual_tolerance = 1e-13;
  double step_tolerance = 1e-13;
  int max_iterations = 100;
};

struct RootResult {
  feshbach::ResonancePole pole;
  int iterations = 0;
  double residual = 0.0;
};

/// Newton iteration on det F̃(k1) with a central-difference derivative
/// (h = 1e-7·max(1, |k1|)); k2 = √(k1² − Δ) on Im k2 > 0. The converged k1 must
/// lie in the lower half-plane.
RootResult find_detF_zero(const std::function<cplx(cplx)>& detf, cplx seed, double delta,
                          const NewtonOptions& options = {});

struct CuspOptions {
  double window = 0.1;
  std::size_t min_points = 5;
  double exclusion = 1e-6;
  double significance = 10.0;
};

struct CuspMetric {
  double slope_below = 0.0;
  double slope_above = 0.0;
  double stderr_below = 0.0;
  double stderr_above = 0.0;
  std::size_t points_below = 0;
  std::size_t points_above = 0;
  bool cusp = false;
};

/// One-sided least-squares slopes of δ1(E) within `window` of the threshold.
CuspMetric threshold_cusp_metric(std::span<const double> energies, std::span<const double> delta1,
                                 double threshold, const CuspOptions& options = {});

/// S-matrix of the Feshbach model from its closed-form Jost matrix.
SMatrix feshbach_s_matrix(const feshbach::FeshbachParams& params, double energy,
                          const ThresholdOptions& options = {});

}  // namespace susyscat::scattering
