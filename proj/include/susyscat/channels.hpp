#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace susyscat {

using cplx = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Square root on the upper branch: Im ≥ 0, and a positive root for positive real input.
cplx upper_sqrt(cplx z);

/// Channel count and threshold energies (reduced units), ascending with Δ_1 = 0.
class ChannelSet {
 public:
  explicit ChannelSet(std::vector<double> thresholds);

  /// Two channels with thresholds {0, delta}.
  static ChannelSet two_channel(double delta);

  std::size_t size() const noexcept { return thresholds_.size(); }
  double threshold(std::size_t i) const { return thresholds_.at(i); }
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }

  bool distinct() const noexcept;
  /// Number of channels with Δ_i < energy.
  std::size_t open_count(double energy) const noexcept;

 private:
  std::vector<double> thresholds_;
};

/// Half-plane of a channel momentum. `upper` is the physical choice Im k ≥ 0.
enum class Sheet { upper, lower };

/// Channel momenta k_i with k_i² = E − Δ_i.
struct ChannelMomenta {
  cplx energy;
  ComplexVector k;
  std::vector<Sheet> sheet;

  std::size_t size() const noexcept { return static_cast<std::size_t>(k.size()); }

  /// Physical sheet at real energy: k_i = +√(E−Δ_i) above threshold, +i√(Δ_i−E) below.
  static ChannelMomenta physical(const ChannelSet& channels, double energy);

  /// Explicit momenta; the energy is taken from channel 1 and the shell k_i² = E − Δ_i is checked.
  static ChannelMomenta from_momenta(const ChannelSet& channels, const ComplexVector& k);

  /// Channel-1 momentum continued anywhere in the complex plane, with every other
  /// channel on its upper branch k_i = upper_sqrt(k1² − Δ_i).
  static ChannelMomenta continued(const ChannelSet& channels, cplx k1);

  /// The same energy with all momenta negated (k → −k).
  ChannelMomenta negated() const;
};

}  // namespace susyscat
