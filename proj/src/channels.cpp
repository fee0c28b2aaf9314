#include "susyscat/channels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "susyscat/errors.hpp"

namespace susyscat {

cplx upper_sqrt(cplx z) {
  cplx s = std::sqrt(z);
  if (s.imag() < 0.0) s = -s;
  return s;
}

ChannelSet::ChannelSet(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
  if (thresholds_.empty()) throw Error(Errc::invalid_argument, "channel set needs at least one channel");
  if (thresholds_.front() != 0.0) throw Error(Errc::invalid_argument, "first threshold must be 0");
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    if (!std::isfinite(thresholds_[i])) throw Error(Errc::invalid_argument, "non-finite threshold");
    if (i > 0 && thresholds_[i] < thresholds_[i - 1])
      throw Error(Errc::invalid_argument, "thresholds must be ascending");
  }
}

ChannelSet ChannelSet::two_channel(double delta) { return ChannelSet({0.0, delta}); }

bool ChannelSet::distinct() const noexcept {
  return std::adjacent_find(thresholds_.begin(), thresholds_.end()) == thresholds_.end();
}

std::size_t ChannelSet::open_count(double energy) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(thresholds_.begin(), thresholds_.end(), [&](double d) { return energy > d; }));
}

ChannelMomenta ChannelMomenta::physical(const ChannelSet& channels, double energy) {
  const auto n = channels.size();
  ChannelMomenta m{energy, ComplexVector(n), std::vector<Sheet>(n, Sheet::upper)};
  for (std::size_t i = 0; i < n; ++i) {
    const double e = energy - channels.threshold(i);
    m.k(i) = e > 0.0 ? cplx(std::sqrt(e), 0.0) : cplx(0.0, std::sqrt(-e));
  }
  return m;
}

ChannelMomenta ChannelMomenta::from_momenta(const ChannelSet& channels, const ComplexVector& k) {
  const auto n = channels.size();
  if (static_cast<std::size_t>(k.size()) != n)
    throw Error(Errc::dimension_mismatch, "momentum count differs from channel count");
  ChannelMomenta m{k(0) * k(0), k, std::vector<Sheet>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const cplx shell = k(i) * k(i) - (m.energy - channels.threshold(i));
    const double scale = std::max({1.0, std::norm(k(i)), std::abs(channels.threshold(i))});
    if (std::abs(shell) > 1e-12 * scale)
      throw Error(Errc::invalid_argument, "momentum " + std::to_string(i) + " is off the energy shell");
    m.sheet[i] = k(i).imag() >= 0.0 ? Sheet::upper : Sheet::lower;
  }
  return m;
}

ChannelMomenta ChannelMomenta::continued(const ChannelSet& channels, cplx k1) {
  const auto n = channels.size();
  ChannelMomenta m{k1 * k1, ComplexVector(n), std::vector<Sheet>(n, Sheet::upper)};
  m.k(0) = k1;
  m.sheet[0] = k1.imag() >= 0.0 ? Sheet::upper : Sheet::lower;
  for (std::size_t i = 1; i < n; ++i) m.k(i) = upper_sqrt(m.energy - channels.threshold(i));
  return m;
}

ChannelMomenta ChannelMomenta::negated() const {
  ChannelMomenta m{energy, -k, sheet};
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (k(i).imag() != 0.0) m.sheet[i] = sheet[i] == Sheet::upper ? Sheet::lower : Sheet::upper;
  }
  return m;
}

}  // namespace susyscat
