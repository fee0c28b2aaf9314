#include "susyscat/feshbach.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "susyscat/errors.hpp"

namespace susyscat::feshbach {

namespace {

constexpr cplx kI(0.0, 1.0);

void check_radius(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(Errc::invalid_argument, "radius must be finite and >= 0");
}

// Shift of the closed-form variable y at r = 0: arccosh(√(κ1κ2)/β), written as
// log((√(κ1κ2) + √(κ1κ2 − β²))/β) so no cancellation occurs in x² − 1.
double y_offset(const FeshbachParams& p) {
  const double prod = p.kappa1() * p.kappa2();
  return std::log((std::sqrt(prod) + std::sqrt(prod - p.beta() * p.beta())) / p.beta());
}

double y_of(const FeshbachParams& p, double r) { return (p.kappa2() - p.kappa1()) * r - y_offset(p); }

}  // namespace

FeshbachParams FeshbachParams::from_physical(double delta, double e_r, double gamma) {
  if (!std::isfinite(delta) || !std::isfinite(e_r) || !std::isfinite(gamma))
    throw Error(Errc::invalid_argument, "non-finite model parameter");
  if (!(delta > 0.0)) throw Error(Errc::invalid_argument, "threshold gap must be positive");
  if (!(gamma > 0.0)) throw Error(Errc::invalid_width, "resonance width must be positive");
  if (!(e_r > 0.0)) throw Error(Errc::invalid_argument, "resonance energy must be positive");

  FeshbachParams p;
  p.delta_ = delta;
  p.e_r_ = e_r;
  p.gamma_ = gamma;

  // With g = Γ²/4, A = √(E_R² + g), B = √((E_R − Δ)² + g):
  //   2κ1² = A + B − Δ,  2κ2² = A + B + Δ,  4β⁴ = (E_R + A)(E_R − Δ + B).
  // A − E_R and B − |E_R − Δ| are formed as g/(sum) so small widths stay accurate.
  const double g = 0.25 * gamma * gamma;
  const double above = e_r - delta;
  const double a = std::sqrt(e_r * e_r + g);
  const double b = std::sqrt(above * above + g);
  const double a_excess = g / (a + e_r);
  const double b_excess = g / (b + std::abs(above));
  const double sum_minus_delta = (above > 0.0 ? 2.0 * above : 0.0) + a_excess + b_excess;
  const double second_factor = (above > 0.0 ? 2.0 * above : 0.0) + b_excess;

  p.kappa1_ = std::sqrt(0.5 * sum_minus_delta);
  p.kappa2_ = std::sqrt(0.5 * sum_minus_delta + delta);
  p.beta_ = std::sqrt(std::sqrt(0.25 * (e_r + a) * second_factor));
  p.derive_alphas();

  if (!(p.kappa2_ > p.kappa1_ && p.kappa1_ > 0.0))
    throw Error(Errc::constraint_violation, "derived kappas violate kappa2 > kappa1 > 0");
  const double shell = p.kappa2_ * p.kappa2_ - p.kappa1_ * p.kappa1_ - delta;
  if (std::abs(shell) > 1e-12 * delta)
    throw Error(Errc::constraint_violation, "kappa2^2 - kappa1^2 does not reproduce the threshold gap");

  const cplx target(e_r, -0.5 * gamma);
  const cplx recovered = resonance_zeros(p).first.energy;
  if (std::abs(recovered - target) > 1e-10 * std::abs(target))
    throw Error(Errc::constraint_violation, "resonance zero does not reproduce (E_R, Gamma)");
  return p;
}

FeshbachParams FeshbachParams::from_raw(double kappa1, double kappa2, double beta) {
  if (!std::isfinite(kappa1) || !std::isfinite(kappa2) || !std::isfinite(beta))
    throw Error(Errc::invalid_argument, "non-finite model parameter");
  if (!(kappa1 > 0.0)) throw Error(Errc::invalid_argument, "kappa1 must be positive");
  if (!(kappa2 > kappa1)) throw Error(Errc::invalid_argument, "kappa2 must exceed kappa1 (distinct thresholds)");
  if (!(beta >= 0.0)) throw Error(Errc::invalid_argument, "beta must be non-negative");

  FeshbachParams p;
  p.kappa1_ = kappa1;
  p.kappa2_ = kappa2;
  p.beta_ = beta;
  p.delta_ = (kappa2 - kappa1) * (kappa2 + kappa1);
  p.derive_alphas();
  const cplx pole = resonance_zeros(p).first.energy;
  p.e_r_ = pole.real();
  p.gamma_ = -2.0 * pole.imag();
  return p;
}

void FeshbachParams::derive_alphas() {
  const double excess = kappa1_ * kappa2_ - beta_ * beta_;
  if (!(excess > 0.0)) throw Error(Errc::constraint_violation, "kappa1*kappa2 must exceed beta^2");
  alpha1_ = std::sqrt(excess * kappa1_ / kappa2_);
  alpha2_ = -std::sqrt(excess * kappa2_ / kappa1_);
}

RealMatrix FeshbachParams::u0() const {
  RealMatrix u(2, 2);
  u << alpha1_, beta_, beta_, alpha2_;
  return u;
}

susy::TransformSpec FeshbachParams::transform_spec() const {
  return susy::TransformSpec::from_kappa(Eigen::Vector2d(kappa1_, kappa2_), u0());
}

std::pair<ResonancePole, ResonancePole> resonance_zeros(const FeshbachParams& p) {
  const cplx k1 = std::sqrt(p.kappa2() / p.kappa1()) * p.beta() - kI * p.alpha1();
  const cplx k2 = -std::sqrt(p.kappa1() / p.kappa2()) * p.beta() - kI * p.alpha2();
  const ResonancePole pole{k1, k2, k1 * k1};
  const cplx m1 = -std::conj(k1);
  const cplx m2 = -std::conj(k2);
  const ResonancePole mirror{m1, m2, m1 * m1};
  return {pole, mirror};
}

RealMatrix potential_matrix(const FeshbachParams& p, double r) {
  check_radius(r);
  const double y = y_of(p, r);
  const double sech = 1.0 / std::cosh(y);
  const double scale = 2.0 * (p.kappa2() - p.kappa1()) * sech;
  const double off = scale * std::sqrt(p.kappa1() * p.kappa2()) * std::tanh(y);
  RealMatrix v(2, 2);
  v << scale * sech * p.kappa1(), off, off, -scale * sech * p.kappa2();
  return v;
}

RealMatrix superpotential_closed_form(const FeshbachParams& p, double r) {
  check_radius(r);
  const double y = y_of(p, r);
  const double t = std::tanh(y);
  const double off = std::sqrt(p.kappa1() * p.kappa2()) / std::cosh(y);
  RealMatrix u(2, 2);
  u << -p.kappa1() * t, off, off, p.kappa2() * t;
  return u;
}

ComplexMatrix jost_matrix(const FeshbachParams& p, const ChannelMomenta& momenta) {
  if (momenta.size() != 2) throw Error(Errc::dimension_mismatch, "the model has two channels");
  const cplx k1 = momenta.k(0);
  const cplx k2 = momenta.k(1);
  const cplx d1 = k1 - kI * p.kappa1();
  const cplx d2 = k2 + kI * p.kappa2();
  if (std::abs(d1) < 1e-14 * std::max({1.0, std::abs(k1), p.kappa1()}))
    throw Error(Errc::pole_of_jost, "k1 = i*kappa1 is a pole of the Jost matrix");
  if (std::abs(d2) < 1e-14 * std::max({1.0, std::abs(k2), p.kappa2()}))
    throw Error(Errc::pole_of_jost, "k2 = -i*kappa2 is a pole of the Jost matrix");
  ComplexMatrix f(2, 2);
  f << (k1 + kI * p.alpha1()) / d1, kI * p.beta() / d1, kI * p.beta() / d2, (k2 + kI * p.alpha2()) / d2;
  return f;
}

cplx jost_determinant(const FeshbachParams& p, cplx k1) {
  return jost_matrix(p, ChannelMomenta::continued(p.channels(), k1)).determinant();
}

}  // namespace susyscat::feshbach
