#include "susyscat/susy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "susyscat/errors.hpp"

namespace susyscat::susy {

namespace {

void require_radius(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(Errc::invalid_argument, "radius must be finite and >= 0");
}

void require_square(const RealVector& kappa, const RealMatrix& u0) {
  if (u0.rows() != kappa.size() || u0.cols() != kappa.size())
    throw Error(Errc::dimension_mismatch, "U(0) must be N x N with N = number of channels");
}

// Rows of σ and σ′ multiplied by e^{-κ_i r}: σ̂ = C + e^{-2κr} D and
// σ̂′ = κ (C − e^{-2κr} D) with C = (I + κ⁻¹U(0))/2, D = (I − κ⁻¹U(0))/2.
// Finite for any r >= 0, and a decaying row keeps full relative accuracy.
struct ScaledSigma {
  RealMatrix value;
  RealMatrix derivative;
};

ScaledSigma scaled_sigma(const RealVector& kappa, const RealMatrix& u0, double r) {
  const auto n = kappa.size();
  ScaledSigma s{RealMatrix(n, n), RealMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double kap = kappa(i);
    const double decay = std::exp(-2.0 * kap * r);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double id = i == j ? 1.0 : 0.0;
      const double c = 0.5 * (id + u0(i, j) / kap);
      const double d = 0.5 * (id - u0(i, j) / kap);
      s.value(i, j) = c + decay * d;
      s.derivative(i, j) = kap * (c - decay * d);
    }
  }
  return s;
}

double condition_number(const RealMatrix& m) {
  Eigen::JacobiSVD<RealMatrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smallest;
}

// No radius check: the finite-difference residual samples slightly negative r.
RealMatrix superpotential_unchecked(const TransformSpec& spec, double r, const SigmaOptions& options) {
  const auto& kappa = spec.kappa();
  const auto n = kappa.size();
  ScaledSigma s = scaled_sigma(kappa, spec.u0(), r);

  // Rows that decay rather than grow are brought back to unit size as well.
  RealVector norms(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    norms(i) = std::max(s.value.row(i).cwiseAbs().maxCoeff(), s.derivative.row(i).cwiseAbs().maxCoeff());
    if (norms(i) > 0.0) {
      s.value.row(i) /= norms(i);
      s.derivative.row(i) /= norms(i);
    }
  }

  const double cond = condition_number(s.value);
  if (!(cond <= options.condition_cap))
    throw Error(Errc::singular_sigma, "factorization solution is singular at r = " + std::to_string(r) +
                                          " (condition number " + std::to_string(cond) + ")");

  // M = σ̂′ σ̂⁻¹ with σ̂ = Dσ, i.e. σ̂ᵀ Mᵀ = σ̂′ᵀ; then U = D⁻¹ M D, D = e^{-κr} / norms.
  const RealMatrix m = s.value.transpose().partialPivLu().solve(s.derivative.transpose()).transpose();
  RealMatrix u(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      u(i, j) = m(i, j) * std::exp(-(kappa(j) - kappa(i)) * r) * (norms(i) / norms(j));
      u(j, i) = u(i, j);
    }
  }
  return u;
}

// Relative determinant |det X| / ‖X‖ⁿ, 0 for a null matrix.
double relative_det(const RealMatrix& x) {
  const double norm = x.norm();
  if (norm == 0.0) return 0.0;
  return std::abs(x.determinant()) / std::pow(norm, static_cast<double>(x.rows()));
}

}  // namespace

TransformSpec::TransformSpec(ChannelSet channels, double factorization_energy, RealMatrix u0)
    : channels_(std::move(channels)), energy_(factorization_energy), u0_(std::move(u0)) {
  const auto n = static_cast<Eigen::Index>(channels_.size());
  if (!(energy_ < 0.0) || !std::isfinite(energy_))
    throw Error(Errc::invalid_argument, "factorization energy must be negative");
  if (u0_.rows() != n || u0_.cols() != n)
    throw Error(Errc::dimension_mismatch, "U(0) must be N x N with N = number of channels");
  if (!u0_.allFinite()) throw Error(Errc::invalid_argument, "U(0) has non-finite entries");
  if (u0_ != u0_.transpose()) throw Error(Errc::invalid_argument, "U(0) must be symmetric");
  kappa_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) kappa_(i) = std::sqrt(channels_.threshold(i) - energy_);
}

TransformSpec TransformSpec::from_kappa(const RealVector& kappa, RealMatrix u0) {
  if (kappa.size() == 0) throw Error(Errc::invalid_argument, "empty kappa");
  std::vector<double> thresholds(kappa.size());
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    if (!(kappa(i) > 0.0)) throw Error(Errc::invalid_argument, "kappa entries must be positive");
    thresholds[i] = kappa(i) * kappa(i) - kappa(0) * kappa(0);
  }
  TransformSpec spec(ChannelSet(std::move(thresholds)), -kappa(0) * kappa(0), std::move(u0));
  // Keep the caller's κ bit for bit rather than the re-derived square roots.
  spec.kappa_ = kappa;
  return spec;
}

RealMatrix factorization_solution(const RealVector& kappa, const RealMatrix& u0, double r) {
  require_radius(r);
  require_square(kappa, u0);
  const auto n = kappa.size();
  RealMatrix sigma(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma.row(i) = (std::sinh(kappa(i) * r) / kappa(i)) * u0.row(i);
    sigma(i, i) += std::cosh(kappa(i) * r);
  }
  return sigma;
}

RealMatrix factorization_solution_derivative(const RealVector& kappa, const RealMatrix& u0, double r) {
  require_radius(r);
  require_square(kappa, u0);
  const auto n = kappa.size();
  RealMatrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.row(i) = std::cosh(kappa(i) * r) * u0.row(i);
    d(i, i) += kappa(i) * std::sinh(kappa(i) * r);
  }
  return d;
}

RealMatrix factorization_solution(const TransformSpec& spec, double r) {
  return factorization_solution(spec.kappa(), spec.u0(), r);
}

RealMatrix factorization_solution_derivative(const TransformSpec& spec, double r) {
  return factorization_solution_derivative(spec.kappa(), spec.u0(), r);
}

RealMatrix superpotential(const TransformSpec& spec, double r, const SigmaOptions& options) {
  require_radius(r);
  if (r == 0.0) return spec.u0();
  return superpotential_unchecked(spec, r, options);
}

RealMatrix transformed_potential(const TransformSpec& spec, double r, const SigmaOptions& options) {
  const RealMatrix u = superpotential(spec, r, options);
  const RealMatrix kappa2 = spec.kappa().array().square().matrix().asDiagonal();
  return 2.0 * (u * u - kappa2);
}

AsymptoticSuperpotential asymptotic_superpotential(const TransformSpec& spec, const DegeneracyTolerance& tolerance) {
  if (!spec.channels().distinct())
    throw Error(Errc::unsupported_input, "asymptotic superpotential requires distinct thresholds");

  const auto n = static_cast<Eigen::Index>(spec.size());
  const RealVector& kappa = spec.kappa();
  const RealMatrix scaled = kappa.cwiseInverse().asDiagonal() * spec.u0();
  const RealMatrix identity = RealMatrix::Identity(n, n);
  const RealMatrix c = 0.5 * (identity + scaled);
  const RealMatrix d = 0.5 * (identity - scaled);

  AsymptoticSuperpotential out;
  out.det_c = c.determinant();
  out.det_d = d.determinant();
  const double rel_c = relative_det(c);
  out.det_d_zero = relative_det(d) < tolerance.zero;

  if (rel_c >= tolerance.ambiguous) {
    out.diagonal = kappa;
    return out;
  }
  if (rel_c >= tolerance.zero)
    throw Error(Errc::ambiguous_branch,
                "det C is neither clearly zero nor clearly nonzero (relative " + std::to_string(rel_c) + ")");

  out.det_c_zero = true;
  out.branch = AsymptoticBranch::degenerate;
  if (n != 2)
    throw Error(Errc::unsupported_input, "det C = 0 is only classified for two channels");

  if (c.norm() < tolerance.zero) {
    // σ = e^{-κr}: every channel decays.
    out.diagonal = -kappa;
    return out;
  }
  // Rank one: the growing part of σ points along the column space of C. If it
  // reaches channel 2, channel 2 grows and channel 1 decays; otherwise the reverse.
  const Eigen::Index col = c.col(0).norm() >= c.col(1).norm() ? 0 : 1;
  const Eigen::Vector2d growing = c.col(col);
  out.diagonal.resize(2);
  if (std::abs(growing(1)) > tolerance.zero * growing.norm()) {
    out.diagonal << -kappa(0), kappa(1);
  } else {
    out.diagonal << kappa(0), -kappa(1);
  }
  return out;
}

ComplexMatrix transform_solution(const ComplexMatrix& psi, const ComplexMatrix& dpsi, const RealMatrix& u) {
  if (psi.rows() != u.cols() || dpsi.rows() != psi.rows() || dpsi.cols() != psi.cols() || u.rows() != u.cols())
    throw Error(Errc::dimension_mismatch, "inconsistent solution and superpotential dimensions");
  return -dpsi + u.cast<cplx>() * psi;
}

ComplexMatrix nonconservative_jost(const RealVector& u_inf, const RealMatrix& u0, const ComplexMatrix& jost,
                                   const ComplexMatrix& jost_derivative_t, const ChannelMomenta& momenta) {
  const auto n = u_inf.size();
  if (u0.rows() != n || u0.cols() != n || jost.rows() != n || jost.cols() != n ||
      jost_derivative_t.rows() != n || jost_derivative_t.cols() != n ||
      static_cast<Eigen::Index>(momenta.size()) != n)
    throw Error(Errc::dimension_mismatch, "inconsistent dimensions in Jost-matrix update");

  ComplexMatrix out = jost * u0.cast<cplx>() - jost_derivative_t;
  const cplx i(0.0, 1.0);
  for (Eigen::Index c = 0; c < n; ++c) {
    const cplx factor = u_inf(c) - i * momenta.k(c);
    const double scale = std::max({1.0, std::abs(u_inf(c)), std::abs(momenta.k(c))});
    if (std::abs(factor) < 1e-14 * scale)
      throw Error(Errc::singular_factor,
                  "U(inf) - ik is singular in channel " + std::to_string(c + 1));
    out.row(c) /= factor;
  }
  return out;
}

ComplexMatrix nonconservative_jost(const TransformSpec& spec, const ChannelMomenta& momenta) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  if (static_cast<Eigen::Index>(momenta.size()) != n)
    throw Error(Errc::dimension_mismatch, "momentum count differs from channel count");
  const AsymptoticSuperpotential u_inf = asymptotic_superpotential(spec);
  const ComplexMatrix identity = ComplexMatrix::Identity(n, n);
  const ComplexMatrix ik = (cplx(0.0, 1.0) * momenta.k).asDiagonal();
  return nonconservative_jost(u_inf.diagonal, spec.u0(), identity, ik, momenta);
}

ComplexMatrix conservative_jost(const ComplexMatrix& jost, const RealVector& u_inf, const ChannelMomenta& momenta,
                                ConservativeVariant variant) {
  const auto n = u_inf.size();
  if (jost.rows() != n || jost.cols() != n || static_cast<Eigen::Index>(momenta.size()) != n)
    throw Error(Errc::dimension_mismatch, "inconsistent dimensions in Jost-matrix update");
  const cplx i(0.0, 1.0);
  ComplexVector factor(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    if (variant == ConservativeVariant::diverging_at_origin) {
      factor(c) = -u_inf(c) - i * momenta.k(c);
    } else {
      const cplx d = u_inf(c) - i * momenta.k(c);
      const double scale = std::max({1.0, std::abs(u_inf(c)), std::abs(momenta.k(c))});
      if (std::abs(d) < 1e-14 * scale)
        throw Error(Errc::singular_factor, "U(inf) - ik is singular in channel " + std::to_string(c + 1));
      factor(c) = 1.0 / d;
    }
  }
  return factor.asDiagonal() * jost;
}

RealMatrix riccati_residual(const TransformSpec& spec, double r, double step) {
  require_radius(r);
  if (!(step > 0.0)) throw Error(Errc::invalid_argument, "finite-difference step must be positive");
  const SigmaOptions options;
  auto u_at = [&](double x) { return superpotential_unchecked(spec, x, options); };
  const RealMatrix du =
      (-u_at(r + 2.0 * step) + 8.0 * u_at(r + step) - 8.0 * u_at(r - step) + u_at(r - 2.0 * step)) / (12.0 * step);
  const RealMatrix u = u_at(r);
  const RealMatrix kappa2 = spec.kappa().array().square().matrix().asDiagonal();
  return du + u * u - kappa2;
}

RealMatrix self_wronskian(const RealVector& kappa, const RealMatrix& u0, double r) {
  require_radius(r);
  require_square(kappa, u0);
  using Ext = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const auto n = kappa.size();
  Ext sigma(n, n), dsigma(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long double kap = kappa(i);
    const long double ch = std::cosh(kap * r);
    const long double sh = std::sinh(kap * r);
    for (Eigen::Index j = 0; j < n; ++j) {
      const long double u = u0(i, j);
      sigma(i, j) = sh / kap * u + (i == j ? ch : 0.0L);
      dsigma(i, j) = ch * u + (i == j ? kap * sh : 0.0L);
    }
  }
  const Ext w = sigma.transpose() * dsigma - dsigma.transpose() * sigma;
  return w.cast<double>();
}

RealMatrix self_wronskian(const TransformSpec& spec, double r) { return self_wronskian(spec.kappa(), spec.u0(), r); }

}  // namespace susyscat::susy
