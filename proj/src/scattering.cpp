#include "susyscat/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "susyscat/errors.hpp"

namespace susyscat::scattering {

namespace {

constexpr double kPi = std::numbers::pi;

// x shifted by a multiple of `period` to lie nearest to `ref`.
double align(double x, double ref, double period) { return x + period * std::round((ref - x) / period); }

struct LineFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double res = y[i] - my - fit.slope * (x[i] - mx);
    ssr += res * res;
  }
  fit.stderr_slope = std::sqrt(ssr / (n - 2.0) / sxx);
  return fit;
}

void check_threshold_window(const ChannelSet& channels, double energy, const ThresholdOptions& options) {
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (std::abs(energy - channels.threshold(i)) < options.exclusion)
      throw Error(Errc::threshold, "energy " + std::to_string(energy) + " is inside the exclusion window of threshold " +
                                       std::to_string(i + 1));
  }
}

}  // namespace

SMatrix s_matrix(const ComplexMatrix& f_plus, const ComplexMatrix& f_minus, const ChannelMomenta& momenta,
                 const ChannelSet& channels, const ThresholdOptions& options) {
  const auto n = static_cast<Eigen::Index>(channels.size());
  if (f_plus.rows() != n || f_plus.cols() != n || f_minus.rows() != n || f_minus.cols() != n ||
      static_cast<Eigen::Index>(momenta.size()) != n)
    throw Error(Errc::dimension_mismatch, "Jost matrices and momenta must match the channel count");
  if (momenta.energy.imag() != 0.0) throw Error(Errc::invalid_argument, "S-matrix needs a real energy");

  const double energy = momenta.energy.real();
  check_threshold_window(channels, energy, options);

  Eigen::FullPivLU<ComplexMatrix> lu(f_plus.transpose());
  if (!lu.isInvertible() || lu.rcond() < 1e-14)
    throw Error(Errc::singular_jost, "Jost matrix is singular at E = " + std::to_string(energy));
  // M = F(−k) F(k)⁻¹, solved as F(k)ᵀ Mᵀ = F(−k)ᵀ.
  const ComplexMatrix m = lu.solve(f_minus.transpose()).transpose();

  SMatrix s;
  s.energy = energy;
  const auto open = static_cast<Eigen::Index>(channels.open_count(energy));
  for (Eigen::Index i = 0; i < open; ++i) s.open_channels.push_back(static_cast<std::size_t>(i));
  s.matrix.resize(open, open);
  for (Eigen::Index i = 0; i < open; ++i) {
    for (Eigen::Index j = 0; j < open; ++j) {
      s.matrix(i, j) = m(i, j) * std::sqrt(momenta.k(j).real() / momenta.k(i).real());
    }
  }
  return s;
}

SMatrix s_matrix(const JostFunction& jost, const ChannelSet& channels, double energy,
                 const ThresholdOptions& options) {
  const ChannelMomenta momenta = ChannelMomenta::physical(channels, energy);
  check_threshold_window(channels, energy, options);
  return s_matrix(jost(momenta), jost(momenta.negated()), momenta, channels, options);
}

double unitarity_defect(const ComplexMatrix& s) {
  return (s * s.adjoint() - ComplexMatrix::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
}

double symmetry_defect(const ComplexMatrix& s) { return (s - s.transpose()).cwiseAbs().maxCoeff(); }

EigenphaseSet eigenphases(const SMatrix& s, double unitarity_tolerance) {
  if (s.matrix.rows() != 2 || s.matrix.cols() != 2)
    throw Error(Errc::not_2x2, "eigenphase decomposition needs a 2x2 S-matrix");
  const double defect = unitarity_defect(s.matrix);
  if (!(defect <= unitarity_tolerance))
    throw Error(Errc::non_unitary, "S-matrix unitarity defect " + std::to_string(defect));

  const cplx a = s.matrix(0, 0);
  const cplx b = 0.5 * (s.matrix(0, 1) + s.matrix(1, 0));
  const cplx d = s.matrix(1, 1);
  // (a − d, 2b) = (cos 2ε, sin 2ε)(λ1 − λ2); project on the larger component to get a real pair.
  const cplx q = std::abs(a - d) >= std::abs(2.0 * b) ? a - d : 2.0 * b;
  double two_eps = 0.0;
  if (std::abs(q) > 0.0) {
    two_eps = std::atan2((2.0 * b * std::conj(q)).real(), ((a - d) * std::conj(q)).real());
    if (two_eps > 0.5 * kPi) two_eps -= kPi;
    if (two_eps <= -0.5 * kPi) two_eps += kPi;
  }
  const double eps = 0.5 * two_eps;
  Eigen::Matrix2cd rot;
  rot << std::cos(eps), std::sin(eps), -std::sin(eps), std::cos(eps);
  const Eigen::Matrix2cd diag = rot * s.matrix * rot.transpose();

  EigenphaseSet out;
  out.energy = s.energy;
  out.delta1 = 0.5 * std::arg(diag(0, 0));
  out.delta2 = 0.5 * std::arg(diag(1, 1));
  out.epsilon = eps;
  return out;
}

EigenphaseSet phases(const SMatrix& s, double unitarity_tolerance) {
  if (s.matrix.rows() == 2) return eigenphases(s, unitarity_tolerance);
  if (s.matrix.rows() != 1 || s.matrix.cols() != 1)
    throw Error(Errc::not_2x2, "phase decomposition supports one or two open channels");
  const double defect = std::abs(std::abs(s.matrix(0, 0)) - 1.0);
  if (!(defect <= unitarity_tolerance))
    throw Error(Errc::non_unitary, "|S11| differs from 1 by " + std::to_string(defect));
  EigenphaseSet out;
  out.energy = s.energy;
  out.delta1 = 0.5 * std::arg(s.matrix(0, 0));
  return out;
}

ComplexMatrix reconstruct(const EigenphaseSet& p) {
  if (!p.delta2 || !p.epsilon) throw Error(Errc::not_2x2, "reconstruction needs two eigenphases and a mixing angle");
  const double eps = *p.epsilon;
  Eigen::Matrix2cd rot;
  rot << std::cos(eps), std::sin(eps), -std::sin(eps), std::cos(eps);
  Eigen::Matrix2cd diag = Eigen::Matrix2cd::Zero();
  diag(0, 0) = std::polar(1.0, 2.0 * p.delta1);
  diag(1, 1) = std::polar(1.0, 2.0 * *p.delta2);
  return rot.transpose() * diag * rot;
}

std::vector<EigenphaseSet> unwrap_scan(std::vector<EigenphaseSet> scan) {
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (!(scan[i].energy > scan[i - 1].energy))
      throw Error(Errc::invalid_argument, "scan energies must be strictly increasing");
  }

  for (std::size_t i = 1; i < scan.size(); ++i) {
    const EigenphaseSet& prev = scan[i - 1];
    const EigenphaseSet& raw = scan[i];

    std::vector<EigenphaseSet> candidates{raw};
    if (raw.delta2 && raw.epsilon) {
      EigenphaseSet swapped = raw;
      swapped.delta1 = *raw.delta2;
      swapped.delta2 = raw.delta1;
      swapped.epsilon = *raw.epsilon + 0.5 * kPi;
      candidates.push_back(swapped);
    }

    double best_cost = std::numeric_limits<double>::infinity();
    EigenphaseSet best = raw;
    for (EigenphaseSet c : candidates) {
      c.delta1 = align(c.delta1, prev.delta1, kPi);
      double cost = std::abs(c.delta1 - prev.delta1);
      if (c.delta2 && prev.delta2) {
        c.delta2 = align(*c.delta2, *prev.delta2, kPi);
        cost = std::max(cost, std::abs(*c.delta2 - *prev.delta2));
      }
      if (c.epsilon && prev.epsilon) {
        c.epsilon = align(*c.epsilon, *prev.epsilon, kPi);
        cost = std::max(cost, std::abs(*c.epsilon - *prev.epsilon));
      }
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    if (!(best_cost < 0.5 * kPi))
      throw Error(Errc::discontinuity, "phase step of " + std::to_string(best_cost) + " rad at E = " +
                                           std::to_string(raw.energy));
    scan[i] = best;
  }
  return scan;
}

RootResult find_detF_zero(const std::function<cplx(cplx)>& detf, cplx seed, double delta,
                          const NewtonOptions& options) {
  cplx k = seed;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const cplx f = detf(k);
    const double h = 1e-7 * std::max(1.0, std::abs(k));
    const cplx df = (detf(k + h) - detf(k - h)) / (2.0 * h);
    if (!std::isfinite(std::abs(f)) || !std::isfinite(std::abs(df)) || df == cplx(0.0))
      break;
    const cplx step = f / df;
    k -= step;
    const double residual = std::abs(detf(k));
    if (residual < options.residual_tolerance && std::abs(step) < options.step_tolerance) {
      if (!(k.imag() < 0.0))
        throw Error(Errc::wrong_sheet, "Newton converged to a zero with Im k1 >= 0");
      const cplx k2 = upper_sqrt(k * k - delta);
      return RootResult{{k, k2, k * k}, it, residual};
    }
  }
  throw Error(Errc::no_convergence, "Newton iteration did not converge within " +
                                        std::to_string(options.max_iterations) + " iterations");
}

CuspMetric threshold_cusp_metric(std::span<const double> energies, std::span<const double> delta1,
                                 double threshold, const CuspOptions& options) {
  if (energies.size() != delta1.size()) throw Error(Errc::dimension_mismatch, "energies and phases differ in length");
  std::vector<double> xb, yb, xa, ya;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double dist = energies[i] - threshold;
    if (std::abs(dist) < options.exclusion || std::abs(dist) > options.window) continue;
    if (dist < 0.0) {
      xb.push_back(energies[i]);
      yb.push_back(delta1[i]);
    } else {
      xa.push_back(energies[i]);
      ya.push_back(delta1[i]);
    }
  }
  const std::size_t need = std::max<std::size_t>(options.min_points, 3);
  if (xb.size() < need || xa.size() < need)
    throw Error(Errc::insufficient_data, "need " + std::to_string(need) + " points on each side of the threshold, have " +
                                             std::to_string(xb.size()) + " below and " + std::to_string(xa.size()) +
                                             " above");
  const LineFit below = fit_line(xb, yb);
  const LineFit above = fit_line(xa, ya);
  CuspMetric m;
  m.slope_below = below.slope;
  m.slope_above = above.slope;
  m.stderr_below = below.stderr_slope;
  m.stderr_above = above.stderr_slope;
  m.points_below = xb.size();
  m.points_above = xa.size();
  const double combined = std::hypot(below.stderr_slope, above.stderr_slope);
  const double floor = 1e-9 * (1.0 + std::abs(below.slope) + std::abs(above.slope));
  m.cusp = std::abs(below.slope - above.slope) > options.significance * combined + floor;
  return m;
}

SMatrix feshbach_s_matrix(const feshbach::FeshbachParams& params, double energy, const ThresholdOptions& options) {
  return s_matrix([&](const ChannelMomenta& k) { return feshbach::jost_matrix(params, k); }, params.channels(), energy,
                  options);
}

}  // namespace susyscat::scattering
