#include "susyscat/radial.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "susyscat/errors.hpp"

namespace susyscat::radial {

namespace {

constexpr double kOverflow = 1e300;

struct State {
  ComplexMatrix y;
  ComplexMatrix dy;
};

class Propagator {
 public:
  Propagator(const Potential& potential, const ChannelMomenta& momenta)
      : potential_(potential), k2_(momenta.k.array().square().matrix()) {}

  // Classical RK4 for y″ = (V − k²) y, from r0 to r1 in n equal steps. k² acts on
  // the channel (row) index, so constant right factors map solutions to solutions.
  void advance(State& s, double r0, double r1, long n) const {
    const double h = (r1 - r0) / static_cast<double>(n);
    ComplexMatrix v0 = potential(r0);
    for (long i = 0; i < n; ++i) {
      const double r = r0 + static_cast<double>(i) * h;
      const ComplexMatrix vh = potential(r + 0.5 * h);
      const ComplexMatrix v1 = potential(i + 1 == n ? r1 : r + h);

      const ComplexMatrix a1 = accel(v0, s.y);
      const ComplexMatrix y2 = s.y + (0.5 * h) * s.dy;
      const ComplexMatrix d2 = s.dy + (0.5 * h) * a1;
      const ComplexMatrix a2 = accel(vh, y2);
      const ComplexMatrix y3 = s.y + (0.5 * h) * d2;
      const ComplexMatrix d3 = s.dy + (0.5 * h) * a2;
      const ComplexMatrix a3 = accel(vh, y3);
      const ComplexMatrix y4 = s.y + h * d3;
      const ComplexMatrix d4 = s.dy + h * a3;
      const ComplexMatrix a4 = accel(v1, y4);

      s.y += (h / 6.0) * (s.dy + 2.0 * d2 + 2.0 * d3 + d4);
      s.dy += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
      v0 = v1;

      if (!(s.y.cwiseAbs().maxCoeff() <= kOverflow) || !(s.dy.cwiseAbs().maxCoeff() <= kOverflow))
        throw Error(Errc::overflow, "solution exceeded 1e300 at r = " + std::to_string(r + h));
    }
  }

 private:
  // V(r) − k²
  ComplexMatrix potential(double r) const {
    ComplexMatrix w = potential_(r).cast<cplx>();
    w.diagonal() -= k2_;
    return w;
  }
  static ComplexMatrix accel(const ComplexMatrix& w, const ComplexMatrix& y) { return w * y; }

  const Potential& potential_;
  ComplexVector k2_;
};

long steps_between(double a, double b, double step) {
  return std::max(1L, static_cast<long>(std::ceil(std::abs(b - a) / step - 1e-9)));
}

// Walks from `start` through `targets` in order, recording the state at each.
std::vector<State> walk(const Propagator& prop, State s, double start, const std::vector<double>& targets, double step) {
  std::vector<State> out;
  out.reserve(targets.size());
  double r = start;
  for (double t : targets) {
    if (t != r) prop.advance(s, r, t, steps_between(r, t, step));
    r = t;
    out.push_back(s);
  }
  return out;
}

void check_momenta(const Potential& potential, const ChannelMomenta& momenta, double r) {
  const RealMatrix v = potential(r);
  if (v.rows() != v.cols() || static_cast<std::size_t>(v.rows()) != momenta.size())
    throw Error(Errc::dimension_mismatch, "potential and momenta dimensions differ");
}

double disagreement(const ComplexMatrix& coarse, const ComplexMatrix& fine) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < coarse.size(); ++i) {
    const double scale = std::max(1.0, std::abs(fine(i)));
    worst = std::max(worst, std::abs(coarse(i) - fine(i)) / scale);
  }
  return worst;
}

void check_radii(std::span<const double> radii, double lo, double hi, bool lo_inclusive) {
  for (double r : radii) {
    const bool low_ok = lo_inclusive ? r >= lo : r > lo;
    if (!low_ok || !(r <= hi)) throw Error(Errc::invalid_argument, "radius " + std::to_string(r) + " is outside the grid");
  }
}

// f(r_max) = e^{ik r_max} plus the first-order channel tails driven by the coupling.
// For V_ij ≈ A e^{−μr} the driven component of column j in channel i is
// V_ij e^{ik_j r} / ((ik_j − μ)² + k_i²). Without it, a closed channel whose
// decaying solution falls off faster than the coupling picks up a spurious
// admixture that grows inward.
State asymptotic_seed(const Potential& potential, const ChannelMomenta& momenta, double rmax) {
  const cplx i(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(momenta.size());
  const ComplexVector wave = (i * momenta.k * rmax).array().exp().matrix();
  State s{wave.asDiagonal(), (i * momenta.k.cwiseProduct(wave)).asDiagonal()};

  const double d = std::min(0.5, 0.1 * rmax);
  const RealMatrix outer = potential(rmax);
  const RealMatrix inner = potential(rmax - d);
  for (Eigen::Index col = 0; col < n; ++col) {
    for (Eigen::Index row = 0; row < n; ++row) {
      if (row == col || outer(row, col) == 0.0) continue;
      const double ratio = inner(row, col) / outer(row, col);
      if (!(ratio > 1.0)) continue;
      const double mu = std::log(ratio) / d;
      const cplx rate = i * momenta.k(col) - mu;
      const cplx denom = rate * rate + momenta.k(row) * momenta.k(row);
      if (std::abs(denom) < 1e-12) continue;
      s.y(row, col) = outer(row, col) * wave(col) / denom;
      s.dy(row, col) = rate * s.y(row, col);
    }
  }
  return s;
}

struct JostRun {
  ComplexMatrix f0;
  ComplexMatrix df0;
  std::vector<State> samples;
};

JostRun run_jost(const Potential& potential, const ChannelMomenta& momenta, const RadialGrid& grid,
                 std::span<const double> radii) {
  const Propagator prop(potential, momenta);
  const double rmax = grid.r_max();
  State s = asymptotic_seed(potential, momenta, rmax);

  // Requested radii (descending), then three points near the origin.
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t j = 0; j < radii.size(); ++j) order.emplace_back(radii[j], j);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const double h0 = grid.r_min();
  std::vector<double> targets;
  for (const auto& [r, _] : order) targets.push_back(std::max(r, 3.0 * h0));
  targets.insert(targets.end(), {3.0 * h0, 2.0 * h0, h0});

  std::vector<State> states = walk(prop, s, rmax, targets, grid.step());
  const std::size_t n = order.size();
  JostRun run;
  // Quadratic extrapolation through r_min, 2r_min, 3r_min to r = 0.
  run.f0 = 3.0 * states[n + 2].y - 3.0 * states[n + 1].y + states[n].y;
  run.df0 = 3.0 * states[n + 2].dy - 3.0 * states[n + 1].dy + states[n].dy;
  run.samples.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = order[j].first;
    if (r < 3.0 * h0) {
      // Radii inside the extrapolation zone take one extra step from 3r_min.
      State t = states[n];
      prop.advance(t, 3.0 * h0, r, 1);
      run.samples[order[j].second] = t;
    } else {
      run.samples[order[j].second] = states[j];
    }
  }
  return run;
}

std::vector<State> run_regular(const Potential& potential, const ChannelMomenta& momenta, const RadialGrid& grid,
                               std::span<const double> radii) {
  const Propagator prop(potential, momenta);
  const auto n = static_cast<Eigen::Index>(momenta.size());
  State s{ComplexMatrix::Zero(n, n), ComplexMatrix::Identity(n, n)};
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t j = 0; j < radii.size(); ++j) order.emplace_back(radii[j], j);
  std::sort(order.begin(), order.end());
  std::vector<double> targets;
  for (const auto& [r, _] : order) targets.push_back(r);
  std::vector<State> states = walk(prop, s, 0.0, targets, grid.step());
  std::vector<State> out(radii.size());
  for (std::size_t j = 0; j < order.size(); ++j) out[order[j].second] = states[j];
  return out;
}

void flag(IntegrationResult& r, double error, const IntegrationOptions& options) {
  r.estimated_error = error;
  r.reliable = error <= options.tolerance;
  if (!r.reliable && options.throw_if_unreliable)
    throw Error(Errc::unreliable_result, "step-halving disagreement " + std::to_string(error) + " exceeds tolerance " +
                                             std::to_string(options.tolerance));
}

}  // namespace

RadialGrid::RadialGrid(double r_max, double step, double r_min) : r_min_(r_min), r_max_(r_max) {
  if (!(r_min > 0.0) || !(r_max > r_min) || !std::isfinite(r_max))
    throw Error(Errc::invalid_argument, "radial grid needs 0 < r_min < r_max");
  if (!(step > 0.0) || !std::isfinite(step)) throw Error(Errc::invalid_argument, "radial step must be positive");
  intervals_ = std::max(1L, static_cast<long>(std::ceil((r_max - r_min) / step - 1e-9)));
  step_ = (r_max - r_min) / static_cast<double>(intervals_);
}

RadialGrid RadialGrid::for_potential(const Potential& potential, double r_max, double step, double r_min,
                                     double decay_tolerance) {
  RadialGrid grid(r_max, step, r_min);
  const double tail = potential(r_max).cwiseAbs().maxCoeff();
  if (!(tail < decay_tolerance))
    throw Error(Errc::invalid_argument, "potential has not decayed at r_max = " + std::to_string(r_max) +
                                            " (max |V| = " + std::to_string(tail) + ")");
  return grid;
}

NumericJost integrate_jost_inward(const Potential& potential, const ChannelMomenta& momenta, const RadialGrid& grid,
                                  const IntegrationOptions& options) {
  check_momenta(potential, momenta, grid.r_max());
  const JostRun run = run_jost(potential, momenta, grid, {});
  NumericJost out{run.f0.transpose(), 0.0, true};
  if (options.estimate_error) {
    const JostRun fine = run_jost(potential, momenta, grid.refined(2), {});
    IntegrationResult tmp;
    flag(tmp, disagreement(run.f0, fine.f0), options);
    out.estimated_error = tmp.estimated_error;
    out.reliable = tmp.reliable;
  }
  return out;
}

std::vector<IntegrationResult> jost_solution_at(const Potential& potential, const ChannelMomenta& momenta,
                                                const RadialGrid& grid, std::span<const double> radii,
                                                const IntegrationOptions& options) {
  check_momenta(potential, momenta, grid.r_max());
  check_radii(radii, grid.r_min(), grid.r_max(), true);
  const JostRun run = run_jost(potential, momenta, grid, radii);
  std::vector<IntegrationResult> out(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j)
    out[j] = IntegrationResult{run.samples[j].y, run.samples[j].dy, radii[j], 0.0, true};
  if (options.estimate_error) {
    const JostRun fine = run_jost(potential, momenta, grid.refined(2), radii);
    for (std::size_t j = 0; j < radii.size(); ++j)
      flag(out[j], disagreement(run.samples[j].y, fine.samples[j].y), options);
  }
  return out;
}

std::vector<IntegrationResult> regular_solution_at(const Potential& potential, const ChannelMomenta& momenta,
                                                   const RadialGrid& grid, std::span<const double> radii,
                                                   const IntegrationOptions& options) {
  check_momenta(potential, momenta, 0.0);
  check_radii(radii, 0.0, grid.r_max(), false);
  const std::vector<State> coarse = run_regular(potential, momenta, grid, radii);
  std::vector<IntegrationResult> out(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j)
    out[j] = IntegrationResult{coarse[j].y, coarse[j].dy, radii[j], 0.0, true};
  if (options.estimate_error) {
    const std::vector<State> fine = run_regular(potential, momenta, grid.refined(2), radii);
    for (std::size_t j = 0; j < radii.size(); ++j) flag(out[j], disagreement(coarse[j].y, fine[j].y), options);
  }
  return out;
}

IntegrationResult integrate_regular_outward(const Potential& potential, const ChannelMomenta& momenta,
                                            const RadialGrid& grid, const IntegrationOptions& options) {
  const double r = grid.r_max();
  return regular_solution_at(potential, momenta, grid, std::span<const double>(&r, 1), options).front();
}

ComplexMatrix wronskian(const IntegrationResult& a, const IntegrationResult& b) {
  return a.value.transpose() * b.derivative - a.derivative.transpose() * b.value;
}

CompareReport oracle_compare(const ComplexMatrix& analytic, const ComplexMatrix& numeric) {
  if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols())
    throw Error(Errc::dimension_mismatch, "compared matrices differ in shape");
  CompareReport report;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic(i) - numeric(i));
    report.max_abs = std::max(report.max_abs, diff);
    report.max_rel = std::max(report.max_rel, diff / std::max(std::abs(analytic(i)), 1e-3));
  }
  return report;
}

}  // namespace susyscat::radial
