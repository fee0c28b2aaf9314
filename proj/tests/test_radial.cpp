#include <doctest.h>

#include <cmath>
#include <vector>

#include "reference_values.hpp"
#include "support.hpp"
#include "susyscat/feshbach.hpp"
#include "susyscat/radial.hpp"
#include "susyscat/scattering.hpp"
#include "susyscat/susy.hpp"

using namespace susyscat;
using namespace susyscat::radial;
using support::code_of;
using support::max_abs;

namespace {

feshbach::FeshbachParams reference_model() { return feshbach::FeshbachParams::from_physical(10.0, 7.0, 1.0); }

Potential model_potential(const feshbach::FeshbachParams& p) {
  return [p](double r) { return feshbach::potential_matrix(p, r); };
}

Potential zero_potential(Eigen::Index n) {
  return [n](double) { return RealMatrix::Zero(n, n).eval(); };
}

}  // namespace

TEST_CASE("radial grid") {
  const RadialGrid g(12.0, 1e-3);
  CHECK(g.intervals() * g.step() == doctest::Approx(12.0 - 1e-6).epsilon(1e-14));
  CHECK(g.step() <= 1e-3);
  CHECK(g.refined(2).intervals() == 2 * g.intervals());
  CHECK(code_of([] { RadialGrid(1.0, 0.0); }) == Errc::invalid_argument);
  CHECK(code_of([] { RadialGrid(1e-7, 1e-3); }) == Errc::invalid_argument);
  CHECK(code_of([] { RadialGrid::for_potential(model_potential(reference_model()), 4.0, 1e-3); }) == Errc::invalid_argument);
  CHECK(RadialGrid::for_potential(model_potential(reference_model()), 12.0, 1e-3).r_max() == 12.0);
}

TEST_CASE("free Jost matrix is the identity") {
  const auto channels = ChannelSet({0.0, 3.0, 7.0});
  const RadialGrid grid(10.0, 1e-3);
  for (double e : {0.5, 4.0, 12.0}) {
    const auto m = ChannelMomenta::physical(channels, e);
    const auto f = integrate_jost_inward(zero_potential(3), m, grid);
    CHECK(max_abs(f.matrix - ComplexMatrix::Identity(3, 3)) < 1e-8);
    CHECK(f.reliable);
  }
}

TEST_CASE("numerical Jost matrix agrees with the closed form") {
  const auto p = reference_model();
  const auto potential = model_potential(p);
  const auto grid = RadialGrid::for_potential(potential, 12.0, 1e-3);

  SUBCASE("E = 12") {
    const auto m = ChannelMomenta::physical(p.channels(), 12.0);
    const auto f = integrate_jost_inward(potential, m, grid);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) CHECK(std::abs(f.matrix(a, b) - reference::jost_at_12[a][b]) < 1e-6);
    CHECK(oracle_compare(feshbach::jost_matrix(p, m), f.matrix).max_abs < 1e-6);
  }

  SUBCASE("below threshold, E = 5") {
    const auto m = ChannelMomenta::physical(p.channels(), 5.0);
    CHECK(std::abs(m.k(1) - cplx(0.0, std::sqrt(5.0))) < 1e-15);
    CHECK(oracle_compare(feshbach::jost_matrix(p, m), integrate_jost_inward(potential, m, grid).matrix).max_abs < 1e-6);
  }

  SUBCASE("low energy, where the coupling tail outlasts the closed-channel decay") {
    for (double e : {0.1, 0.8}) {
      const auto m = ChannelMomenta::physical(p.channels(), e);
      CHECK(oracle_compare(feshbach::jost_matrix(p, m), integrate_jost_inward(potential, m, grid).matrix).max_abs < 1e-6);
    }
  }

  SUBCASE("fourth-order convergence") {
    const auto m = ChannelMomenta::physical(p.channels(), 16.0);
    IntegrationOptions fast;
    fast.estimate_error = false;
    const ComplexMatrix exact = feshbach::jost_matrix(p, m);
    const double coarse = oracle_compare(exact, integrate_jost_inward(potential, m, grid, fast).matrix).max_abs;
    const double fine =
        oracle_compare(exact, integrate_jost_inward(potential, m, RadialGrid(12.0, 2.5e-4), fast).matrix).max_abs;
    const double ratio = coarse / fine;
    CHECK(ratio > 256.0 / 4.0);
    CHECK(ratio < 256.0 * 4.0);
  }

  SUBCASE("coarse steps are flagged") {
    const auto m = ChannelMomenta::physical(p.channels(), 12.0);
    const RadialGrid coarse(12.0, 0.1);
    CHECK(code_of([&] { integrate_jost_inward(potential, m, coarse); }) == Errc::unreliable_result);
    IntegrationOptions lenient;
    lenient.throw_if_unreliable = false;
    const auto f = integrate_jost_inward(potential, m, coarse, lenient);
    CHECK_FALSE(f.reliable);
    CHECK(f.estimated_error > 1e-6);
  }
}

TEST_CASE("Wronskian of Jost solutions is conserved") {
  const auto p = reference_model();
  const auto potential = model_potential(p);
  const auto grid = RadialGrid::for_potential(potential, 12.0, 1e-3);
  std::vector<double> radii;
  for (int i = 1; i <= 10; ++i) radii.push_back(1.1 * i);
  IntegrationOptions options;
  options.estimate_error = false;
  for (double e : {12.0, 17.0}) {
    const auto m = ChannelMomenta::physical(p.channels(), e);
    const auto plus = jost_solution_at(potential, m, grid, radii, options);
    const auto minus = jost_solution_at(potential, m.negated(), grid, radii, options);
    const ComplexMatrix expected = (cplx(0.0, 2.0) * m.k).asDiagonal();
    for (std::size_t i = 0; i < radii.size(); ++i) {
      CHECK(plus[i].at == doctest::Approx(radii[i]));
      CHECK((wronskian(minus[i], plus[i]) - expected).norm() / expected.norm() < 1e-8);
    }
  }
  CHECK(code_of([&] {
          const std::vector<double> outside{13.0};
          jost_solution_at(potential, ChannelMomenta::physical(p.channels(), 12.0), grid, outside);
        }) == Errc::invalid_argument);
}

TEST_CASE("regular solution") {
  SUBCASE("free, one channel") {
    const ChannelSet one({0.0});
    const auto m = ChannelMomenta::physical(one, 2.25);
    const RadialGrid grid(8.0, 1e-3);
    const std::vector<double> radii{0.5, 2.0, 8.0};
    const auto phi = regular_solution_at(zero_potential(1), m, grid, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) CHECK(std::abs(phi[i].value(0, 0) - std::sin(1.5 * radii[i]) / 1.5) < 1e-8);
  }

  SUBCASE("free, several channels") {
    const auto channels = ChannelSet({0.0, 1.0, 2.0});
    const auto m = ChannelMomenta::physical(channels, 4.0);
    const auto phi = integrate_regular_outward(zero_potential(3), m, RadialGrid(5.0, 1e-3));
    for (int i = 0; i < 3; ++i) {
      const double k = std::sqrt(4.0 - i);
      CHECK(std::abs(phi.value(i, i) - std::sin(k * 5.0) / k) < 1e-8);
    }
    CHECK(std::abs(phi.value(0, 1)) < 1e-15);
  }

  SUBCASE("Feshbach model: reconstruction from Jost solutions") {
    const auto p = reference_model();
    const auto potential = model_potential(p);
    const auto grid = RadialGrid::for_potential(potential, 12.0, 1e-3);
    const auto m = ChannelMomenta::physical(p.channels(), 12.0);
    const std::vector<double> at{6.0};
    const auto direct = regular_solution_at(potential, m, grid, at)[0].value;
    const auto f_plus = jost_solution_at(potential, m, grid, at)[0].value;
    const auto f_minus = jost_solution_at(potential, m.negated(), grid, at)[0].value;
    const ComplexMatrix jost_plus = integrate_jost_inward(potential, m, grid).matrix;
    const ComplexMatrix jost_minus = integrate_jost_inward(potential, m.negated(), grid).matrix;
    const ComplexMatrix k_inv = m.k.cwiseInverse().asDiagonal();
    const ComplexMatrix rebuilt = (f_plus * k_inv * jost_minus - f_minus * k_inv * jost_plus) / cplx(0.0, 2.0);
    CHECK((rebuilt - direct).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("oracle_compare") {
  const ComplexMatrix x = ComplexMatrix::Random(2, 2);
  const auto same = oracle_compare(x, x);
  CHECK(same.max_abs == 0.0);
  CHECK(same.max_rel == 0.0);
  const ComplexMatrix shifted = ComplexMatrix::Identity(2, 2) + ComplexMatrix::Constant(2, 2, 1e-8);
  CHECK(oracle_compare(ComplexMatrix::Identity(2, 2), shifted).max_abs == doctest::Approx(1e-8).epsilon(1e-6));
  CHECK(oracle_compare(ComplexMatrix::Zero(2, 2), ComplexMatrix::Constant(2, 2, 1e-6)).max_rel ==
        doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(code_of([] { oracle_compare(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)); }) ==
        Errc::dimension_mismatch);
}

TEST_CASE("transformed Jost solution equals A- applied to the free one") {
  const auto p = reference_model();
  const auto potential = model_potential(p);
  const auto grid = RadialGrid::for_potential(potential, 12.0, 1e-3);
  const auto spec = p.transform_spec();
  const RealVector u_inf = susy::asymptotic_superpotential(spec).diagonal;
  const double r = 8.0;
  const cplx i(0.0, 1.0);
  for (double e : {5.0, 12.0}) {
    const auto m = ChannelMomenta::physical(p.channels(), e);
    const std::vector<double> at{r};
    const ComplexMatrix numeric = jost_solution_at(potential, m, grid, at)[0].value;
    const ComplexMatrix free = (i * m.k * r).array().exp().matrix().asDiagonal();
    const ComplexMatrix dfree = (i * m.k).asDiagonal() * free;
    const ComplexMatrix factor = (u_inf.cast<cplx>() - i * m.k).asDiagonal();
    const ComplexMatrix expected =
        susy::transform_solution(free, dfree, susy::superpotential(spec, r)) * factor.inverse();
    CHECK(max_abs(numeric - expected) < 1e-6);
  }
}

TEST_CASE("numerical and closed-form det F share the resonance zero") {
  const auto p = reference_model();
  const auto potential = model_potential(p);
  const auto grid = RadialGrid::for_potential(potential, 12.0, 1e-3);
  IntegrationOptions options;
  options.estimate_error = false;
  auto numeric_det = [&](cplx k1) {
    return integrate_jost_inward(potential, ChannelMomenta::continued(p.channels(), k1), grid, options).matrix.determinant();
  };
  const auto numeric = scattering::find_detF_zero(numeric_det, cplx(2.6, -0.1), p.delta(),
                                                  scattering::NewtonOptions{1e-10, 1e-10, 100});
  CHECK(std::abs(numeric.pole.k1 - reference::k1_zero) < 1e-6);
}

TEST_CASE("dimension mismatch between potential and momenta") {
  const auto m = ChannelMomenta::physical(ChannelSet::two_channel(1.0), 2.0);
  CHECK(code_of([&] { integrate_jost_inward(zero_potential(3), m, RadialGrid(5.0, 1e-2)); }) ==
        Errc::dimension_mismatch);
}
