#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "reference_values.hpp"
#include "support.hpp"
#include "susyscat/feshbach.hpp"
#include "susyscat/scattering.hpp"
#include "susyscat/susy.hpp"

using namespace susyscat;
using namespace susyscat::feshbach;
using support::code_of;
using support::max_abs;

namespace {

FeshbachParams reference_model() { return FeshbachParams::from_physical(10.0, 7.0, 1.0); }

}  // namespace

TEST_CASE("physical parametrization") {
  const auto p = reference_model();
  CHECK(std::abs(p.kappa1() - reference::kappa1) < 1e-12);
  CHECK(std::abs(p.kappa2() - reference::kappa2) < 1e-12);
  CHECK(std::abs(p.beta() - reference::beta) < 1e-12);
  CHECK(std::abs(p.alpha1() - reference::alpha1) < 1e-12);
  CHECK(std::abs(p.alpha2() - reference::alpha2) < 1e-12);
  CHECK(std::abs(p.kappa1() * p.kappa2() - reference::kappa_product) < 1e-12);
  CHECK(std::abs(p.beta() * p.beta() - reference::beta_squared) < 1e-12);

  CHECK(p.kappa1() == doctest::Approx(0.172069).epsilon(1e-5));
  CHECK(p.kappa2() == doctest::Approx(3.166956).epsilon(1e-5));
  CHECK(p.beta() == doctest::Approx(0.617101).epsilon(1e-5));
  CHECK(p.alpha1() == doctest::Approx(0.094431).epsilon(1e-4));
  CHECK(p.alpha2() == doctest::Approx(-1.738013).epsilon(1e-5));

  CHECK_FALSE(p.above_threshold());
  CHECK_FALSE(p.decoupled());
  CHECK(FeshbachParams::from_physical(10.0, 12.0, 1.0).above_threshold());
}

TEST_CASE("parametrization invariants for random triples") {
  gen::Source src(101);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = src.feshbach();
    CHECK(p.kappa2() > p.kappa1());
    CHECK(p.kappa1() > 0.0);
    CHECK(std::abs(p.kappa2() * p.kappa2() - p.kappa1() * p.kappa1() - p.delta()) < 1e-12 * p.delta());
    CHECK(p.kappa1() * p.kappa2() > p.beta() * p.beta());
    CHECK(p.alpha1() > 0.0);
    CHECK(p.alpha2() < 0.0);
    const double excess = p.kappa1() * p.kappa2() - p.beta() * p.beta();
    CHECK(p.alpha1() == doctest::Approx(std::sqrt(excess * p.kappa1() / p.kappa2())).epsilon(1e-12));
    CHECK(p.alpha2() == doctest::Approx(-std::sqrt(excess * p.kappa2() / p.kappa1())).epsilon(1e-12));
  }
}

TEST_CASE("invalid physical inputs") {
  CHECK(code_of([] { FeshbachParams::from_physical(10.0, 7.0, 0.0); }) == Errc::invalid_width);
  CHECK(code_of([] { FeshbachParams::from_physical(10.0, 7.0, -1.0); }) == Errc::invalid_width);
  CHECK(code_of([] { FeshbachParams::from_physical(0.0, 7.0, 1.0); }) == Errc::invalid_argument);
  CHECK(code_of([] { FeshbachParams::from_physical(10.0, -1.0, 1.0); }) == Errc::invalid_argument);
}

TEST_CASE("raw parametrization") {
  const auto p = reference_model();
  const auto q = FeshbachParams::from_raw(p.kappa1(), p.kappa2(), p.beta());
  CHECK(q.delta() == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(q.resonance_energy() == doctest::Approx(7.0).epsilon(1e-10));
  CHECK(q.width() == doctest::Approx(1.0).epsilon(1e-10));

  CHECK(FeshbachParams::from_raw(0.5, 3.0, 0.0).decoupled());
  CHECK(code_of([] { FeshbachParams::from_raw(1.0, 2.0, 1.5); }) == Errc::constraint_violation);
  CHECK(code_of([] { FeshbachParams::from_raw(1.0, 1.0, 0.5); }) == Errc::invalid_argument);
  CHECK(code_of([] { FeshbachParams::from_raw(1.0, 2.0, -0.1); }) == Errc::invalid_argument);
}

TEST_CASE("resonance zeros") {
  const auto p = reference_model();
  const auto [pole, mirror] = resonance_zeros(p);
  CHECK(std::abs(pole.k1 - reference::k1_zero) < 1e-12);
  CHECK(std::abs(pole.k2 - reference::k2_zero) < 1e-12);
  CHECK(pole.k1.real() == doctest::Approx(2.647436).epsilon(1e-6));
  CHECK(pole.k1.imag() == doctest::Approx(-0.094431).epsilon(1e-4));
  CHECK(pole.k2.real() == doctest::Approx(-0.143842).epsilon(1e-5));
  CHECK(pole.k2.imag() == doctest::Approx(1.738013).epsilon(1e-6));
  CHECK(std::abs(pole.k1 - std::sqrt(cplx(7.0, -0.5))) < 1e-12);
  CHECK(mirror.k1 == -std::conj(pole.k1));
  CHECK(mirror.k2 == -std::conj(pole.k2));

  gen::Source src(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto q = src.feshbach();
    const auto [z, m] = resonance_zeros(q);
    CHECK(z.k1.imag() < 0.0);
    CHECK(z.k2.imag() > 0.0);
    CHECK(std::abs(z.k1 * z.k1 - z.k2 * z.k2 - q.delta()) < 1e-10 * q.delta());
    CHECK(z.resonance_energy() == doctest::Approx(q.resonance_energy()).epsilon(1e-10));
    CHECK(z.width() == doctest::Approx(q.width()).epsilon(1e-10));
    for (const auto& zero : {z, m}) {
      ComplexVector k(2);
      k << zero.k1, zero.k2;
      const auto momenta = ChannelMomenta::from_momenta(q.channels(), k);
      CHECK(std::abs(jost_matrix(q, momenta).determinant()) < 1e-12);
    }
  }
}

TEST_CASE("det F mirror symmetry") {
  const auto p = reference_model();
  gen::Source src(41);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx k1(src.uniform(-4.0, 4.0), src.uniform(-1.0, 1.0));
    ComplexVector k(2), km(2);
    k << k1, std::sqrt(k1 * k1 - 10.0);
    km << -std::conj(k(0)), -std::conj(k(1));
    const cplx d = jost_matrix(p, ChannelMomenta::from_momenta(p.channels(), k)).determinant();
    const cplx dm = jost_matrix(p, ChannelMomenta::from_momenta(p.channels(), km)).determinant();
    CHECK(std::abs(dm - std::conj(d)) < 1e-12 * std::max(1.0, std::abs(d)));
  }
}

TEST_CASE("only the two closed-form zeros are found in the scanned region") {
  const auto p = reference_model();
  const auto [pole, mirror] = resonance_zeros(p);
  auto detf = [&p](cplx k1) { return jost_determinant(p, k1); };
  int found = 0;
  for (double re = -4.0; re <= 4.0; re += 0.5) {
    for (double im : {-0.05, -0.3, -0.8}) {
      try {
        const auto root = scattering::find_detF_zero(detf, cplx(re, im), p.delta());
        CHECK(std::min(std::abs(root.pole.k1 - pole.k1), std::abs(root.pole.k1 - mirror.k1)) < 1e-10);
        ++found;
      } catch (const Error& e) {
        CHECK((e.code() == Errc::no_convergence || e.code() == Errc::wrong_sheet));
      }
    }
  }
  CHECK(found > 0);
}

TEST_CASE("transformed potential closed form") {
  const auto p = reference_model();
  const RealMatrix v0 = potential_matrix(p, 0.0);
  CHECK(std::abs(v0(0, 0) - reference::v_at_0[0]) < 1e-11);
  CHECK(std::abs(v0(0, 1) - reference::v_at_0[1]) < 1e-11);
  CHECK(std::abs(v0(1, 1) - reference::v_at_0[2]) < 1e-11);
  CHECK(v0(0, 1) == v0(1, 0));

  SUBCASE("decay: diagonal like e^{-2(kappa2-kappa1)r}, coupling like e^{-(kappa2-kappa1)r}") {
    gen::Source src(9);
    for (int trial = 0; trial < 10; ++trial) {
      const auto q = trial == 0 ? p : src.feshbach();
      const double rate = q.kappa2() - q.kappa1();
      const double far = 30.0 / rate;
      const RealMatrix v = potential_matrix(q, far);
      CHECK(std::abs(v(0, 0)) < 1e-20);
      CHECK(std::abs(v(1, 1)) < 1e-20);
      const double ratio = potential_matrix(q, far + 1.0)(0, 1) / v(0, 1);
      CHECK(ratio == doctest::Approx(std::exp(-rate)).epsilon(1e-10));
      CHECK(std::abs(v(0, 1)) < 1e-11);
    }
  }

  SUBCASE("sign structure") {
    gen::Source src(13);
    for (int trial = 0; trial < 20; ++trial) {
      const auto q = src.feshbach();
      for (int i = 0; i <= 100; ++i) {
        const RealMatrix v = potential_matrix(q, 0.1 * i);
        CHECK(v(0, 0) >= 0.0);
        CHECK(v(1, 1) <= 0.0);
        CHECK(v(0, 0) * v(1, 1) <= 0.0);
      }
    }
  }

  SUBCASE("equals the generic transformed potential") {
    gen::Source src(29);
    for (int trial = 0; trial < 5; ++trial) {
      const auto q = trial == 0 ? p : src.feshbach();
      const auto spec = q.transform_spec();
      for (int i = 0; i < 200; ++i) {
        const double r = 10.0 * i / 199.0;
        CHECK(max_abs(potential_matrix(q, r) - susy::transformed_potential(spec, r)) < 1e-9);
      }
    }
  }
  CHECK(code_of([&] { potential_matrix(p, -1.0); }) == Errc::invalid_argument);
}

TEST_CASE("superpotential closed form") {
  const auto p = reference_model();
  const RealMatrix u0 = superpotential_closed_form(p, 0.0);
  CHECK(u0(0, 0) == doctest::Approx(p.alpha1()).epsilon(1e-12));
  CHECK(u0(0, 1) == doctest::Approx(p.beta()).epsilon(1e-12));
  CHECK(u0(1, 1) == doctest::Approx(p.alpha2()).epsilon(1e-12));

  const RealMatrix far = superpotential_closed_form(p, 30.0 / (p.kappa2() - p.kappa1()));
  CHECK(std::abs(far(0, 0) + p.kappa1()) < 1e-10);
  CHECK(std::abs(far(1, 1) - p.kappa2()) < 1e-10);
  CHECK(std::abs(far(0, 1)) < 1e-10);

  const RealMatrix u1 = superpotential_closed_form(p, 1.0);
  CHECK(max_abs(u1 - susy::superpotential(p.transform_spec(), 1.0)) < 1e-10);
  CHECK(std::abs(u1(0, 1) - reference::u_at_1[1]) < 1e-12);

  const auto decoupled = FeshbachParams::from_raw(0.5, 3.0, 0.0);
  CHECK(superpotential_closed_form(decoupled, 2.0).allFinite());
}

TEST_CASE("closed-form Jost matrix") {
  const auto p = reference_model();
  const auto m = ChannelMomenta::physical(p.channels(), 12.0);
  const ComplexMatrix f = jost_matrix(p, m);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(std::abs(f(a, b) - reference::jost_at_12[a][b]) < 1e-13);
  CHECK(max_abs(f - susy::nonconservative_jost(p.transform_spec(), m)) < 1e-12);

  const auto decoupled = FeshbachParams::from_raw(0.5, 3.0, 0.0);
  const ComplexMatrix fd = jost_matrix(decoupled, ChannelMomenta::physical(decoupled.channels(), 4.0));
  CHECK(fd(0, 1) == cplx(0.0));
  CHECK(fd(1, 0) == cplx(0.0));

  const auto big = ChannelMomenta::physical(p.channels(), 1e10);
  CHECK(max_abs(jost_matrix(p, big) - ComplexMatrix::Identity(2, 2)) < 1e-4);

  ComplexVector k(2);
  k << cplx(0.0, p.kappa1()), upper_sqrt(-p.kappa1() * p.kappa1() - 10.0);
  CHECK(code_of([&] { jost_matrix(p, ChannelMomenta::from_momenta(p.channels(), k)); }) == Errc::pole_of_jost);
}

TEST_CASE("small width approaches the bound-state configuration") {
  double last_im = 1e9, last_re = 1e9;
  for (double gamma : {1.0, 0.5, 0.2, 0.1, 0.05, 0.01, 0.001}) {
    const auto [pole, mirror] = resonance_zeros(FeshbachParams::from_physical(10.0, 7.0, gamma));
    CHECK(std::abs(pole.k1.imag()) < last_im);
    CHECK(std::abs(pole.k2.real()) < last_re);
    last_im = std::abs(pole.k1.imag());
    last_re = std::abs(pole.k2.real());
  }
  const auto [pole, mirror] = resonance_zeros(FeshbachParams::from_physical(10.0, 7.0, 1e-3));
  CHECK(std::abs(pole.k1 - std::sqrt(7.0)) < 1e-3);
  CHECK(std::abs(pole.k2 - cplx(0.0, std::sqrt(3.0))) < 1e-3);
}
