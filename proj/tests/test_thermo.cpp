#include <doctest.h>

#include <cmath>

#include "nrtlid/fixtures.hpp"
#include "nrtlid/thermo.hpp"

using namespace nrtlid;

TEST_SUITE("thermo") {

TEST_CASE("tau_eval") {
  NrtlParams p{0.568, -54.8, -0.915, 882.0, 0.3};
  auto [t12, t21] = tau_eval(300.0, p);
  CHECK(t12 == doctest::Approx(0.38533).epsilon(1e-4));
  CHECK(t21 == doctest::Approx(-0.915 + 882.0 / 300.0).epsilon(1e-12));

  NrtlParams zero{0.0, 0.0, 0.0, 0.0, 0.3};
  auto [z12, z21] = tau_eval(345.0, zero);
  CHECK(z12 == 0.0);
  CHECK(z21 == 0.0);

  NrtlParams constant{1.2, 0.0, -0.4, 0.0, 0.3};
  for (double T : {280.0, 340.0, 500.0}) {
    auto [c12, c21] = tau_eval(T, constant);
    CHECK(c12 == 1.2);
    CHECK(c21 == -0.4);
  }

  CHECK_THROWS_AS(tau_eval(-5.0, p), std::domain_error);
  CHECK_THROWS_AS(tau_eval(0.0, p), std::domain_error);
}

TEST_CASE("activity coefficients: ideal and pure limits") {
  NrtlParams ideal{0.0, 0.0, 0.0, 0.0, 0.3};
  for (double x : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    auto [g1, g2] = activity_coefficients(x, 350.0, ideal);
    CHECK(g1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g2 == doctest::Approx(1.0).epsilon(1e-14));
  }

  NrtlParams p{0.568, -54.8, -0.915, 882.0, 0.3};
  auto [g1, g2] = activity_coefficients(1.0, 350.0, p);
  CHECK(std::abs(g1 - 1.0) <= 1e-10);
  auto [h1, h2] = activity_coefficients(0.0, 350.0, p);
  CHECK(std::abs(h2 - 1.0) <= 1e-10);

  CHECK_THROWS_AS(activity_coefficients(-0.1, 350.0, p), std::domain_error);
  CHECK_THROWS_AS(activity_coefficients(1.1, 350.0, p), std::domain_error);
}

TEST_CASE("activity coefficients: infinite-dilution limit") {
  NrtlParams p{0.568, -54.8, -0.915, 882.0, 0.3};
  const double T = 350.0;
  auto [t12, t21] = tau_eval(T, p);
  const double ln_g1_inf = t21 + t12 * std::exp(-p.alpha * t12);
  auto [g1, g2] = activity_coefficients(1e-8, T, p);
  CHECK(std::log(g1) == doctest::Approx(ln_g1_inf).epsilon(1e-6));
}

TEST_CASE("vapor pressure: critical identity, monotonicity, oracle") {
  const Mixture m = fixture_ethbenz();
  const PureComponent& eth = m.component1;

  CHECK(vapor_pressure(eth, eth.Tc) == doctest::Approx(eth.Pc).epsilon(1e-12));

  double prev = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double T = eth.T_min + (eth.T_max - eth.T_min) * i / 200.0;
    const double ps = vapor_pressure(eth, T);
    CHECK(ps > prev);
    prev = ps;
  }

  // Frozen values from an independent evaluation of the same expression.
  CHECK(vapor_pressure(eth, 300.0) == doctest::Approx(6596.34863704681).epsilon(1e-10));
  CHECK(vapor_pressure(eth, 350.0) == doctest::Approx(79924.79638339314).epsilon(1e-10));
  CHECK(vapor_pressure(eth, 400.0) == doctest::Approx(482443.56151325046).epsilon(1e-10));
  const PureComponent& ben = m.component2;
  CHECK(vapor_pressure(ben, 353.0) == doctest::Approx(85708.62017861703).epsilon(1e-10));

  CHECK_THROWS_AS(vapor_pressure(eth, eth.T_min - 1.0), std::range_error);
  CHECK_THROWS_AS(vapor_pressure(eth, eth.T_max + 1.0), std::range_error);
}

TEST_CASE("bubble point: pure-component and Raoult reductions") {
  const Mixture m = fixture_ethbenz();
  const double P = 1.0e5;

  const VleState pure = bubble_point(1.0, P, m);
  CHECK(vapor_pressure(m.component1, pure.T) == doctest::Approx(P).epsilon(1e-9));
  CHECK(pure.x1V == doctest::Approx(1.0).epsilon(1e-9));

  Mixture ideal = m;
  ideal.nrtl = {0.0, 0.0, 0.0, 0.0, 0.3};
  const double x1 = 0.37;
  const VleState s = bubble_point(x1, P, ideal);
  const double ps1 = vapor_pressure(ideal.component1, s.T);
  const double ps2 = vapor_pressure(ideal.component2, s.T);
  CHECK(x1 * ps1 + (1 - x1) * ps2 == doctest::Approx(P).epsilon(1e-9));
  CHECK(s.x1V == doctest::Approx(x1 * ps1 / P).epsilon(1e-12));

  CHECK_THROWS_AS(bubble_point(0.5, -1.0, m), std::domain_error);
  CHECK_THROWS_AS(bubble_point(1.5, P, m), std::domain_error);
}

TEST_CASE("bubble point: plug-back residuals on a 20x2 grid") {
  for (const Mixture& m : fixture_mixtures()) {
    for (double P : {0.5e5, 1.5e5}) {
      for (int i = 0; i < 20; ++i) {
        const double x1 = 0.01 + (0.99 - 0.01) * i / 19.0;
        const VleState s = bubble_point(x1, P, m);
        const double ps1 = vapor_pressure(m.component1, s.T);
        const double ps2 = vapor_pressure(m.component2, s.T);
        const double r1 = std::abs(s.x1V * s.P - s.x1L * s.gamma1 * ps1) / s.P;
        const double r2 =
            std::abs((1 - s.x1V) * s.P - (1 - s.x1L) * s.gamma2 * ps2) / s.P;
        CHECK(r1 <= 1e-9);
        CHECK(r2 <= 1e-9);
        CHECK(s.gamma1 > 0.0);
        CHECK(s.gamma2 > 0.0);
        CHECK(s.x1V >= 0.0);
        CHECK(s.x1V <= 1.0);
      }
    }
  }
}

TEST_CASE("Gibbs-Duhem at fixed temperature") {
  const Mixture m = fixture_ethbenz();
  const double T = 350.0;
  const double h = 1e-6;
  for (int i = 1; i <= 20; ++i) {
    const double x = i / 21.0;
    auto [g1p, g2p] = activity_coefficients(x + h, T, m.nrtl);
    auto [g1m, g2m] = activity_coefficients(x - h, T, m.nrtl);
    const double d1 = (std::log(g1p) - std::log(g1m)) / (2 * h);
    const double d2 = (std::log(g2p) - std::log(g2m)) / (2 * h);
    CHECK(std::abs(x * d1 + (1 - x) * d2) <= 1e-6);
  }
}

TEST_CASE("swap symmetry: relabeling components mirrors the state") {
  const Mixture m = fixture_ethbenz();
  Mixture swapped = m;
  swapped.component1 = m.component2;
  swapped.component2 = m.component1;
  swapped.nrtl = {m.nrtl.A21, m.nrtl.B21, m.nrtl.A12, m.nrtl.B12, m.nrtl.alpha};

  for (double P : {0.7e5, 1.2e5}) {
    for (double x1 : {0.1, 0.35, 0.5, 0.8}) {
      const VleState a = bubble_point(x1, P, m);
      const VleState b = bubble_point(1.0 - x1, P, swapped);
      CHECK(a.T == doctest::Approx(b.T).epsilon(1e-9));
      CHECK(a.x1V == doctest::Approx(1.0 - b.x1V).epsilon(1e-9));
      CHECK(a.gamma1 == doctest::Approx(b.gamma2).epsilon(1e-9));
    }
  }
}

TEST_CASE("no root in bracket raises a convergence error with diagnostics") {
  const Mixture m = fixture_ethbenz();
  // Far above any achievable pressure inside the validity range.
  CHECK_THROWS_AS(bubble_point(0.5, 5.0e7, m), ConvergenceError);
  try {
    bubble_point(0.5, 5.0e7, m);
  } catch (const ConvergenceError& e) {
    CHECK(e.bracket_lo < e.bracket_hi);
  }
}

TEST_CASE("fixture mixtures pass validation and show declared azeotropy") {
  for (const Mixture& m : fixture_mixtures()) {
    validate(m.component1);
    validate(m.component2);
    int sign_changes = 0;
    double prev = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double x = 0.01 + (0.99 - 0.01) * i / 19.0;
      const VleState s = bubble_point(x, 1.0e5, m);
      const double d = s.x1V - s.x1L;
      if (i > 0 && d * prev < 0.0) ++sign_changes;
      prev = d;
    }
    if (m.azeotrope == AzeotropeType::None)
      CHECK(sign_changes == 0);
    else
      CHECK(sign_changes >= 1);
  }
}

}  // TEST_SUITE
