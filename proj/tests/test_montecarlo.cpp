#include <doctest.h>

#include <cmath>

#include "nrtlid/fixtures.hpp"
#include "nrtlid/montecarlo.hpp"
#include "nrtlid/stats.hpp"
#include "support/linear_model.hpp"

using namespace nrtlid;
using nrtlid::testing::LinearModel;
using nrtlid::testing::uniform_controls;
using nrtlid::testing::wide_bounds;

namespace {

McSettings linear_settings(int n_mc, std::uint64_t seed = 101) {
  McSettings s;
  s.theta_true = Eigen::VectorXd(2);
  s.theta_true << 1.0, 2.0;
  s.U = uniform_controls(40);
  s.Up = uniform_controls(21);
  s.sigma = Eigen::VectorXd::Constant(1, 0.1);
  s.theta_bounds = wide_bounds(2);
  s.n_mc = n_mc;
  s.seed = seed;
  s.threads = 2;
  return s;
}

bool reports_equal(const McReport& a, const McReport& b) {
  return a.iteration == b.iteration && a.w_bar == b.w_bar &&
         a.q95_theta == b.q95_theta && a.q95_y == b.q95_y &&
         a.s_bar == b.s_bar && a.sigma_bar_y == b.sigma_bar_y &&
         ((std::isnan(a.d_u) && std::isnan(b.d_u)) || a.d_u == b.d_u) &&
         a.n_ident_mean == b.n_ident_mean && a.n_failed == b.n_failed;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("compute_metrics: saturated indicators give Q = 1") {
  MetricsInput mi;
  const int n_rep = 5;
  mi.theta = Eigen::MatrixXd::Zero(n_rep, 2);
  mi.theta_ci = Eigen::MatrixXd::Constant(n_rep, 2, 1.0);
  mi.theta_true = Eigen::VectorXd::Zero(2);
  mi.y_true = Eigen::MatrixXd::Zero(3, 1);
  for (int r = 0; r < n_rep; ++r) {
    mi.predictions.push_back(Eigen::MatrixXd::Zero(3, 1));
    mi.band_half_widths.push_back(Eigen::MatrixXd::Constant(3, 1, 0.5));
    mi.sigma_y.push_back(Eigen::MatrixXd::Constant(3, 1, 0.2));
  }
  mi.s_y = Eigen::MatrixXd::Constant(n_rep, 1, 0.05);
  mi.n_identifiable = Eigen::VectorXi::Constant(n_rep, 2);

  const McReport rep = compute_metrics(mi);
  CHECK(rep.q95_theta == 1.0);
  CHECK(rep.q95_y == 1.0);
  CHECK(rep.s_bar[0] == doctest::Approx(0.05));
  CHECK(rep.sigma_bar_y[0] == doctest::Approx(0.2));
  CHECK(std::isnan(rep.d_u));
  CHECK(rep.n_ident_mean == doctest::Approx(2.0));
  CHECK(rep.n_ident_std == 0.0);
}

TEST_CASE("compute_metrics: single pooled design at the box center") {
  MetricsInput mi;
  mi.theta = Eigen::MatrixXd::Zero(1, 1);
  mi.theta_ci = Eigen::MatrixXd::Constant(1, 1, 1.0);
  mi.theta_true = Eigen::VectorXd::Zero(1);
  mi.y_true = Eigen::MatrixXd::Zero(1, 1);
  mi.predictions.push_back(Eigen::MatrixXd::Zero(1, 1));
  mi.band_half_widths.push_back(Eigen::MatrixXd::Ones(1, 1));
  mi.sigma_y.push_back(Eigen::MatrixXd::Ones(1, 1));
  mi.s_y = Eigen::MatrixXd::Zero(1, 1);
  mi.n_identifiable = Eigen::VectorXi::Constant(1, 1);
  mi.designs = Eigen::MatrixXd(1, 2);
  mi.designs << 0.5, 1.0e5;
  mi.design_lower = Eigen::VectorXd(2);
  mi.design_lower << 0.01, 0.5e5;
  mi.design_upper = Eigen::VectorXd(2);
  mi.design_upper << 0.99, 1.5e5;

  const McReport rep = compute_metrics(mi);
  CHECK(rep.d_u == doctest::Approx(5.0 / 12.0).epsilon(1e-4));
}

TEST_CASE("compute_metrics: exact normal-quantile marginals give W near 1") {
  const int n = 200;
  MetricsInput mi;
  mi.theta.resize(n, 2);
  for (int r = 0; r < n; ++r) {
    const double q = normal_quantile((r + 0.5) / n);
    mi.theta(r, 0) = q;
    mi.theta(r, 1) = 3.0 + 0.1 * q;
  }
  mi.theta_ci = Eigen::MatrixXd::Constant(n, 2, 1e9);
  mi.theta_true = Eigen::VectorXd::Zero(2);
  mi.y_true = Eigen::MatrixXd::Zero(1, 1);
  mi.s_y = Eigen::MatrixXd::Zero(n, 1);
  mi.n_identifiable = Eigen::VectorXi::Constant(n, 2);
  for (int r = 0; r < n; ++r) {
    mi.predictions.push_back(Eigen::MatrixXd::Zero(1, 1));
    mi.band_half_widths.push_back(Eigen::MatrixXd::Ones(1, 1));
    mi.sigma_y.push_back(Eigen::MatrixXd::Ones(1, 1));
  }
  CHECK(compute_metrics(mi).w_bar >= 0.999);
}

TEST_CASE("run_mc: noiseless replicate recovers the truth exactly") {
  LinearModel model;
  McSettings s = linear_settings(1);
  s.noise_scale = 0.0;
  const McReport rep = run_mc(model, s);
  CHECK(rep.n_failed == 0);
  CHECK(rep.q95_y == 1.0);
  CHECK(rep.s_bar[0] == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("run_mc: coverage on the linear surrogate at N = 500") {
  LinearModel model;
  const McReport rep = run_mc(model, linear_settings(500));
  CHECK(rep.n_failed == 0);
  CHECK(rep.q95_theta >= 0.92);
  CHECK(rep.q95_theta <= 0.98);
  CHECK(rep.q95_y >= 0.92);
  CHECK(rep.q95_y <= 0.98);
  // Residual error estimate tracks the true noise level.
  CHECK(rep.s_bar[0] == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("run_mc: bit-identical across thread counts") {
  LinearModel model;
  McSettings s1 = linear_settings(60);
  s1.threads = 1;
  McSettings s4 = linear_settings(60);
  s4.threads = 4;
  CHECK(reports_equal(run_mc(model, s1), run_mc(model, s4)));
}

TEST_CASE("run_mc: parameter scenario fixes and excludes a parameter") {
  LinearModel model;
  McSettings s = linear_settings(50);
  s.param_scenario = {"theta2_true", 1, 2.0};
  const McReport rep = run_mc(model, s);
  CHECK(rep.n_failed == 0);
  CHECK(rep.n_ident_mean == doctest::Approx(1.0));
  CHECK(rep.q95_theta >= 0.9);  // only theta1 indicators remain
}

TEST_CASE("run_mc on the VLE fixture: small smoke run") {
  const Mixture m = fixture_ethbenz();
  const VleModel model(m, spec_x1v_t(2e-4, 0.01));
  McSettings s;
  s.theta_true = nrtl_to_vector(m.nrtl);
  {
    Eigen::MatrixXd U(16, 2);
    for (int i = 0; i < 8; ++i) {
      U.row(i) << 0.05 + 0.9 * i / 7.0, 0.5e5;
      U.row(8 + i) << 0.05 + 0.9 * i / 7.0, 1.5e5;
    }
    s.U = U;
    Eigen::MatrixXd Up(8, 2);
    for (int i = 0; i < 8; ++i) Up.row(i) << 0.05 + 0.9 * i / 7.0, 1.0e5;
    s.Up = Up;
  }
  s.sigma = Eigen::VectorXd(2);
  s.sigma << 2e-4, 0.01;
  s.theta_bounds = nrtl_default_bounds();
  s.n_mc = 20;
  s.seed = 7;
  s.threads = 4;
  const McReport rep = run_mc(model, s);
  CHECK(rep.n_failed <= 2);
  CHECK(rep.q95_y >= 0.8);
  CHECK(rep.s_bar[0] == doctest::Approx(2e-4).epsilon(0.35));
}

TEST_CASE("run_soed_pe: zero iterations equals run_mc on the initial design") {
  LinearModel model;
  McSettings s = linear_settings(25);
  const Eigen::MatrixXd init = uniform_controls(12);

  McSettings mc_s = s;
  mc_s.U = init;
  const McReport direct = run_mc(model, mc_s);
  const std::vector<McReport> loop = run_soed_pe(model, s, init, 0);
  REQUIRE(loop.size() == 1);
  CHECK(loop[0].w_bar == direct.w_bar);
  CHECK(loop[0].q95_theta == direct.q95_theta);
  CHECK(loop[0].q95_y == direct.q95_y);
  CHECK(loop[0].s_bar == direct.s_bar);
  CHECK(loop[0].sigma_bar_y == direct.sigma_bar_y);
}

TEST_CASE("run_soed_pe: deterministic and accuracy-improving") {
  LinearModel model;
  McSettings s = linear_settings(15);
  s.threads = 3;
  const Eigen::MatrixXd init = uniform_controls(6, 0.4, 0.6);

  const auto a = run_soed_pe(model, s, init, 5);
  const auto b = run_soed_pe(model, s, init, 5);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(reports_equal(a[i], b[i]));
    CHECK(a[i].iteration == static_cast<int>(i) + 1);
    CHECK(std::isfinite(a[i].d_u));
  }
  // More experiments shrink the mean prediction std.
  CHECK(a.back().sigma_bar_y[0] < a.front().sigma_bar_y[0]);
}

TEST_CASE("case study parameter scenarios: the 16-entry factorial set") {
  Eigen::VectorXd theta(5);
  theta << 0.568, -54.8, -0.915, 882.0, 0.3;
  const auto scenarios = case_study_param_scenarios(theta);
  CHECK(scenarios.size() == 16);
  CHECK(scenarios[0].label == "All");
  CHECK(scenarios[0].fixed_index == -1);
  int n_true = 0, n_wrong = 0;
  for (const auto& s : scenarios) {
    if (s.label.ends_with("_true")) ++n_true;
    if (s.label.ends_with("_lo") || s.label.ends_with("_hi")) ++n_wrong;
  }
  CHECK(n_true == 5);
  CHECK(n_wrong == 10);
  // alpha wrong-fix values are absolute, not multiplicative.
  for (const auto& s : scenarios) {
    if (s.label == "alpha_lo") CHECK(s.fixed_value == 0.1);
    if (s.label == "alpha_hi") CHECK(s.fixed_value == 0.6);
    if (s.label == "B12_lo") CHECK(s.fixed_value == doctest::Approx(0.8 * -54.8));
  }
}

}  // TEST_SUITE
