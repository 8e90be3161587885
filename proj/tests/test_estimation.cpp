#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "nrtlid/errors.hpp"
#include "nrtlid/estimation.hpp"
#include "nrtlid/fixtures.hpp"
#include "nrtlid/stats.hpp"
#include "support/linear_model.hpp"

using namespace nrtlid;
using nrtlid::testing::LinearModel;
using nrtlid::testing::uniform_controls;
using nrtlid::testing::wide_bounds;

namespace {

MeasurementSet linear_data(const LinearModel& model, const Eigen::VectorXd& theta,
                           int n, double sigma, RngStream* noise = nullptr) {
  MeasurementSet data;
  data.U = uniform_controls(n);
  data.Ym = model_responses(model, data.U, theta);
  if (noise)
    for (Eigen::Index i = 0; i < data.Ym.rows(); ++i)
      data.Ym(i, 0) = noise->normal(data.Ym(i, 0), sigma);
  data.sigma = Eigen::VectorXd::Constant(1, sigma);
  return data;
}

// Closed-form weighted normal equations for the linear surrogate.
Eigen::VectorXd normal_equations(const MeasurementSet& data) {
  Eigen::MatrixXd X(data.U.rows(), 2);
  X.col(0).setOnes();
  X.col(1) = data.U.col(0);
  return (X.transpose() * X).ldlt().solve(X.transpose() * data.Ym.col(0));
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("wls objective") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 1.0, 2.0;

  MeasurementSet data = linear_data(model, theta, 10, 0.1);
  CHECK(wls_objective(model, theta, data) == doctest::Approx(0.0).scale(1).epsilon(1e-16));

  // Single experiment, e = 0.002, sigma = 0.001 -> phi = 4.
  MeasurementSet one;
  one.U = uniform_controls(1);
  one.Ym.resize(1, 1);
  one.Ym(0, 0) = model.response(one.U.row(0), theta)[0] - 0.002;
  one.sigma = Eigen::VectorXd::Constant(1, 0.001);
  CHECK(wls_objective(model, theta, one) == doctest::Approx(4.0).epsilon(1e-10));

  // Additivity over stacked designs.
  RngStream noise(5, 0);
  MeasurementSet a = linear_data(model, theta, 7, 0.1, &noise);
  MeasurementSet b = linear_data(model, theta, 5, 0.1, &noise);
  MeasurementSet ab;
  ab.U.resize(12, 1);
  ab.U << a.U, b.U;
  ab.Ym.resize(12, 1);
  ab.Ym << a.Ym, b.Ym;
  ab.sigma = a.sigma;
  CHECK(wls_objective(model, theta, ab) ==
        doctest::Approx(wls_objective(model, theta, a) +
                        wls_objective(model, theta, b)).epsilon(1e-12));
}

TEST_CASE("fit_wls: zero-noise fixed point") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 1.0, 2.0;
  MeasurementSet data = linear_data(model, theta, 20, 0.05);

  const FitResult fit = fit_wls(model, theta, wide_bounds(2), all_active(2), data);
  CHECK(fit.converged);
  CHECK(fit.phi <= 1e-16);
  CHECK((fit.theta - theta).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("fit_wls: matches the normal-equations solution") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 0.7, -1.3;
  RngStream noise(17, 0);
  MeasurementSet data = linear_data(model, theta, 25, 0.2, &noise);

  Eigen::VectorXd theta0(2);
  theta0 << 0.0, 0.0;
  const FitResult fit = fit_wls(model, theta0, wide_bounds(2), all_active(2), data);
  const Eigen::VectorXd exact = normal_equations(data);
  CHECK(fit.converged);
  CHECK((fit.theta - exact).lpNorm<Eigen::Infinity>() <= 1e-8);

  // Monotone accepted objective trace.
  for (std::size_t i = 1; i < fit.phi_trace.size(); ++i)
    CHECK(fit.phi_trace[i] <= fit.phi_trace[i - 1]);
}

TEST_CASE("fit_wls: zero-noise recovery on the VLE model") {
  const Mixture m = fixture_ethbenz();
  const VleModel model(m, spec_x1v_t(1e-3, 0.03));
  const Eigen::VectorXd theta_true = nrtl_to_vector(m.nrtl);

  MeasurementSet data;
  Eigen::MatrixXd U(16, 2);
  for (int i = 0; i < 8; ++i) {
    U.row(i) << 0.05 + 0.9 * i / 7.0, 0.5e5;
    U.row(8 + i) << 0.05 + 0.9 * i / 7.0, 1.5e5;
  }
  data.U = U;
  data.Ym = model_responses(model, U, theta_true);
  data.sigma = Eigen::VectorXd(2);
  data.sigma << 1e-3, 0.03;

  const FitResult fit = fit_wls(model, 1.1 * theta_true, nrtl_default_bounds(),
                                all_active(5), data);
  CHECK(fit.converged);
  for (int j = 0; j < 5; ++j)
    CHECK(std::abs(fit.theta[j] - theta_true[j]) <=
          1e-6 * std::max(std::abs(theta_true[j]), 1.0));
}

TEST_CASE("fit_wls: refit from the optimum is idempotent") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 0.7, -1.3;
  RngStream noise(18, 0);
  MeasurementSet data = linear_data(model, theta, 25, 0.2, &noise);

  Eigen::VectorXd theta0(2);
  theta0 << 0.0, 0.0;
  const FitResult first = fit_wls(model, theta0, wide_bounds(2), all_active(2), data);
  const FitResult second = fit_wls(model, first.theta, wide_bounds(2), all_active(2), data);
  CHECK((second.theta - first.theta).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("fit_wls: iteration cap flags non-convergence") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 0.7, -1.3;
  RngStream noise(19, 0);
  MeasurementSet data = linear_data(model, theta, 25, 0.2, &noise);

  FitOptions opts;
  opts.max_iterations = 0;
  Eigen::VectorXd theta0(2);
  theta0 << 50.0, -50.0;
  const FitResult fit = fit_wls(model, theta0, wide_bounds(2), all_active(2), data, opts);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("fit_wls: bounds are honored") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 0.7, -1.3;
  MeasurementSet data = linear_data(model, theta, 25, 0.2);

  Bounds tight;
  tight.lower = Eigen::VectorXd::Constant(2, 0.0);
  tight.upper = Eigen::VectorXd::Constant(2, 0.5);
  Eigen::VectorXd theta0(2);
  theta0 << 0.25, 0.25;
  const FitResult fit = fit_wls(model, theta0, tight, all_active(2), data);
  CHECK(fit.theta[0] >= 0.0);
  CHECK(fit.theta[0] <= 0.5);
  CHECK(fit.theta[1] >= 0.0);
  CHECK(fit.theta[1] <= 0.5);
  // theta2 wants to go negative; it must sit on the lower bound.
  CHECK(fit.theta[1] == 0.0);
  CHECK(fit.at_bound[1]);
}

TEST_CASE("covariance matrix: identities and PSD") {
  Eigen::MatrixXd S5 = Eigen::MatrixXd::Identity(5, 5);
  const Eigen::MatrixXd C5 =
      covariance_matrix(S5, Eigen::VectorXd::Ones(5), 1);
  CHECK((C5 - Eigen::MatrixXd::Identity(5, 5)).norm() <= 1e-12);

  Eigen::MatrixXd S(2, 1);
  S << 1.0, 1.0;
  const Eigen::MatrixXd C =
      covariance_matrix(S, Eigen::VectorXd::Ones(1), 2);
  CHECK(C(0, 0) == doctest::Approx(0.5).epsilon(1e-14));

  // Symmetric and PSD on random tall matrices.
  Eigen::MatrixXd R = Eigen::MatrixXd::Random(12, 4);
  const Eigen::MatrixXd CR = covariance_matrix(R, Eigen::VectorXd::Ones(4), 3);
  CHECK((CR - CR.transpose()).norm() <= 1e-12 * CR.norm());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(CR);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff());

  Eigen::MatrixXd singular(3, 2);
  singular << 1, 1, 1, 1, 1, 1;
  CHECK_THROWS_AS(covariance_matrix(singular, Eigen::VectorXd::Ones(1), 3),
                  NumericalError);
}

TEST_CASE("covariance matrix vs Monte Carlo refits") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 1.0, 2.0;
  const double sigma = 0.3;
  MeasurementSet proto = linear_data(model, theta, 15, sigma);

  const Eigen::MatrixXd S =
      sensitivity_matrix(model, proto.U, theta, all_active(2));
  const Eigen::MatrixXd C = covariance_matrix(S, proto.sigma, proto.U.rows());

  const int n_mc = 2000;
  Eigen::MatrixXd estimates(n_mc, 2);
  for (int r = 0; r < n_mc; ++r) {
    RngStream noise(777, static_cast<std::uint64_t>(r));
    MeasurementSet data = proto;
    for (Eigen::Index i = 0; i < data.Ym.rows(); ++i)
      data.Ym(i, 0) = noise.normal(proto.Ym(i, 0), sigma);
    estimates.row(r) = normal_equations(data).transpose();
  }
  const Eigen::RowVectorXd mean = estimates.colwise().mean();
  Eigen::MatrixXd centered = estimates.rowwise() - mean;
  const Eigen::MatrixXd emp = centered.transpose() * centered / double(n_mc - 1);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(emp(i, j) - C(i, j)) <= 0.15 * std::abs(C(i, j)));
}

TEST_CASE("degrees of freedom") {
  CHECK(degrees_of_freedom(40, 5, 1) == doctest::Approx(35.0));
  CHECK(degrees_of_freedom(40, 5, 2) == doctest::Approx(37.5));
  CHECK(degrees_of_freedom(40, 0, 1) == doctest::Approx(40.0));
  CHECK_THROWS_AS(degrees_of_freedom(2, 4, 1), std::domain_error);
  CHECK_THROWS_AS(degrees_of_freedom(0, 0, 1), std::domain_error);
}

TEST_CASE("measurement error estimate") {
  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(6, 2);
  CHECK(estimate_measurement_error(zeros, 4.0).isZero());

  Eigen::MatrixXd ones(4, 1);
  ones.setOnes();
  CHECK(estimate_measurement_error(ones, 4.0)[0] == doctest::Approx(1.0));

  Eigen::MatrixXd r = Eigen::MatrixXd::Random(9, 2);
  const Eigen::VectorXd s1 = estimate_measurement_error(r, 5.5);
  const Eigen::VectorXd s2 = estimate_measurement_error(2.0 * r, 5.5);
  CHECK((s2 - 2.0 * s1).lpNorm<Eigen::Infinity>() <= 1e-14);

  CHECK_THROWS_AS(estimate_measurement_error(r, 0.0), std::domain_error);
}

TEST_CASE("parameter confidence half-widths") {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, 2);
  C(0, 0) = 2.7e-3;
  C(1, 1) = 5.2e-5;
  const Eigen::VectorXd hw = parameter_ci(C, 35.0, 0.95);
  CHECK(hw[0] == doctest::Approx(0.1055).epsilon(1e-3));
  CHECK(hw[1] == doctest::Approx(0.0146).epsilon(1e-2));

  // Degenerate confidence level: the median quantile of t is zero.
  const Eigen::VectorXd tiny = parameter_ci(C, 35.0, 1e-12);
  CHECK(tiny.lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("prediction band") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 1.0, 2.0;
  Eigen::VectorXd u(1);
  u << 0.0;  // s(u) = (1, 0)

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, 2);
  C(0, 0) = 0.25;
  const PredictionBand band =
      prediction_band(model, u, theta, all_active(2), C, 10.0, 0.95);
  CHECK(band.sigma_y[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(band.half_width[0] ==
        doctest::Approx(0.5 * t_quantile(10.0, 0.975)).epsilon(1e-12));

  // Insensitive point: zero covariance gives a zero-width band.
  const PredictionBand zero =
      prediction_band(model, u, theta, all_active(2),
                      Eigen::MatrixXd::Zero(2, 2), 10.0, 0.95);
  CHECK(zero.sigma_y[0] == 0.0);
}

TEST_CASE("prediction band: empirical coverage on the linear surrogate") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 1.0, 2.0;
  const double sigma = 0.25;
  MeasurementSet proto = linear_data(model, theta, 40, sigma);
  const double dof = degrees_of_freedom(40, 2, 1);

  const Eigen::MatrixXd S =
      sensitivity_matrix(model, proto.U, theta, all_active(2));
  const Eigen::MatrixXd C = covariance_matrix(S, proto.sigma, proto.U.rows());

  Eigen::VectorXd u(1);
  u << 0.31;
  const double y_true = model.response(u, theta)[0];

  const int n_mc = 2000;
  int hits = 0;
  for (int r = 0; r < n_mc; ++r) {
    RngStream noise(4242, static_cast<std::uint64_t>(r));
    MeasurementSet data = proto;
    for (Eigen::Index i = 0; i < data.Ym.rows(); ++i)
      data.Ym(i, 0) = noise.normal(proto.Ym(i, 0), sigma);
    const Eigen::VectorXd est = normal_equations(data);
    Eigen::VectorXd theta_hat(2);
    theta_hat << est[0], est[1];
    const PredictionBand band =
        prediction_band(model, u, theta_hat, all_active(2), C, dof, 0.95);
    if (std::abs(band.y[0] - y_true) <= band.half_width[0]) ++hits;
  }
  const double coverage = double(hits) / n_mc;
  CHECK(coverage >= 0.93);
  CHECK(coverage <= 0.97);
}

TEST_CASE("CI half-widths shrink as 1/sqrt(k) for replicated designs") {
  LinearModel model;
  Eigen::VectorXd theta(2);
  theta << 1.0, 2.0;
  const double sigma = 0.2;
  const Eigen::MatrixXd base = uniform_controls(40);

  auto half_width_for = [&](int k) {
    Eigen::MatrixXd U(base.rows() * k, 1);
    for (int rep = 0; rep < k; ++rep) U.block(rep * base.rows(), 0, base.rows(), 1) = base;
    const Eigen::MatrixXd S = sensitivity_matrix(model, U, theta, all_active(2));
    const Eigen::MatrixXd C =
        covariance_matrix(S, Eigen::VectorXd::Constant(1, sigma), U.rows());
    const double dof = degrees_of_freedom(static_cast<int>(U.rows()), 2, 1);
    return parameter_ci(C, dof, 0.95);
  };

  const Eigen::VectorXd w1 = half_width_for(1);
  const Eigen::VectorXd w4 = half_width_for(4);
  const Eigen::VectorXd w16 = half_width_for(16);
  for (int j = 0; j < 2; ++j) {
    CHECK(w4[j] / w1[j] == doctest::Approx(0.5).epsilon(0.05));
    CHECK(w16[j] / w1[j] == doctest::Approx(0.25).epsilon(0.05));
  }
}

}  // TEST_SUITE
