#include "nrtlid/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "nrtlid/errors.hpp"
#include "nrtlid/stats.hpp"

namespace nrtlid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundActiveTol = 1e-12;
constexpr double kFimConditionLimit = 1e14;

Eigen::VectorXd clamp_to(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Stacked weighted residual vector r with r_k = (y_model - y_meas)/sigma,
// experiment-major. Returns false when the model cannot be evaluated.
bool weighted_residuals(const ResponseModel& model, const Eigen::VectorXd& theta,
                        const MeasurementSet& data, Eigen::VectorXd& r) {
  const Eigen::Index ny = model.response_dim();
  r.resize(data.U.rows() * ny);
  for (Eigen::Index mu = 0; mu < data.U.rows(); ++mu) {
    Eigen::VectorXd y;
    try {
      y = model.response(data.U.row(mu), theta);
    } catch (const std::exception&) {
      return false;
    }
    for (Eigen::Index i = 0; i < ny; ++i) {
      r[mu * ny + i] = (y[i] - data.Ym(mu, i)) / data.sigma[i];
      if (!std::isfinite(r[mu * ny + i])) return false;
    }
  }
  return true;
}

}  // namespace

void MeasurementSet::validate(const ResponseModel& model) const {
  if (U.rows() != Ym.rows())
    throw std::invalid_argument("MeasurementSet: U and Ym row counts differ");
  if (U.rows() == 0) throw std::invalid_argument("MeasurementSet: empty design");
  if (Ym.cols() != model.response_dim() || sigma.size() != model.response_dim())
    throw std::invalid_argument("MeasurementSet: response dimension mismatch");
  if ((sigma.array() <= 0.0).any())
    throw std::invalid_argument("MeasurementSet: sigma must be positive");
  if (!Ym.allFinite())
    throw std::invalid_argument("MeasurementSet: non-finite measurement");
}

Bounds nrtl_default_bounds(double alpha_lo, double alpha_hi) {
  Bounds b;
  b.lower.resize(kNrtlParamCount);
  b.upper.resize(kNrtlParamCount);
  b.lower << -100.0, -1.5e5, -100.0, -1.5e5, alpha_lo;
  b.upper << 100.0, 1.5e5, 100.0, 1.5e5, alpha_hi;
  return b;
}

double wls_objective(const ResponseModel& model, const Eigen::VectorXd& theta,
                     const MeasurementSet& data) {
  data.validate(model);
  const Eigen::Index ny = model.response_dim();
  double phi = 0.0;
  for (Eigen::Index mu = 0; mu < data.U.rows(); ++mu) {
    Eigen::VectorXd y;
    try {
      y = model.response(data.U.row(mu), theta);
    } catch (const std::exception& e) {
      throw NumericalError("wls_objective: experiment " + std::to_string(mu) +
                           ": " + e.what());
    }
    for (Eigen::Index i = 0; i < ny; ++i) {
      const double e = (y[i] - data.Ym(mu, i)) / data.sigma[i];
      phi += e * e;
    }
  }
  return phi;
}

FitResult fit_wls(const ResponseModel& model, const Eigen::VectorXd& theta0,
                  const Bounds& bounds, const std::vector<bool>& mask,
                  const MeasurementSet& data, const FitOptions& options) {
  data.validate(model);
  if (static_cast<Eigen::Index>(mask.size()) != model.param_dim())
    throw std::invalid_argument("fit_wls: mask size mismatch");
  const auto idx = active_indices(mask);
  if (idx.empty()) throw std::invalid_argument("fit_wls: no active parameters");
  if (theta0.size() != model.param_dim())
    throw std::invalid_argument("fit_wls: theta0 size mismatch");
  if (bounds.lower.size() != theta0.size() || bounds.upper.size() != theta0.size())
    throw std::invalid_argument("fit_wls: bounds size mismatch");
  for (int j : idx)
    if (!(theta0[j] >= bounds.lower[j] && theta0[j] <= bounds.upper[j]))
      throw std::invalid_argument("fit_wls: theta0 outside bounds at index " +
                                  std::to_string(j));

  const Eigen::Index na = static_cast<Eigen::Index>(idx.size());
  const Eigen::VectorXd lo = masked(bounds.lower, mask);
  const Eigen::VectorXd hi = masked(bounds.upper, mask);
  const Eigen::VectorXd sigma_rows = expand_sigma_rows(data.sigma, data.U.rows());

  Eigen::VectorXd theta = theta0;
  Eigen::VectorXd a = masked(theta, mask);  // active parameters

  auto scatter = [&](const Eigen::VectorXd& act) {
    Eigen::VectorXd full = theta0;
    for (Eigen::Index k = 0; k < na; ++k) full[idx[k]] = act[k];
    return full;
  };

  FitResult out;
  out.mask = mask;

  Eigen::VectorXd r;
  if (!weighted_residuals(model, theta, data, r))
    throw NumericalError("fit_wls: model evaluation failed at initial point");
  double phi = r.squaredNorm();
  out.phi_trace.push_back(phi);

  double lambda = options.lambda_init;
  bool converged = false;
  int iter = 0;

  for (; iter < options.max_iterations; ++iter) {
    // Weighted Jacobian over active parameters.
    Eigen::MatrixXd S;
    try {
      S = sensitivity_matrix(model, data.U, theta, mask);
    } catch (const std::exception& e) {
      throw NumericalError(std::string("fit_wls: jacobian failure: ") + e.what());
    }
    const Eigen::MatrixXd J = sigma_rows.cwiseInverse().asDiagonal() * S;

    const Eigen::VectorXd g = 2.0 * J.transpose() * r;
    const Eigen::VectorXd pg = a - clamp_to(a - g, lo, hi);
    if (pg.lpNorm<Eigen::Infinity>() <= options.gradient_tol || phi == 0.0) {
      converged = true;
      break;
    }

    const Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd diag = JtJ.diagonal();
    // Guard zero curvature directions so the damped system stays definite.
    const double dmax = diag.maxCoeff();
    for (Eigen::Index k = 0; k < na; ++k)
      diag[k] = std::max(diag[k], dmax > 0.0 ? 1e-14 * dmax : 1.0);

    bool stepped = false;
    while (lambda <= options.lambda_max) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * diag;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      Eigen::VectorXd delta;
      bool solvable = ldlt.info() == Eigen::Success;
      if (solvable) {
        delta = ldlt.solve(-J.transpose() * r);
        solvable = delta.allFinite();
      }
      if (!solvable) {  // damped retry
        lambda *= options.lambda_grow;
        continue;
      }

      const Eigen::VectorXd cand = clamp_to(a + delta, lo, hi);
      const Eigen::VectorXd step = cand - a;
      const double rel_step =
          step.lpNorm<Eigen::Infinity>() /
          std::max(a.lpNorm<Eigen::Infinity>(), 1.0);

      Eigen::VectorXd r_cand;
      double phi_cand = kInf;
      if (weighted_residuals(model, scatter(cand), data, r_cand))
        phi_cand = r_cand.squaredNorm();

      if (phi_cand < phi) {
        a = cand;
        theta = scatter(a);
        r = r_cand;
        phi = phi_cand;
        out.phi_trace.push_back(phi);
        lambda = std::max(lambda * options.lambda_shrink, 1e-14);
        stepped = true;
        if (rel_step <= options.step_tol) converged = true;
        break;
      }
      if (rel_step <= options.step_tol) {
        // Trust region collapsed onto the current point.
        converged = true;
        break;
      }
      lambda *= options.lambda_grow;
    }
    if (converged) {
      ++iter;
      break;
    }
    if (!stepped) break;  // damping exhausted; leave converged = false
  }

  out.theta = theta;
  out.phi = phi;
  out.converged = converged || phi == 0.0;
  out.n_iterations = iter;

  // Bound-activity flags (exact at projection, tolerance for scale).
  out.at_bound.assign(idx.size(), false);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double span = hi[static_cast<Eigen::Index>(k)] - lo[static_cast<Eigen::Index>(k)];
    const double tol = kBoundActiveTol * std::max(span, 1.0);
    if (a[static_cast<Eigen::Index>(k)] - lo[static_cast<Eigen::Index>(k)] <= tol ||
        hi[static_cast<Eigen::Index>(k)] - a[static_cast<Eigen::Index>(k)] <= tol)
      out.at_bound[k] = true;
  }

  // Covariance over interior active parameters; bound-active parameters are
  // treated as fixed for CI purposes (zero rows/columns).
  out.covariance = Eigen::MatrixXd::Zero(na, na);
  std::vector<Eigen::Index> interior;
  for (Eigen::Index k = 0; k < na; ++k)
    if (!out.at_bound[static_cast<std::size_t>(k)]) interior.push_back(k);
  if (!interior.empty()) {
    Eigen::MatrixXd S;
    try {
      S = sensitivity_matrix(model, data.U, theta, mask);
    } catch (const std::exception& e) {
      throw NumericalError(std::string("fit_wls: jacobian failure: ") + e.what());
    }
    Eigen::MatrixXd Si(S.rows(), static_cast<Eigen::Index>(interior.size()));
    for (std::size_t k = 0; k < interior.size(); ++k)
      Si.col(static_cast<Eigen::Index>(k)) = S.col(interior[k]);
    const Eigen::MatrixXd Ci = covariance_matrix(Si, data.sigma, data.U.rows());
    for (std::size_t p = 0; p < interior.size(); ++p)
      for (std::size_t q = 0; q < interior.size(); ++q)
        out.covariance(interior[p], interior[q]) =
            Ci(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
  }

  out.dof = degrees_of_freedom(static_cast<int>(data.U.rows()),
                               static_cast<int>(na),
                               static_cast<int>(model.response_dim()));
  const Eigen::MatrixXd Yhat = model_responses(model, data.U, theta);
  out.s_y = estimate_measurement_error(Yhat - data.Ym, out.dof);
  return out;
}

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& S,
                                  const Eigen::VectorXd& sigma,
                                  Eigen::Index n_experiments) {
  if (S.rows() != sigma.size() * n_experiments)
    throw std::invalid_argument("covariance_matrix: row count mismatch");
  const Eigen::VectorXd w = expand_sigma_rows(sigma, n_experiments).cwiseInverse();
  const Eigen::MatrixXd Jw = w.asDiagonal() * S;
  const Eigen::MatrixXd fim = Jw.transpose() * Jw;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim);
  if (es.info() != Eigen::Success)
    throw NumericalError("covariance_matrix: eigendecomposition failed");
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > kFimConditionLimit)
    throw NumericalError("covariance_matrix: information matrix singular (cond > 1e14)");

  const Eigen::MatrixXd C = fim.llt().solve(
      Eigen::MatrixXd::Identity(fim.rows(), fim.cols()));
  return 0.5 * (C + C.transpose());
}

double degrees_of_freedom(int n_mu, int n_theta_active, int n_y) {
  if (n_mu <= 0 || n_y <= 0 || n_theta_active < 0)
    throw std::domain_error("degrees_of_freedom: counts must be positive");
  const double dof = double(n_mu) - double(n_theta_active) / double(n_y);
  if (dof <= 0.0)
    throw std::domain_error("degrees_of_freedom: non-positive result");
  return dof;
}

Eigen::VectorXd estimate_measurement_error(const Eigen::MatrixXd& residuals,
                                           double dof) {
  if (!(dof > 0.0))
    throw std::domain_error("estimate_measurement_error: dof must be positive");
  Eigen::VectorXd s(residuals.cols());
  for (Eigen::Index i = 0; i < residuals.cols(); ++i)
    s[i] = std::sqrt(residuals.col(i).squaredNorm() / dof);
  return s;
}

Eigen::VectorXd parameter_ci(const Eigen::MatrixXd& C, double dof, double beta) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::domain_error("parameter_ci: beta must lie in (0, 1)");
  const double t = t_quantile(dof, 0.5 * (1.0 + beta));
  return (C.diagonal().cwiseMax(0.0)).cwiseSqrt() * t;
}

PredictionBand prediction_band(const ResponseModel& model,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& theta,
                               const std::vector<bool>& mask,
                               const Eigen::MatrixXd& C, double dof,
                               double beta) {
  const auto idx = active_indices(mask);
  if (C.rows() != static_cast<Eigen::Index>(idx.size()) || C.rows() != C.cols())
    throw std::invalid_argument("prediction_band: covariance shape mismatch");

  PredictionBand out;
  out.y = model.response(u, theta);
  const Eigen::MatrixXd J_full = model.response_jacobian(u, theta);
  Eigen::MatrixXd J(J_full.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k)
    J.col(static_cast<Eigen::Index>(k)) = J_full.col(idx[k]);

  out.sigma_y = (J * C * J.transpose()).diagonal().cwiseMax(0.0).cwiseSqrt();
  const double t = t_quantile(dof, 0.5 * (1.0 + beta));
  out.half_width = out.sigma_y * t;
  return out;
}

}  // namespace nrtlid
