#ifndef NRTLID_ESTIMATION_HPP
#define NRTLID_ESTIMATION_HPP

#include <vector>

#include <Eigen/Core>

#include "nrtlid/model.hpp"
#include "nrtlid/sensitivity.hpp"

namespace nrtlid {

// Experimental data block: controls, measured responses, and the
// per-variable measurement noise std that defines the WLS weights.
struct MeasurementSet {
  Eigen::MatrixXd U;      // N_mu x N_u
  Eigen::MatrixXd Ym;     // N_mu x N_y, stored unclipped
  Eigen::VectorXd sigma;  // N_y

  void validate(const ResponseModel& model) const;
};

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

Bounds nrtl_default_bounds(double alpha_lo = 0.0, double alpha_hi = 2.0);

struct FitOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-8;   // projected-gradient inf norm
  double step_tol = 1e-12;      // relative step
  double lambda_init = 1e-3;
  double lambda_shrink = 0.25;
  double lambda_grow = 4.0;
  double lambda_max = 1e14;
};

struct FitResult {
  Eigen::VectorXd theta;        // full parameter vector, fixed entries untouched
  std::vector<bool> mask;       // active flags used in the fit
  double phi = 0.0;             // final weighted objective
  Eigen::MatrixXd covariance;   // N_active x N_active (zero rows/cols for bound-active)
  Eigen::VectorXd s_y;          // per-variable residual error estimate
  double dof = 0.0;
  bool converged = false;
  int n_iterations = 0;
  std::vector<double> phi_trace;   // objective after each accepted step
  std::vector<bool> at_bound;      // per active parameter, exactly on a bound
};

// Weighted least squares objective sum_mu e^T C_M^-1 e with diagonal C_M
// from the measurement sigma.
double wls_objective(const ResponseModel& model, const Eigen::VectorXd& theta,
                     const MeasurementSet& data);

// Box-bounded Levenberg-Marquardt over the active parameters. Accepted
// steps never increase the objective; convergence means projected-gradient
// inf-norm <= gradient_tol or relative step <= step_tol.
FitResult fit_wls(const ResponseModel& model, const Eigen::VectorXd& theta0,
                  const Bounds& bounds, const std::vector<bool>& mask,
                  const MeasurementSet& data, const FitOptions& options = {});

// Linearized parameter covariance (S^T C_M^-1 S)^-1, symmetrized.
// Throws NumericalError when the information matrix is numerically singular
// (condition number above 1e14).
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& S,
                                  const Eigen::VectorXd& sigma,
                                  Eigen::Index n_experiments);

// DOF = N_mu - N_theta / N_y.
double degrees_of_freedom(int n_mu, int n_theta_active, int n_y);

// Residual-based estimate of the per-variable measurement error,
// s_i = sqrt(sum_mu e_mu,i^2 / DOF). Residuals are N_mu x N_y.
Eigen::VectorXd estimate_measurement_error(const Eigen::MatrixXd& residuals,
                                           double dof);

// Per-parameter confidence half-widths sqrt(C_jj) * t(DOF, (1+beta)/2).
Eigen::VectorXd parameter_ci(const Eigen::MatrixXd& C, double dof, double beta);

struct PredictionBand {
  Eigen::VectorXd y;           // predicted responses at u
  Eigen::VectorXd sigma_y;     // linearized prediction std
  Eigen::VectorXd half_width;  // sigma_y * t(DOF, (1+beta)/2)
};

// Linearized prediction band at a single control point; C is the covariance
// over the active parameters (as produced by fit_wls / covariance_matrix).
PredictionBand prediction_band(const ResponseModel& model,
                               const Eigen::VectorXd& u,
                               const Eigen::VectorXd& theta,
                               const std::vector<bool>& mask,
                               const Eigen::MatrixXd& C, double dof,
                               double beta);

}  // namespace nrtlid

#endif
