#ifndef NRTLID_MONTECARLO_HPP
#define NRTLID_MONTECARLO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nrtlid/estimation.hpp"
#include "nrtlid/model.hpp"
#include "nrtlid/oed.hpp"

namespace nrtlid {

enum class RegMethod { None, E, GO, SVD, FS, GOWithOed };

const char* reg_method_name(RegMethod m);
RegMethod reg_method_from_name(const std::string& name);

struct RegThresholds {
  double e_eps = 1e-3;
  double svd_cond = 1000.0;
  double fs_eps = 0.04;
};

// Which parameter (if any) is pinned before estimation, and to what value.
struct ParamScenario {
  std::string label = "All";
  int fixed_index = -1;     // -1: estimate everything
  double fixed_value = 0.0;
};

// The 16 parameter scenarios of the factorial study: all free, each
// parameter fixed to its true value, each A/B fixed to 0.8x / 1.2x the
// truth, and alpha fixed to alpha_low / alpha_high.
std::vector<ParamScenario> case_study_param_scenarios(
    const Eigen::VectorXd& theta_true, double alpha_low = 0.1,
    double alpha_high = 0.6);

struct McSettings {
  Eigen::VectorXd theta_true;
  Eigen::MatrixXd U;           // measurement grid
  Eigen::MatrixXd Up;          // prediction grid
  Eigen::VectorXd sigma;       // per-response noise std (weights and noise)
  ParamScenario param_scenario;
  RegMethod reg = RegMethod::None;
  RegThresholds thresholds;
  Bounds theta_bounds;
  int n_mc = 100;
  std::uint64_t seed = 0;
  double beta = 0.95;
  int threads = 1;
  double noise_scale = 1.0;    // 0 generates noiseless data (weights keep sigma)
  FitOptions fit_options;
};

struct McReport {
  int iteration = 0;            // 1-based sOED-PE iteration; 0 for single-shot
  double w_bar = 0.0;           // mean Shapiro-Wilk W over parameter marginals
  double q95_theta = 0.0;       // CI coverage of the true parameters
  double q95_y = 0.0;           // band coverage of the true predictions
  Eigen::VectorXd s_bar;        // mean residual error estimate, per variable
  Eigen::VectorXd sigma_bar_y;  // mean prediction std, per variable
  double d_u = 0.0;             // centered L2 discrepancy of pooled new designs
  double n_ident_mean = 0.0;
  double n_ident_std = 0.0;
  int n_failed = 0;
  int n_mc = 0;
  bool failure_alarm = false;   // failures above 10% of the replicate budget
};

// Raw per-replicate material the metrics are computed from. NaN entries in
// theta / theta_ci mark parameters that were not estimated (or whose CI is
// excluded because the estimate sits exactly on a bound).
struct MetricsInput {
  Eigen::MatrixXd theta;         // n_rep x n_param
  Eigen::MatrixXd theta_ci;      // n_rep x n_param, CI half-widths
  Eigen::VectorXd theta_true;    // n_param
  std::vector<Eigen::MatrixXd> predictions;       // per rep: n_pred x n_y
  std::vector<Eigen::MatrixXd> band_half_widths;  // per rep: n_pred x n_y
  std::vector<Eigen::MatrixXd> sigma_y;           // per rep: n_pred x n_y
  Eigen::MatrixXd y_true;        // n_pred x n_y
  Eigen::MatrixXd s_y;           // n_rep x n_y
  Eigen::VectorXi n_identifiable;  // per rep
  Eigen::MatrixXd designs;       // pooled new designs, k x N_u (may be empty)
  Eigen::VectorXd design_lower;  // control box for discrepancy normalization
  Eigen::VectorXd design_upper;
};

McReport compute_metrics(const MetricsInput& input);

// Repeated generate / perturb / estimate / evaluate cycle on a fixed
// measurement grid. Failed replicates are counted and excluded.
McReport run_mc(const ResponseModel& model, const McSettings& settings);

// Sequential design loop: per replicate, alternate estimation on the
// accumulated data with an optimal next experiment, n_iterations times.
// Returns one report per iteration (a single report when n_iterations = 0,
// equal to run_mc on the initial design).
std::vector<McReport> run_soed_pe(const ResponseModel& model,
                                  const McSettings& settings,
                                  const Eigen::MatrixXd& init_design,
                                  int n_iterations = 15,
                                  Criterion criterion = Criterion::A);

}  // namespace nrtlid

#endif
