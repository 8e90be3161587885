#ifndef NRTLID_SENSITIVITY_HPP
#define NRTLID_SENSITIVITY_HPP

#include <vector>

#include <Eigen/Core>

#include "nrtlid/model.hpp"

namespace nrtlid {

// Stacked sensitivity matrix S = dY/dtheta over a design. Rows are
// experiment-major, variable-minor; columns are the active parameters in
// model order (masked-out parameters contribute no column).
Eigen::MatrixXd sensitivity_matrix(const ResponseModel& model,
                                   const Eigen::MatrixXd& U,
                                   const Eigen::VectorXd& theta,
                                   const std::vector<bool>& mask);

enum class SensitivityScaling { NoiseScaled, YaoScaled };

// Column j scaled by theta_active[j]; row r divided by row_divisors[r]
// (per-row sigma for NoiseScaled, per-row predicted response for YaoScaled).
Eigen::MatrixXd scale_sensitivity(const Eigen::MatrixXd& S,
                                  const Eigen::VectorXd& theta_active,
                                  SensitivityScaling scaling,
                                  const Eigen::VectorXd& row_divisors);

// Per-variable sigma expanded to one entry per stacked response row.
Eigen::VectorXd expand_sigma_rows(const Eigen::VectorXd& sigma,
                                  Eigen::Index n_experiments);

std::vector<bool> all_active(Eigen::Index n);
std::vector<int> active_indices(const std::vector<bool>& mask);
Eigen::VectorXd masked(const Eigen::VectorXd& full, const std::vector<bool>& mask);

}  // namespace nrtlid

#endif
