#include "nrtlid/sensitivity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nrtlid/errors.hpp"

namespace nrtlid {

std::vector<bool> all_active(Eigen::Index n) {
  return std::vector<bool>(static_cast<std::size_t>(n), true);
}

std::vector<int> active_indices(const std::vector<bool>& mask) {
  std::vector<int> idx;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask[j]) idx.push_back(static_cast<int>(j));
  return idx;
}

Eigen::VectorXd masked(const Eigen::VectorXd& full, const std::vector<bool>& mask) {
  const auto idx = active_indices(mask);
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = full[idx[k]];
  return out;
}

Eigen::MatrixXd sensitivity_matrix(const ResponseModel& model,
                                   const Eigen::MatrixXd& U,
                                   const Eigen::VectorXd& theta,
                                   const std::vector<bool>& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != model.param_dim())
    throw std::invalid_argument("sensitivity_matrix: mask size mismatch");
  const auto idx = active_indices(mask);
  const Eigen::Index ny = model.response_dim();
  Eigen::MatrixXd S(U.rows() * ny, static_cast<Eigen::Index>(idx.size()));
  for (Eigen::Index mu = 0; mu < U.rows(); ++mu) {
    const Eigen::MatrixXd J = model.response_jacobian(U.row(mu), theta);
    for (std::size_t k = 0; k < idx.size(); ++k)
      S.block(mu * ny, static_cast<Eigen::Index>(k), ny, 1) = J.col(idx[k]);
  }
  for (Eigen::Index r = 0; r < S.rows(); ++r)
    for (Eigen::Index c = 0; c < S.cols(); ++c)
      if (!std::isfinite(S(r, c)))
        throw NumericalError("sensitivity_matrix: non-finite entry at row " +
                             std::to_string(r) + ", column " + std::to_string(c));
  return S;
}

Eigen::MatrixXd scale_sensitivity(const Eigen::MatrixXd& S,
                                  const Eigen::VectorXd& theta_active,
                                  SensitivityScaling /*scaling*/,
                                  const Eigen::VectorXd& row_divisors) {
  if (theta_active.size() != S.cols())
    throw std::invalid_argument("scale_sensitivity: theta size mismatch");
  if (row_divisors.size() != S.rows())
    throw std::invalid_argument("scale_sensitivity: row divisor size mismatch");
  if ((row_divisors.array() == 0.0).any())
    throw std::domain_error("scale_sensitivity: zero row divisor");
  // The NoiseScaled and YaoScaled variants differ only in what the caller
  // supplies as divisors (sigma rows vs predicted-response rows).
  return row_divisors.cwiseInverse().asDiagonal() * S * theta_active.asDiagonal();
}

Eigen::VectorXd expand_sigma_rows(const Eigen::VectorXd& sigma,
                                  Eigen::Index n_experiments) {
  Eigen::VectorXd rows(sigma.size() * n_experiments);
  for (Eigen::Index mu = 0; mu < n_experiments; ++mu)
    rows.segment(mu * sigma.size(), sigma.size()) = sigma;
  return rows;
}

}  // namespace nrtlid
