#ifndef NRTLID_REGULARIZATION_HPP
#define NRTLID_REGULARIZATION_HPP

#include <vector>

#include <Eigen/Core>

namespace nrtlid {

// Outcome of a subset-selection pass. Indices refer to columns of the
// scaled sensitivity matrix handed to the algorithm.
struct IdentifiabilityResult {
  std::vector<int> identifiable;  // selection/priority order
  std::vector<int> fixed;         // rejection order
  std::vector<int> ranking;       // identifiable followed by fixed
  Eigen::VectorXd diagnostics;    // algorithm-specific values (see each op)
};

// Eigenvalue screening of the information matrix Sbar^T Sbar: repeatedly
// drop the parameter dominating the eigenvector of the smallest eigenvalue
// until lambda_min >= eps. Diagnostics: eigenvalues of the final reduced
// information matrix, ascending.
IdentifiabilityResult regularize_e(const Eigen::MatrixXd& Sbar,
                                   double eps = 1e-3);

// Singular-value screening: keep the largest r with sv_1/sv_r <= eps_cond;
// QR with column pivoting supplies the priority order. Diagnostics:
// singular values, descending.
IdentifiabilityResult regularize_svd(const Eigen::MatrixXd& Sbar,
                                     double eps_cond = 1000.0);

// Forward selection with Gram-Schmidt deflation on the Yao-scaled matrix;
// stops when the largest remaining deflated column magnitude drops below
// eps. May select nothing. Diagnostics: magnitude of each column at the
// moment of its selection (selected) or at termination (rejected), in
// ranking order.
IdentifiabilityResult regularize_fs(const Eigen::MatrixXd& Sbar_yao,
                                    double eps = 0.04);

// Exhaustive search for the column subset J maximizing
// det(Sbar(:,J)^T Sbar(:,J)); ties broken by larger subset, then
// lexicographically. Diagnostics: the winning determinant.
IdentifiabilityResult regularize_go(const Eigen::MatrixXd& Sbar);

}  // namespace nrtlid

#endif
