#ifndef NRTLID_OED_HPP
#define NRTLID_OED_HPP

#include <vector>

#include <Eigen/Core>

#include "nrtlid/model.hpp"

namespace nrtlid {

enum class Criterion { A, D, E };

const char* criterion_name(Criterion c);

// Design-quality value of a stacked sensitivity matrix: trace (A),
// determinant (D), or largest eigenvalue (E) of the parameter covariance
// C = (S^T C_M^-1 S)^-1. Returns +inf when the information matrix is
// numerically singular, ranking such designs worst.
double criterion_value(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma,
                       Eigen::Index n_experiments, Criterion criterion);

struct DesignCandidate {
  Eigen::MatrixXd u_new;  // n_new x N_u
  Criterion criterion{Criterion::A};
  double value = 0.0;
  int start_index = -1;   // multistart seed that produced the optimum
};

// Next-experiment search: minimizes the criterion of S(U_exp + U_new) over
// the n_new new control points with a projected quasi-Newton method from
// n_starts lattice seeds, keeping the best local optimum.
DesignCandidate design_next(const ResponseModel& model,
                            const Eigen::MatrixXd& U_exp,
                            const Eigen::VectorXd& theta,
                            const std::vector<bool>& mask,
                            const Eigen::VectorXd& sigma,
                            Criterion criterion, int n_new = 1,
                            int n_starts = 21);

// Multistart seeds on an inclusive lattice over the control box. For the
// two-dimensional (x1L, P) box this is the 7 x 3 layout.
Eigen::MatrixXd design_seeds(const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, int n_starts);

}  // namespace nrtlid

#endif
