#include "nrtlid/model.hpp"

#include <stdexcept>

#include "nrtlid/errors.hpp"

namespace nrtlid {

const char* response_variable_name(ResponseVariable v) {
  return v == ResponseVariable::X1V ? "x1V" : "T";
}

const char* response_variable_unit(ResponseVariable v) {
  return v == ResponseVariable::X1V ? "molmol" : "K";
}

void ResponseSpec::validate() const {
  if (variables.empty())
    throw std::invalid_argument("ResponseSpec: at least one variable required");
  if (sigma.size() != static_cast<Eigen::Index>(variables.size()))
    throw std::invalid_argument("ResponseSpec: sigma size mismatch");
  if ((sigma.array() <= 0.0).any())
    throw std::invalid_argument("ResponseSpec: sigma must be positive");
}

VleModel::VleModel(Mixture mixture, ResponseSpec spec)
    : mixture_(std::move(mixture)), spec_(std::move(spec)) {
  spec_.validate();
  control_lo_.resize(2);
  control_hi_.resize(2);
  control_lo_ << 0.01, 0.5e5;   // x1L [mol/mol], P [Pa]
  control_hi_ << 0.99, 1.5e5;
}

void VleModel::set_control_bounds(const Eigen::VectorXd& lower,
                                  const Eigen::VectorXd& upper) {
  if (lower.size() != 2 || upper.size() != 2 ||
      (lower.array() >= upper.array()).any())
    throw std::invalid_argument("VleModel: bad control bounds");
  control_lo_ = lower;
  control_hi_ = upper;
}

Eigen::VectorXd VleModel::control_lower() const { return control_lo_; }
Eigen::VectorXd VleModel::control_upper() const { return control_hi_; }

Eigen::VectorXd VleModel::response(const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& theta) const {
  if (u.size() != 2) throw std::invalid_argument("VleModel: control must be (x1L, P)");
  Mixture m = mixture_;
  m.nrtl = nrtl_from_vector(theta);
  const VleState s = bubble_point(u[0], u[1], m);
  Eigen::VectorXd y(response_dim());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y[i] = spec_.variables[i] == ResponseVariable::X1V ? s.x1V : s.T;
  return y;
}

Eigen::MatrixXd VleModel::response_jacobian(const Eigen::VectorXd& u,
                                            const Eigen::VectorXd& theta) const {
  if (u.size() != 2) throw std::invalid_argument("VleModel: control must be (x1L, P)");
  Mixture m = mixture_;
  m.nrtl = nrtl_from_vector(theta);
  const BubbleDerivatives d = bubble_point_with_derivatives(u[0], u[1], m);
  Eigen::MatrixXd J(response_dim(), kNrtlParamCount);
  for (Eigen::Index i = 0; i < J.rows(); ++i) {
    const auto& row = spec_.variables[i] == ResponseVariable::X1V
                          ? d.dx1V_dtheta
                          : d.dT_dtheta;
    for (int j = 0; j < kNrtlParamCount; ++j) J(i, j) = row[j];
  }
  return J;
}

Eigen::VectorXd nrtl_to_vector(const NrtlParams& p) {
  Eigen::VectorXd v(kNrtlParamCount);
  v << p.A12, p.B12, p.A21, p.B21, p.alpha;
  return v;
}

NrtlParams nrtl_from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kNrtlParamCount)
    throw std::invalid_argument("nrtl_from_vector: need 5 entries");
  return {v[0], v[1], v[2], v[3], v[4]};
}

Eigen::MatrixXd model_responses(const ResponseModel& model,
                                const Eigen::MatrixXd& U,
                                const Eigen::VectorXd& theta) {
  Eigen::MatrixXd Y(U.rows(), model.response_dim());
  for (Eigen::Index mu = 0; mu < U.rows(); ++mu) {
    try {
      Y.row(mu) = model.response(U.row(mu), theta).transpose();
    } catch (const std::exception& e) {
      throw NumericalError("model_responses: experiment " + std::to_string(mu) +
                           ": " + e.what());
    }
  }
  return Y;
}

}  // namespace nrtlid
