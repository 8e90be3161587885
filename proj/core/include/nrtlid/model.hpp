#ifndef NRTLID_MODEL_HPP
#define NRTLID_MODEL_HPP

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nrtlid/thermo.hpp"

namespace nrtlid {

// Measured response variables, in report order.
enum class ResponseVariable { X1V, Temperature };

const char* response_variable_name(ResponseVariable v);
const char* response_variable_unit(ResponseVariable v);

// Which responses are observed and how noisy each one is.
struct ResponseSpec {
  std::vector<ResponseVariable> variables;
  Eigen::VectorXd sigma;  // per-variable measurement noise std

  void validate() const;
};

inline ResponseSpec spec_x1v(double sigma_x) {
  ResponseSpec s;
  s.variables = {ResponseVariable::X1V};
  s.sigma = Eigen::VectorXd::Constant(1, sigma_x);
  return s;
}

inline ResponseSpec spec_x1v_t(double sigma_x, double sigma_t) {
  ResponseSpec s;
  s.variables = {ResponseVariable::X1V, ResponseVariable::Temperature};
  s.sigma.resize(2);
  s.sigma << sigma_x, sigma_t;
  return s;
}

// Parametric steady-state response model y(u, theta). Everything downstream
// of thermo (estimation, OED, Monte Carlo) works against this interface so
// the same machinery runs on surrogate models in tests.
class ResponseModel {
 public:
  virtual ~ResponseModel() = default;

  virtual Eigen::Index control_dim() const = 0;
  virtual Eigen::Index response_dim() const = 0;
  virtual Eigen::Index param_dim() const = 0;

  virtual Eigen::VectorXd response(const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& theta) const = 0;
  // dy/dtheta, response_dim x param_dim (all parameters; callers mask).
  virtual Eigen::MatrixXd response_jacobian(const Eigen::VectorXd& u,
                                            const Eigen::VectorXd& theta) const = 0;

  // Box for design (control) variables, used by experimental design.
  virtual Eigen::VectorXd control_lower() const = 0;
  virtual Eigen::VectorXd control_upper() const = 0;
};

// Bubble-point VLE response model over a mixture: u = (x1L, P), theta =
// (A12, B12, A21, B21, alpha), responses selected by the ResponseSpec.
class VleModel final : public ResponseModel {
 public:
  VleModel(Mixture mixture, ResponseSpec spec);

  Eigen::Index control_dim() const override { return 2; }
  Eigen::Index response_dim() const override {
    return static_cast<Eigen::Index>(spec_.variables.size());
  }
  Eigen::Index param_dim() const override { return kNrtlParamCount; }

  Eigen::VectorXd response(const Eigen::VectorXd& u,
                           const Eigen::VectorXd& theta) const override;
  Eigen::MatrixXd response_jacobian(const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& theta) const override;

  Eigen::VectorXd control_lower() const override;
  Eigen::VectorXd control_upper() const override;

  void set_control_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

  const Mixture& mixture() const { return mixture_; }
  const ResponseSpec& spec() const { return spec_; }

 private:
  Mixture mixture_;
  ResponseSpec spec_;
  Eigen::VectorXd control_lo_;
  Eigen::VectorXd control_hi_;
};

Eigen::VectorXd nrtl_to_vector(const NrtlParams& p);
NrtlParams nrtl_from_vector(const Eigen::VectorXd& v);

// Evaluate the model on every design row; result is N_mu x N_y.
Eigen::MatrixXd model_responses(const ResponseModel& model,
                                const Eigen::MatrixXd& U,
                                const Eigen::VectorXd& theta);

}  // namespace nrtlid

#endif
