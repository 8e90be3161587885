#ifndef NRTLID_CONFIG_HPP
#define NRTLID_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nrtlid/model.hpp"
#include "nrtlid/montecarlo.hpp"
#include "nrtlid/oed.hpp"

namespace nrtlid {

// Rectangular (x1, P) grid: the same liquid fractions repeated at each
// pressure level, pressure-major.
struct GridSpec {
  int x1_count = 20;
  double x1_min = 0.01;
  double x1_max = 0.99;
  std::vector<double> pressures;  // Pa

  Eigen::MatrixXd build() const;
};

struct MeasScenarioConfig {
  std::string label;
  ResponseSpec spec;
};

// Named measurement scenarios: worst = x1V at default accuracy,
// best = (x1V, T) at precise accuracy, plus the two off-diagonal cells.
MeasScenarioConfig named_measurement_scenario(const std::string& label);

struct VleConfig {
  std::string mixture;
  double pressure = 1.0e5;
  int x1_count = 20;
  double x1_min = 0.01;
  double x1_max = 0.99;
};

struct FitConfig {
  std::string mixture;
  std::filesystem::path data_csv;
  MeasScenarioConfig measurement;
  std::optional<Eigen::VectorXd> theta0;  // defaults to the mixture record
  double alpha_lo = 0.0;
  double alpha_hi = 2.0;
  std::vector<std::string> fixed;  // parameter names held at theta0
};

struct OedConfig {
  std::string mixture;
  MeasScenarioConfig measurement;
  std::optional<Eigen::VectorXd> theta;
  Eigen::MatrixXd design;  // existing experiments
  Criterion criterion = Criterion::A;
  std::vector<std::string> fixed;
};

struct McConfig {
  std::string mixture;
  int n_mc = 100;
  double noise_scale = 1.0;
  double alpha_lo = 0.0;
  double alpha_hi = 2.0;
  GridSpec measurement_grid;
  GridSpec prediction_grid;
  std::vector<MeasScenarioConfig> measurement_scenarios;
  std::vector<std::string> parameter_scenarios;  // labels; "*" = all 16
  std::vector<RegMethod> regularization;
  double alpha_wrong_lo = 0.1;
  double alpha_wrong_hi = 0.6;
};

struct SoedConfig {
  std::string mixture;
  int n_mc = 100;
  int n_iterations = 15;
  Criterion criterion = Criterion::A;
  double noise_scale = 1.0;
  double alpha_lo = 0.1;
  double alpha_hi = 0.6;
  Eigen::MatrixXd initial_design;
  GridSpec prediction_grid;
  std::vector<MeasScenarioConfig> measurement_scenarios;
  std::vector<std::string> parameter_scenarios;
  std::vector<RegMethod> regularization;
  double alpha_wrong_lo = 0.1;
  double alpha_wrong_hi = 0.6;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::map<std::string, Mixture> mixtures;  // built-ins plus user entries
  std::optional<VleConfig> vle;
  std::optional<FitConfig> fit;
  std::optional<OedConfig> oed;
  std::optional<McConfig> mc;
  std::optional<SoedConfig> soed;

  const Mixture& resolve_mixture(const std::string& label) const;
};

RunConfig load_config(const std::filesystem::path& path);

// Resolve a parameter-scenario label list ("*" expands to the full
// factorial set) against the mixture's true parameters.
std::vector<ParamScenario> resolve_param_scenarios(
    const std::vector<std::string>& labels, const Eigen::VectorXd& theta_true,
    double alpha_wrong_lo, double alpha_wrong_hi);

}  // namespace nrtlid

#endif
