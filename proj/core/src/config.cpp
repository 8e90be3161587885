#include "nrtlid/config.hpp"

#include <fstream>

#include <json.hpp>

#include "nrtlid/errors.hpp"
#include "nrtlid/fixtures.hpp"

namespace nrtlid {

using nlohmann::json;

Eigen::MatrixXd GridSpec::build() const {
  if (x1_count < 1 || pressures.empty())
    throw ConfigError("grid: need at least one x1 point and one pressure");
  if (!(x1_min < x1_max)) throw ConfigError("grid: x1_min must be < x1_max");
  Eigen::MatrixXd U(x1_count * static_cast<int>(pressures.size()), 2);
  int row = 0;
  for (double P : pressures) {
    for (int i = 0; i < x1_count; ++i) {
      const double x = x1_count == 1
                           ? 0.5 * (x1_min + x1_max)
                           : x1_min + (x1_max - x1_min) * double(i) / double(x1_count - 1);
      U.row(row++) << x, P;
    }
  }
  return U;
}

MeasScenarioConfig named_measurement_scenario(const std::string& label) {
  // Accuracy pairs: default = [1e-3 mol/mol, 0.03 K], precise = [2e-4, 0.01].
  if (label == "worst") return {label, spec_x1v(1e-3)};
  if (label == "xv_precise") return {label, spec_x1v(2e-4)};
  if (label == "xvT_default") return {label, spec_x1v_t(1e-3, 0.03)};
  if (label == "best") return {label, spec_x1v_t(2e-4, 0.01)};
  throw ConfigError("unknown measurement scenario: " + label);
}

const Mixture& RunConfig::resolve_mixture(const std::string& label) const {
  const auto it = mixtures.find(label);
  if (it == mixtures.end()) throw ConfigError("unknown mixture label: " + label);
  return it->second;
}

namespace {

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError("missing numeric field: " + key);
  return j[key].get<double>();
}

std::string require_string(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_string())
    throw ConfigError("missing string field: " + key);
  return j[key].get<std::string>();
}

PureComponent parse_component(const json& j) {
  PureComponent c;
  c.name = require_string(j, "name");
  c.Tc = require_number(j, "Tc_K");
  c.Pc = require_number(j, "Pc_Pa");
  const auto& w = j.at("wagner");
  if (!w.is_array() || w.size() != 4)
    throw ConfigError(c.name + ": wagner must hold 4 coefficients");
  for (int i = 0; i < 4; ++i) c.wagner[static_cast<std::size_t>(i)] = w[i].get<double>();
  const auto& tv = j.at("T_valid_K");
  if (!tv.is_array() || tv.size() != 2)
    throw ConfigError(c.name + ": T_valid_K must hold [min, max]");
  c.T_min = tv[0].get<double>();
  c.T_max = tv[1].get<double>();
  validate(c);
  return c;
}

AzeotropeType parse_azeotrope(const std::string& s) {
  if (s == "none") return AzeotropeType::None;
  if (s == "pressure_max") return AzeotropeType::PressureMax;
  if (s == "pressure_min") return AzeotropeType::PressureMin;
  if (s == "double") return AzeotropeType::Double;
  throw ConfigError("unknown azeotrope type: " + s);
}

Mixture parse_mixture(const json& j) {
  Mixture m;
  m.label = require_string(j, "label");
  m.component1 = parse_component(j.at("component1"));
  m.component2 = parse_component(j.at("component2"));
  if (m.component1.name == m.component2.name)
    throw ConfigError(m.label + ": components must be distinct");
  const auto& n = j.at("nrtl");
  m.nrtl.A12 = require_number(n, "A12");
  m.nrtl.B12 = require_number(n, "B12_K");
  m.nrtl.A21 = require_number(n, "A21");
  m.nrtl.B21 = require_number(n, "B21_K");
  m.nrtl.alpha = require_number(n, "alpha");
  if (j.contains("azeotrope")) m.azeotrope = parse_azeotrope(j["azeotrope"]);
  return m;
}

GridSpec parse_grid(const json& j) {
  GridSpec g;
  g.x1_count = j.value("x1_count", 20);
  g.x1_min = j.value("x1_min", 0.01);
  g.x1_max = j.value("x1_max", 0.99);
  if (!j.contains("pressures_Pa") || !j["pressures_Pa"].is_array())
    throw ConfigError("grid: pressures_Pa array required");
  for (const auto& p : j["pressures_Pa"]) g.pressures.push_back(p.get<double>());
  return g;
}

MeasScenarioConfig parse_measurement(const json& j) {
  if (j.is_string()) return named_measurement_scenario(j.get<std::string>());
  MeasScenarioConfig m;
  m.label = j.value("label", "custom");
  ResponseSpec spec;
  if (!j.contains("variables") || !j["variables"].is_array())
    throw ConfigError("measurement scenario: variables array required");
  for (const auto& v : j["variables"]) {
    const std::string name = v.get<std::string>();
    if (name == "x1V")
      spec.variables.push_back(ResponseVariable::X1V);
    else if (name == "T")
      spec.variables.push_back(ResponseVariable::Temperature);
    else
      throw ConfigError("unknown response variable: " + name);
  }
  const auto& s = j.at("sigma");
  if (!s.is_array() || s.size() != spec.variables.size())
    throw ConfigError("measurement scenario: sigma size mismatch");
  spec.sigma.resize(static_cast<Eigen::Index>(s.size()));
  for (Eigen::Index i = 0; i < spec.sigma.size(); ++i) spec.sigma[i] = s[i].get<double>();
  spec.validate();
  m.spec = spec;
  return m;
}

Eigen::MatrixXd parse_design(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(what + ": non-empty array of [x1L, P] pairs required");
  Eigen::MatrixXd U(static_cast<Eigen::Index>(j.size()), 2);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != 2)
      throw ConfigError(what + ": row " + std::to_string(i) + " must be [x1L, P]");
    U(static_cast<Eigen::Index>(i), 0) = j[i][0].get<double>();
    U(static_cast<Eigen::Index>(i), 1) = j[i][1].get<double>();
  }
  return U;
}

Eigen::VectorXd parse_theta(const json& j) {
  Eigen::VectorXd v(kNrtlParamCount);
  v << require_number(j, "A12"), require_number(j, "B12_K"),
      require_number(j, "A21"), require_number(j, "B21_K"),
      require_number(j, "alpha");
  return v;
}

std::vector<RegMethod> parse_reg_list(const json& j) {
  std::vector<RegMethod> out;
  for (const auto& r : j) out.push_back(reg_method_from_name(r.get<std::string>()));
  return out;
}

std::vector<std::string> parse_string_list(const json& j) {
  std::vector<std::string> out;
  for (const auto& s : j) out.push_back(s.get<std::string>());
  return out;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }

  RunConfig cfg;
  try {
    cfg.seed = j.value("seed", 0ULL);
    for (const Mixture& m : fixture_mixtures()) cfg.mixtures[m.label] = m;
    if (j.contains("mixtures"))
      for (const auto& jm : j["mixtures"]) {
        Mixture m = parse_mixture(jm);
        cfg.mixtures[m.label] = m;  // user entries shadow built-ins
      }

    if (j.contains("vle")) {
      const auto& v = j["vle"];
      VleConfig c;
      c.mixture = require_string(v, "mixture");
      c.pressure = v.value("pressure_Pa", 1.0e5);
      c.x1_count = v.value("x1_count", 20);
      c.x1_min = v.value("x1_min", 0.01);
      c.x1_max = v.value("x1_max", 0.99);
      cfg.vle = c;
    }

    if (j.contains("fit")) {
      const auto& f = j["fit"];
      FitConfig c;
      c.mixture = require_string(f, "mixture");
      c.data_csv = require_string(f, "data_csv");
      c.measurement = parse_measurement(f.at("measurement"));
      if (f.contains("theta0")) c.theta0 = parse_theta(f["theta0"]);
      c.alpha_lo = f.value("alpha_lo", 0.0);
      c.alpha_hi = f.value("alpha_hi", 2.0);
      if (f.contains("fixed")) c.fixed = parse_string_list(f["fixed"]);
      cfg.fit = c;
    }

    if (j.contains("oed")) {
      const auto& o = j["oed"];
      OedConfig c;
      c.mixture = require_string(o, "mixture");
      c.measurement = parse_measurement(o.at("measurement"));
      if (o.contains("theta")) c.theta = parse_theta(o["theta"]);
      c.design = parse_design(o.at("design"), "oed.design");
      if (o.contains("criterion")) {
        const std::string cr = o["criterion"].get<std::string>();
        c.criterion = cr == "A" ? Criterion::A
                      : cr == "D" ? Criterion::D
                      : cr == "E" ? Criterion::E
                                  : throw ConfigError("unknown criterion: " + cr);
      }
      if (o.contains("fixed")) c.fixed = parse_string_list(o["fixed"]);
      cfg.oed = c;
    }

    if (j.contains("mc")) {
      const auto& m = j["mc"];
      McConfig c;
      c.mixture = require_string(m, "mixture");
      c.n_mc = m.value("n_mc", 100);
      c.noise_scale = m.value("noise_scale", 1.0);
      c.alpha_lo = m.value("alpha_lo", 0.0);
      c.alpha_hi = m.value("alpha_hi", 2.0);
      c.alpha_wrong_lo = m.value("alpha_wrong_lo", 0.1);
      c.alpha_wrong_hi = m.value("alpha_wrong_hi", 0.6);
      c.measurement_grid = parse_grid(m.at("measurement_grid"));
      c.prediction_grid = parse_grid(m.at("prediction_grid"));
      for (const auto& s : m.at("measurement_scenarios"))
        c.measurement_scenarios.push_back(parse_measurement(s));
      c.parameter_scenarios = parse_string_list(m.at("parameter_scenarios"));
      if (m.contains("regularization"))
        c.regularization = parse_reg_list(m["regularization"]);
      else
        c.regularization = {RegMethod::None};
      cfg.mc = c;
    }

    if (j.contains("soed")) {
      const auto& s = j["soed"];
      SoedConfig c;
      c.mixture = require_string(s, "mixture");
      c.n_mc = s.value("n_mc", 100);
      c.n_iterations = s.value("n_iterations", 15);
      c.noise_scale = s.value("noise_scale", 1.0);
      c.alpha_lo = s.value("alpha_lo", 0.1);
      c.alpha_hi = s.value("alpha_hi", 0.6);
      c.alpha_wrong_lo = s.value("alpha_wrong_lo", 0.1);
      c.alpha_wrong_hi = s.value("alpha_wrong_hi", 0.6);
      if (s.contains("criterion")) {
        const std::string cr = s["criterion"].get<std::string>();
        c.criterion = cr == "A" ? Criterion::A
                      : cr == "D" ? Criterion::D
                      : cr == "E" ? Criterion::E
                                  : throw ConfigError("unknown criterion: " + cr);
      }
      c.initial_design = parse_design(s.at("initial_design"), "soed.initial_design");
      c.prediction_grid = parse_grid(s.at("prediction_grid"));
      for (const auto& ms : s.at("measurement_scenarios"))
        c.measurement_scenarios.push_back(parse_measurement(ms));
      c.parameter_scenarios = parse_string_list(s.at("parameter_scenarios"));
      if (s.contains("regularization"))
        c.regularization = parse_reg_list(s["regularization"]);
      else
        c.regularization = {RegMethod::None};
      cfg.soed = c;
    }
  } catch (const json::exception& e) {
    throw ConfigError("config structure error: " + std::string(e.what()));
  }

  if (!cfg.vle && !cfg.fit && !cfg.oed && !cfg.mc && !cfg.soed)
    throw ConfigError("config declares no runnable section (vle/fit/oed/mc/soed)");
  return cfg;
}

std::vector<ParamScenario> resolve_param_scenarios(
    const std::vector<std::string>& labels, const Eigen::VectorXd& theta_true,
    double alpha_wrong_lo, double alpha_wrong_hi) {
  const std::vector<ParamScenario> all =
      case_study_param_scenarios(theta_true, alpha_wrong_lo, alpha_wrong_hi);
  std::vector<ParamScenario> out;
  for (const std::string& label : labels) {
    if (label == "*") {
      out.insert(out.end(), all.begin(), all.end());
      continue;
    }
    bool found = false;
    for (const auto& s : all)
      if (s.label == label) {
        out.push_back(s);
        found = true;
        break;
      }
    if (!found) throw ConfigError("unknown parameter scenario: " + label);
  }
  if (out.empty()) throw ConfigError("no parameter scenarios selected");
  return out;
}

}  // namespace nrtlid
