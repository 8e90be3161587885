#include "nrtlid/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "nrtlid/config.hpp"
#include "nrtlid/csv.hpp"
#include "nrtlid/errors.hpp"
#include "nrtlid/estimation.hpp"

namespace nrtlid::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string scenario_filter;
};

int resolve_threads(const CommonOptions& opt) {
  if (opt.threads) return std::max(1, *opt.threads);
  if (const char* env = std::getenv("NRTLID_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

json report_to_json(const McReport& r, const ResponseSpec& spec) {
  json j;
  j["iteration"] = r.iteration;
  j["w_bar"] = r.w_bar;
  j["q95_theta"] = r.q95_theta;
  j["q95_y"] = r.q95_y;
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    const std::string name = response_variable_name(spec.variables[i]);
    j["s_bar"][name] = r.s_bar[static_cast<Eigen::Index>(i)];
    j["sigma_bar_y"][name] = r.sigma_bar_y[static_cast<Eigen::Index>(i)];
  }
  if (std::isfinite(r.d_u)) j["d_u"] = r.d_u;
  if (std::isfinite(r.n_ident_mean)) {
    j["n_identifiable_mean"] = r.n_ident_mean;
    j["n_identifiable_std"] = r.n_ident_std;
  }
  j["n_failed"] = r.n_failed;
  j["n_mc"] = r.n_mc;
  j["failure_alarm"] = r.failure_alarm;
  return j;
}

// Report CSV columns are fixed across scenarios; variables absent from a
// scenario leave their cells empty.
const std::vector<std::string> kReportColumns = {
    "scenario",        "mixture",          "meas_scenario", "param_scenario",
    "reg",             "iteration_1",      "n_mc_1",        "n_failed_1",
    "w_bar_1",         "q95_theta_1",      "q95_y_1",       "s_x1V_molmol",
    "s_T_K",           "sigma_y_x1V_molmol", "sigma_y_T_K",  "n_ident_mean_1",
    "n_ident_std_1",   "d_u_1"};

std::vector<std::string> report_row(const std::string& scenario_label,
                                    const std::string& mixture,
                                    const std::string& meas,
                                    const std::string& param,
                                    const std::string& reg,
                                    const McReport& r,
                                    const ResponseSpec& spec) {
  std::string s_x = "", s_t = "", sig_x = "", sig_t = "";
  for (std::size_t i = 0; i < spec.variables.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (spec.variables[i] == ResponseVariable::X1V) {
      s_x = format_double(r.s_bar[idx]);
      sig_x = format_double(r.sigma_bar_y[idx]);
    } else {
      s_t = format_double(r.s_bar[idx]);
      sig_t = format_double(r.sigma_bar_y[idx]);
    }
  }
  return {scenario_label,
          mixture,
          meas,
          param,
          reg,
          std::to_string(r.iteration),
          std::to_string(r.n_mc),
          std::to_string(r.n_failed),
          format_double(r.w_bar),
          format_double(r.q95_theta),
          format_double(r.q95_y),
          s_x,
          s_t,
          sig_x,
          sig_t,
          std::isfinite(r.n_ident_mean) ? format_double(r.n_ident_mean) : "",
          std::isfinite(r.n_ident_std) ? format_double(r.n_ident_std) : "",
          std::isfinite(r.d_u) ? format_double(r.d_u) : ""};
}

bool scenario_selected(const std::string& label, const std::string& filter) {
  return filter.empty() || label.find(filter) != std::string::npos;
}

void write_summary(const fs::path& out_dir, const json& summary) {
  std::ofstream out(out_dir / "summary.json", std::ios::binary);
  out << summary.dump(2) << '\n';
}

int run_vle(const RunConfig& cfg, const CommonOptions& opt) {
  if (!cfg.vle) throw ConfigError("config lacks a vle section");
  const VleConfig& v = *cfg.vle;
  const Mixture& m = cfg.resolve_mixture(v.mixture);

  CsvWriter csv(fs::path(opt.out_dir) / "vle_curve.csv");
  csv.header({"x1L_molmol", "P_Pa", "T_K", "x1V_molmol", "gamma1_1", "gamma2_1"});
  json rows = json::array();
  for (int i = 0; i < v.x1_count; ++i) {
    const double x = v.x1_count == 1
                         ? 0.5 * (v.x1_min + v.x1_max)
                         : v.x1_min + (v.x1_max - v.x1_min) * double(i) / double(v.x1_count - 1);
    const VleState s = bubble_point(x, v.pressure, m);
    csv.row({format_double(s.x1L), format_double(s.P), format_double(s.T),
             format_double(s.x1V), format_double(s.gamma1), format_double(s.gamma2)});
    rows.push_back({{"x1L", s.x1L}, {"T", s.T}, {"x1V", s.x1V}});
  }
  json summary;
  summary["subcommand"] = "vle";
  summary["mixture"] = v.mixture;
  summary["pressure_Pa"] = v.pressure;
  summary["points"] = rows;
  write_summary(opt.out_dir, summary);
  return kExitOk;
}

std::vector<bool> mask_from_fixed(const std::vector<std::string>& fixed) {
  std::vector<bool> mask(kNrtlParamCount, true);
  for (const std::string& name : fixed) {
    bool found = false;
    for (int j = 0; j < kNrtlParamCount; ++j)
      if (name == kNrtlParamNames[j]) {
        mask[static_cast<std::size_t>(j)] = false;
        found = true;
      }
    if (!found) throw ConfigError("unknown parameter name in fixed list: " + name);
  }
  return mask;
}

MeasurementSet load_fit_data(const fs::path& csv_path, const ResponseSpec& spec) {
  const CsvTable table = read_csv(csv_path);
  const int ix = table.column_index("x1L_molmol");
  const int ip = table.column_index("P_Pa");
  if (ix < 0 || ip < 0)
    throw ConfigError("fit data: columns x1L_molmol and P_Pa required");
  std::vector<int> yc;
  for (ResponseVariable v : spec.variables) {
    const std::string col = std::string(response_variable_name(v)) + "_" +
                            response_variable_unit(v);
    const int c = table.column_index(col);
    if (c < 0) throw ConfigError("fit data: column missing: " + col);
    yc.push_back(c);
  }
  MeasurementSet data;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  data.U.resize(n, 2);
  data.Ym.resize(n, static_cast<Eigen::Index>(yc.size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& cells = table.rows[static_cast<std::size_t>(r)];
    data.U(r, 0) = std::stod(cells.at(static_cast<std::size_t>(ix)));
    data.U(r, 1) = std::stod(cells.at(static_cast<std::size_t>(ip)));
    for (std::size_t k = 0; k < yc.size(); ++k)
      data.Ym(r, static_cast<Eigen::Index>(k)) =
          std::stod(cells.at(static_cast<std::size_t>(yc[k])));
  }
  data.sigma = spec.sigma;
  return data;
}

int run_fit(const RunConfig& cfg, const CommonOptions& opt) {
  if (!cfg.fit) throw ConfigError("config lacks a fit section");
  const FitConfig& f = *cfg.fit;
  const Mixture& m = cfg.resolve_mixture(f.mixture);
  const VleModel model(m, f.measurement.spec);

  const MeasurementSet data = load_fit_data(f.data_csv, f.measurement.spec);
  const Eigen::VectorXd theta0 = f.theta0 ? *f.theta0 : nrtl_to_vector(m.nrtl);
  const Bounds bounds = nrtl_default_bounds(f.alpha_lo, f.alpha_hi);
  const std::vector<bool> mask = mask_from_fixed(f.fixed);

  const FitResult fit = fit_wls(model, theta0, bounds, mask, data);
  const auto idx = active_indices(mask);
  const Eigen::VectorXd ci = parameter_ci(fit.covariance, fit.dof, 0.95);

  CsvWriter params_csv(fs::path(opt.out_dir) / "fit_parameters.csv");
  params_csv.header({"parameter", "value_mixed", "ci95_mixed", "estimated_1"});
  Eigen::Index k = 0;
  for (int j = 0; j < kNrtlParamCount; ++j) {
    const bool active = mask[static_cast<std::size_t>(j)];
    params_csv.row({kNrtlParamNames[j], format_double(fit.theta[j]),
                    active ? format_double(ci[k]) : "",
                    active ? "1" : "0"});
    if (active) ++k;
  }

  CsvWriter cov_csv(fs::path(opt.out_dir) / "fit_covariance.csv");
  cov_csv.header({"param_i", "param_j", "cov_mixed"});
  for (std::size_t p = 0; p < idx.size(); ++p)
    for (std::size_t q = 0; q < idx.size(); ++q)
      cov_csv.row({kNrtlParamNames[idx[p]], kNrtlParamNames[idx[q]],
                   format_double(fit.covariance(static_cast<Eigen::Index>(p),
                                                static_cast<Eigen::Index>(q)))});

  json summary;
  summary["subcommand"] = "fit";
  summary["mixture"] = f.mixture;
  summary["converged"] = fit.converged;
  summary["phi"] = fit.phi;
  summary["dof"] = fit.dof;
  summary["n_iterations"] = fit.n_iterations;
  for (int j = 0; j < kNrtlParamCount; ++j)
    summary["theta"][kNrtlParamNames[j]] = fit.theta[j];
  for (std::size_t i = 0; i < f.measurement.spec.variables.size(); ++i)
    summary["s_y"][response_variable_name(f.measurement.spec.variables[i])] =
        fit.s_y[static_cast<Eigen::Index>(i)];
  write_summary(opt.out_dir, summary);
  if (!fit.converged) return kExitNumericalError;
  return kExitOk;
}

int run_oed(const RunConfig& cfg, const CommonOptions& opt) {
  if (!cfg.oed) throw ConfigError("config lacks an oed section");
  const OedConfig& o = *cfg.oed;
  const Mixture& m = cfg.resolve_mixture(o.mixture);
  const VleModel model(m, o.measurement.spec);
  const Eigen::VectorXd theta = o.theta ? *o.theta : nrtl_to_vector(m.nrtl);
  const std::vector<bool> mask = mask_from_fixed(o.fixed);

  const DesignCandidate cand =
      design_next(model, o.design, theta, mask, o.measurement.spec.sigma,
                  o.criterion, 1, 21);

  CsvWriter csv(fs::path(opt.out_dir) / "oed_design.csv");
  csv.header({"x1L_molmol", "P_Pa", "criterion", "crit_value_mixed",
              "start_index_1"});
  for (Eigen::Index r = 0; r < cand.u_new.rows(); ++r)
    csv.row({format_double(cand.u_new(r, 0)), format_double(cand.u_new(r, 1)),
             criterion_name(cand.criterion), format_double(cand.value),
             std::to_string(cand.start_index)});

  json summary;
  summary["subcommand"] = "oed";
  summary["mixture"] = o.mixture;
  summary["criterion"] = criterion_name(cand.criterion);
  summary["value"] = cand.value;
  summary["u_new"] = {{"x1L", cand.u_new(0, 0)}, {"P_Pa", cand.u_new(0, 1)}};
  write_summary(opt.out_dir, summary);
  return kExitOk;
}

int run_mc_cmd(const RunConfig& cfg, const CommonOptions& opt) {
  if (!cfg.mc) throw ConfigError("config lacks an mc section");
  const McConfig& c = *cfg.mc;
  const Mixture& m = cfg.resolve_mixture(c.mixture);
  const Eigen::VectorXd theta_true = nrtl_to_vector(m.nrtl);
  const int threads = resolve_threads(opt);

  CsvWriter csv(fs::path(opt.out_dir) / "mc_report.csv");
  csv.header(kReportColumns);
  json scenarios = json::array();

  const auto param_scenarios = resolve_param_scenarios(
      c.parameter_scenarios, theta_true, c.alpha_wrong_lo, c.alpha_wrong_hi);

  for (const MeasScenarioConfig& meas : c.measurement_scenarios) {
    for (const ParamScenario& ps : param_scenarios) {
      for (RegMethod reg : c.regularization) {
        const std::string label = c.mixture + ":" + meas.label + ":" +
                                  ps.label + ":" + reg_method_name(reg);
        if (!scenario_selected(label, opt.scenario_filter)) continue;

        const VleModel model(m, meas.spec);
        McSettings s;
        s.theta_true = theta_true;
        s.U = c.measurement_grid.build();
        s.Up = c.prediction_grid.build();
        s.sigma = meas.spec.sigma;
        s.param_scenario = ps;
        s.reg = reg;
        s.theta_bounds = nrtl_default_bounds(c.alpha_lo, c.alpha_hi);
        s.n_mc = c.n_mc;
        s.seed = opt.seed.value_or(cfg.seed);
        s.threads = threads;
        s.noise_scale = c.noise_scale;

        const McReport rep = run_mc(model, s);
        if (rep.failure_alarm)
          std::cerr << "warning: " << label << ": " << rep.n_failed << "/"
                    << rep.n_mc << " replicates failed\n";
        csv.row(report_row(label, c.mixture, meas.label, ps.label,
                           reg_method_name(reg), rep, meas.spec));
        json js = report_to_json(rep, meas.spec);
        js["scenario"] = label;
        scenarios.push_back(js);
      }
    }
  }
  if (scenarios.empty())
    throw ConfigError("scenario filter matched nothing: " + opt.scenario_filter);

  json summary;
  summary["subcommand"] = "mc";
  summary["mixture"] = c.mixture;
  summary["seed"] = opt.seed.value_or(cfg.seed);
  summary["threads"] = threads;
  summary["scenarios"] = scenarios;
  write_summary(opt.out_dir, summary);
  return kExitOk;
}

int run_soed_cmd(const RunConfig& cfg, const CommonOptions& opt) {
  if (!cfg.soed) throw ConfigError("config lacks a soed section");
  const SoedConfig& c = *cfg.soed;
  const Mixture& m = cfg.resolve_mixture(c.mixture);
  const Eigen::VectorXd theta_true = nrtl_to_vector(m.nrtl);
  const int threads = resolve_threads(opt);

  CsvWriter csv(fs::path(opt.out_dir) / "soed_report.csv");
  csv.header(kReportColumns);
  json scenarios = json::array();

  const auto param_scenarios = resolve_param_scenarios(
      c.parameter_scenarios, theta_true, c.alpha_wrong_lo, c.alpha_wrong_hi);

  for (const MeasScenarioConfig& meas : c.measurement_scenarios) {
    for (const ParamScenario& ps : param_scenarios) {
      for (RegMethod reg : c.regularization) {
        const std::string label = c.mixture + ":" + meas.label + ":" +
                                  ps.label + ":" + reg_method_name(reg);
        if (!scenario_selected(label, opt.scenario_filter)) continue;

        const VleModel model(m, meas.spec);
        McSettings s;
        s.theta_true = theta_true;
        s.Up = c.prediction_grid.build();
        s.sigma = meas.spec.sigma;
        s.param_scenario = ps;
        s.reg = reg;
        s.theta_bounds = nrtl_default_bounds(c.alpha_lo, c.alpha_hi);
        s.n_mc = c.n_mc;
        s.seed = opt.seed.value_or(cfg.seed);
        s.threads = threads;
        s.noise_scale = c.noise_scale;

        const std::vector<McReport> reports = run_soed_pe(
            model, s, c.initial_design, c.n_iterations, c.criterion);
        json iters = json::array();
        for (const McReport& rep : reports) {
          if (rep.failure_alarm)
            std::cerr << "warning: " << label << " iteration " << rep.iteration
                      << ": " << rep.n_failed << "/" << rep.n_mc
                      << " replicates failed\n";
          csv.row(report_row(label, c.mixture, meas.label, ps.label,
                             reg_method_name(reg), rep, meas.spec));
          iters.push_back(report_to_json(rep, meas.spec));
        }
        json js;
        js["scenario"] = label;
        js["iterations"] = iters;
        scenarios.push_back(js);
      }
    }
  }
  if (scenarios.empty())
    throw ConfigError("scenario filter matched nothing: " + opt.scenario_filter);

  json summary;
  summary["subcommand"] = "soed";
  summary["mixture"] = c.mixture;
  summary["seed"] = opt.seed.value_or(cfg.seed);
  summary["threads"] = threads;
  summary["scenarios"] = scenarios;
  write_summary(opt.out_dir, summary);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Binary NRTL VLE identifiability toolbox"};
  app.require_subcommand(1);

  CommonOptions opt;
  std::uint64_t seed_flag = 0;
  int threads_flag = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "configuration file (JSON)")
        ->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", seed_flag, "base RNG seed (overrides config)")
        ->each([&](const std::string&) { opt.seed = seed_flag; });
    sub->add_option("--threads", threads_flag,
                    "worker threads (overrides NRTLID_THREADS)")
        ->each([&](const std::string&) { opt.threads = threads_flag; });
    sub->add_option("--scenario", opt.scenario_filter,
                    "only run scenarios whose label contains this string");
  };

  CLI::App* vle = app.add_subcommand("vle", "bubble-point curve over a grid");
  CLI::App* fit = app.add_subcommand("fit", "parameter estimation on a dataset");
  CLI::App* oed = app.add_subcommand("oed", "suggest the next experiment");
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo scenario study");
  CLI::App* soed = app.add_subcommand("soed", "sequential design loop study");
  for (CLI::App* sub : {vle, fit, oed, mc, soed}) add_common(sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return kExitOk;
    }
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    std::filesystem::create_directories(opt.out_dir);
    const RunConfig cfg = load_config(opt.config_path);
    if (vle->parsed()) return run_vle(cfg, opt);
    if (fit->parsed()) return run_fit(cfg, opt);
    if (oed->parsed()) return run_oed(cfg, opt);
    if (mc->parsed()) return run_mc_cmd(cfg, opt);
    if (soed->parsed()) return run_soed_cmd(cfg, opt);
    std::cerr << "error: no subcommand\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumericalError;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace nrtlid::cli
