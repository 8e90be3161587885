#include "nrtlid/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "nrtlid/errors.hpp"
#include "nrtlid/regularization.hpp"
#include "nrtlid/stats.hpp"

namespace nrtlid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_replicates(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int r = 0; r < n; ++r) body(r);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < n; r = next.fetch_add(1)) body(r);
    });
  }
  for (auto& th : pool) th.join();
}

double kahan_mean(const std::vector<double>& values) {
  if (values.empty()) return kNaN;
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / double(values.size());
}

// Per-replicate state produced by one Monte Carlo estimation pass.
struct ReplicateOutcome {
  bool failed = true;
  Eigen::VectorXd theta;     // n_param, NaN where not estimated
  Eigen::VectorXd theta_ci;  // n_param, NaN where excluded
  Eigen::MatrixXd prediction;
  Eigen::MatrixXd half_width;
  Eigen::MatrixXd sigma_y;
  Eigen::VectorXd s_y;
  int n_identifiable = 0;
};

struct EstimationPass {
  Eigen::VectorXd theta_full;
  std::vector<bool> active;     // final active set (post regularization)
  Eigen::MatrixXd covariance;   // over active set
  double dof = 0.0;
  Eigen::VectorXd s_y;
  std::vector<bool> at_bound;   // per active parameter
};

// One estimate on (U, Ym): fit over the scenario mask, optionally subset-
// select and refit with non-identifiable parameters frozen at their
// current estimates.
EstimationPass estimate_once(const ResponseModel& model,
                             const Eigen::MatrixXd& U,
                             const Eigen::MatrixXd& Ym,
                             const McSettings& cfg,
                             const Eigen::VectorXd& theta_start,
                             const std::vector<bool>& scenario_mask) {
  MeasurementSet data{U, Ym, cfg.sigma};
  FitResult fit = fit_wls(model, theta_start, cfg.theta_bounds, scenario_mask,
                          data, cfg.fit_options);
  if (!fit.converged) throw ConvergenceError("estimate_once: fit did not converge");

  std::vector<bool> mask = scenario_mask;
  if (cfg.reg != RegMethod::None) {
    const auto scen_idx = active_indices(scenario_mask);
    const Eigen::MatrixXd S = sensitivity_matrix(model, U, fit.theta, scenario_mask);
    const Eigen::VectorXd theta_act = masked(fit.theta, scenario_mask);

    IdentifiabilityResult sel;
    if (cfg.reg == RegMethod::FS) {
      const Eigen::MatrixXd Yhat = model_responses(model, U, fit.theta);
      Eigen::VectorXd y_rows(S.rows());
      for (Eigen::Index mu = 0; mu < Yhat.rows(); ++mu)
        y_rows.segment(mu * Yhat.cols(), Yhat.cols()) = Yhat.row(mu).transpose();
      const Eigen::MatrixXd Sy =
          scale_sensitivity(S, theta_act, SensitivityScaling::YaoScaled, y_rows);
      sel = regularize_fs(Sy, cfg.thresholds.fs_eps);
    } else {
      const Eigen::VectorXd sigma_rows = expand_sigma_rows(cfg.sigma, U.rows());
      const Eigen::MatrixXd Sb =
          scale_sensitivity(S, theta_act, SensitivityScaling::NoiseScaled, sigma_rows);
      if (cfg.reg == RegMethod::E)
        sel = regularize_e(Sb, cfg.thresholds.e_eps);
      else if (cfg.reg == RegMethod::SVD)
        sel = regularize_svd(Sb, cfg.thresholds.svd_cond);
      else
        sel = regularize_go(Sb);  // GO and GOWithOed
    }

    mask.assign(scenario_mask.size(), false);
    for (int local : sel.identifiable) mask[scen_idx[static_cast<std::size_t>(local)]] = true;

    if (!sel.identifiable.empty() &&
        sel.identifiable.size() < scen_idx.size()) {
      // Refit the reduced problem, non-identifiable entries frozen.
      fit = fit_wls(model, fit.theta, cfg.theta_bounds, mask, data,
                    cfg.fit_options);
      if (!fit.converged)
        throw ConvergenceError("estimate_once: reduced refit did not converge");
    } else if (sel.identifiable.empty()) {
      // Nothing identifiable: keep the estimate, report an empty active set.
      EstimationPass out;
      out.theta_full = fit.theta;
      out.active = mask;
      out.covariance.resize(0, 0);
      out.dof = degrees_of_freedom(static_cast<int>(U.rows()), 0,
                                   static_cast<int>(model.response_dim()));
      const Eigen::MatrixXd Yhat = model_responses(model, U, fit.theta);
      out.s_y = estimate_measurement_error(Yhat - Ym, out.dof);
      return out;
    }
  }

  EstimationPass out;
  out.theta_full = fit.theta;
  out.active = mask;
  out.covariance = fit.covariance;
  out.dof = fit.dof;
  out.s_y = fit.s_y;
  out.at_bound = fit.at_bound;
  return out;
}

ReplicateOutcome evaluate_replicate(const ResponseModel& model,
                                    const McSettings& cfg,
                                    const EstimationPass& pass,
                                    const Eigen::MatrixXd& Yp_true) {
  const Eigen::Index n_param = model.param_dim();
  const Eigen::Index n_pred = cfg.Up.rows();
  const Eigen::Index ny = model.response_dim();

  ReplicateOutcome out;
  out.theta = Eigen::VectorXd::Constant(n_param, kNaN);
  out.theta_ci = Eigen::VectorXd::Constant(n_param, kNaN);
  out.n_identifiable = static_cast<int>(active_indices(pass.active).size());

  const auto idx = active_indices(pass.active);
  Eigen::VectorXd ci_active;
  if (!idx.empty())
    ci_active = parameter_ci(pass.covariance, pass.dof, cfg.beta);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.theta[idx[k]] = pass.theta_full[idx[k]];
    const bool bound_active = k < pass.at_bound.size() && pass.at_bound[k];
    if (!bound_active) out.theta_ci[idx[k]] = ci_active[static_cast<Eigen::Index>(k)];
  }

  out.prediction.resize(n_pred, ny);
  out.half_width.resize(n_pred, ny);
  out.sigma_y.resize(n_pred, ny);
  for (Eigen::Index p = 0; p < n_pred; ++p) {
    const PredictionBand band =
        prediction_band(model, cfg.Up.row(p), pass.theta_full, pass.active,
                        pass.covariance, pass.dof, cfg.beta);
    out.prediction.row(p) = band.y.transpose();
    out.half_width.row(p) = band.half_width.transpose();
    out.sigma_y.row(p) = band.sigma_y.transpose();
  }
  out.s_y = pass.s_y;
  out.failed = false;
  (void)Yp_true;
  return out;
}

std::vector<bool> scenario_mask_of(const ResponseModel& model,
                                   const McSettings& cfg) {
  std::vector<bool> mask(static_cast<std::size_t>(model.param_dim()), true);
  if (cfg.param_scenario.fixed_index >= 0) {
    if (cfg.param_scenario.fixed_index >= model.param_dim())
      throw std::invalid_argument("param scenario index out of range");
    mask[static_cast<std::size_t>(cfg.param_scenario.fixed_index)] = false;
  }
  return mask;
}

Eigen::VectorXd scenario_start(const McSettings& cfg) {
  Eigen::VectorXd theta = cfg.theta_true;
  if (cfg.param_scenario.fixed_index >= 0)
    theta[cfg.param_scenario.fixed_index] = cfg.param_scenario.fixed_value;
  return theta;
}

Eigen::MatrixXd perturb(const Eigen::MatrixXd& Y_true, const Eigen::VectorXd& sigma,
                        double noise_scale, RngStream& stream) {
  Eigen::MatrixXd Ym(Y_true.rows(), Y_true.cols());
  for (Eigen::Index mu = 0; mu < Y_true.rows(); ++mu)
    for (Eigen::Index i = 0; i < Y_true.cols(); ++i)
      Ym(mu, i) = stream.normal(Y_true(mu, i), noise_scale * sigma[i]);
  return Ym;
}

McReport finalize_report(const MetricsInput& input, int n_failed, int n_mc) {
  McReport rep = compute_metrics(input);
  rep.n_failed = n_failed;
  rep.n_mc = n_mc;
  rep.failure_alarm = n_failed > n_mc / 10;
  return rep;
}

}  // namespace

const char* reg_method_name(RegMethod m) {
  switch (m) {
    case RegMethod::None: return "None";
    case RegMethod::E: return "E";
    case RegMethod::GO: return "GO";
    case RegMethod::SVD: return "SVD";
    case RegMethod::FS: return "FS";
    case RegMethod::GOWithOed: return "GO-OED";
  }
  return "?";
}

RegMethod reg_method_from_name(const std::string& name) {
  if (name == "None") return RegMethod::None;
  if (name == "E") return RegMethod::E;
  if (name == "GO") return RegMethod::GO;
  if (name == "SVD") return RegMethod::SVD;
  if (name == "FS") return RegMethod::FS;
  if (name == "GO-OED") return RegMethod::GOWithOed;
  throw ConfigError("unknown regularization method: " + name);
}

std::vector<ParamScenario> case_study_param_scenarios(
    const Eigen::VectorXd& theta_true, double alpha_low, double alpha_high) {
  std::vector<ParamScenario> out;
  out.push_back({"All", -1, 0.0});
  for (int j = 0; j < kNrtlParamCount; ++j)
    out.push_back({std::string(kNrtlParamNames[j]) + "_true", j, theta_true[j]});
  for (int j = 0; j < 4; ++j) {  // A/B perturbations; alpha handled below
    out.push_back({std::string(kNrtlParamNames[j]) + "_lo", j, 0.8 * theta_true[j]});
    out.push_back({std::string(kNrtlParamNames[j]) + "_hi", j, 1.2 * theta_true[j]});
  }
  out.push_back({"alpha_lo", 4, alpha_low});
  out.push_back({"alpha_hi", 4, alpha_high});
  return out;
}

McReport compute_metrics(const MetricsInput& input) {
  McReport rep;
  const Eigen::Index n_rep = input.theta.rows();
  const Eigen::Index n_param = input.theta.cols();
  const Eigen::Index ny = input.y_true.cols();

  // Normality: Shapiro-Wilk per parameter marginal, averaged.
  std::vector<double> w_values;
  for (Eigen::Index j = 0; j < n_param; ++j) {
    std::vector<double> column;
    for (Eigen::Index r = 0; r < n_rep; ++r)
      if (std::isfinite(input.theta(r, j))) column.push_back(input.theta(r, j));
    if (column.size() < 3) continue;
    try {
      w_values.push_back(shapiro_wilk_w(column));
    } catch (const std::domain_error&) {
      // Degenerate marginal (zero spread); skip.
    }
  }
  rep.w_bar = kahan_mean(w_values);

  // Linearity: CI coverage of the true parameter values.
  std::vector<double> theta_hits;
  for (Eigen::Index r = 0; r < n_rep; ++r)
    for (Eigen::Index j = 0; j < n_param; ++j) {
      const double ci = input.theta_ci(r, j);
      if (!std::isfinite(ci)) continue;
      theta_hits.push_back(
          std::abs(input.theta(r, j) - input.theta_true[j]) <= ci ? 1.0 : 0.0);
    }
  rep.q95_theta = kahan_mean(theta_hits);

  // Prediction quality: band coverage of the true responses.
  std::vector<double> y_hits;
  for (std::size_t r = 0; r < input.predictions.size(); ++r)
    for (Eigen::Index p = 0; p < input.y_true.rows(); ++p)
      for (Eigen::Index i = 0; i < ny; ++i)
        y_hits.push_back(std::abs(input.predictions[r](p, i) - input.y_true(p, i)) <=
                                 input.band_half_widths[r](p, i)
                             ? 1.0
                             : 0.0);
  rep.q95_y = kahan_mean(y_hits);

  rep.s_bar.resize(ny);
  rep.sigma_bar_y.resize(ny);
  for (Eigen::Index i = 0; i < ny; ++i) {
    std::vector<double> s_col, sig_col;
    for (Eigen::Index r = 0; r < input.s_y.rows(); ++r) s_col.push_back(input.s_y(r, i));
    for (const auto& m : input.sigma_y)
      for (Eigen::Index p = 0; p < m.rows(); ++p) sig_col.push_back(m(p, i));
    rep.s_bar[i] = kahan_mean(s_col);
    rep.sigma_bar_y[i] = kahan_mean(sig_col);
  }

  if (input.designs.rows() > 0) {
    Eigen::MatrixXd unit = input.designs;
    for (Eigen::Index k = 0; k < unit.cols(); ++k)
      unit.col(k) = (unit.col(k).array() - input.design_lower[k]) /
                    (input.design_upper[k] - input.design_lower[k]);
    rep.d_u = centered_discrepancy(unit);
  } else {
    rep.d_u = kNaN;
  }

  if (input.n_identifiable.size() > 0) {
    const double mean = input.n_identifiable.cast<double>().mean();
    double var = 0.0;
    for (Eigen::Index r = 0; r < input.n_identifiable.size(); ++r)
      var += (input.n_identifiable[r] - mean) * (input.n_identifiable[r] - mean);
    rep.n_ident_mean = mean;
    rep.n_ident_std = input.n_identifiable.size() > 1
                          ? std::sqrt(var / double(input.n_identifiable.size() - 1))
                          : 0.0;
  } else {
    rep.n_ident_mean = kNaN;
    rep.n_ident_std = kNaN;
  }
  return rep;
}

McReport run_mc(const ResponseModel& model, const McSettings& cfg) {
  if (cfg.n_mc < 1) throw std::invalid_argument("run_mc: n_mc must be >= 1");
  const std::vector<bool> scen_mask = scenario_mask_of(model, cfg);
  const Eigen::VectorXd theta_start = scenario_start(cfg);

  const Eigen::MatrixXd Y_true = model_responses(model, cfg.U, cfg.theta_true);
  const Eigen::MatrixXd Yp_true = model_responses(model, cfg.Up, cfg.theta_true);

  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(cfg.n_mc));
  parallel_replicates(cfg.n_mc, cfg.threads, [&](int r) {
    RngStream stream(cfg.seed, static_cast<std::uint64_t>(r));
    try {
      const Eigen::MatrixXd Ym = perturb(Y_true, cfg.sigma, cfg.noise_scale, stream);
      const EstimationPass pass =
          estimate_once(model, cfg.U, Ym, cfg, theta_start, scen_mask);
      outcomes[static_cast<std::size_t>(r)] =
          evaluate_replicate(model, cfg, pass, Yp_true);
    } catch (const std::exception&) {
      outcomes[static_cast<std::size_t>(r)].failed = true;
    }
  });

  MetricsInput mi;
  const Eigen::Index n_param = model.param_dim();
  const Eigen::Index ny = model.response_dim();
  int n_ok = 0;
  for (const auto& o : outcomes)
    if (!o.failed) ++n_ok;
  mi.theta.resize(n_ok, n_param);
  mi.theta_ci.resize(n_ok, n_param);
  mi.s_y.resize(n_ok, ny);
  mi.n_identifiable.resize(n_ok);
  mi.theta_true = cfg.theta_true;
  mi.y_true = Yp_true;
  mi.design_lower = model.control_lower();
  mi.design_upper = model.control_upper();
  int row = 0;
  for (const auto& o : outcomes) {
    if (o.failed) continue;
    mi.theta.row(row) = o.theta.transpose();
    mi.theta_ci.row(row) = o.theta_ci.transpose();
    mi.s_y.row(row) = o.s_y.transpose();
    mi.n_identifiable[row] = o.n_identifiable;
    mi.predictions.push_back(o.prediction);
    mi.band_half_widths.push_back(o.half_width);
    mi.sigma_y.push_back(o.sigma_y);
    ++row;
  }
  return finalize_report(mi, cfg.n_mc - n_ok, cfg.n_mc);
}

std::vector<McReport> run_soed_pe(const ResponseModel& model,
                                  const McSettings& cfg,
                                  const Eigen::MatrixXd& init_design,
                                  int n_iterations, Criterion criterion) {
  if (cfg.n_mc < 1) throw std::invalid_argument("run_soed_pe: n_mc must be >= 1");
  if (init_design.rows() == 0)
    throw std::invalid_argument("run_soed_pe: empty initial design");
  if (n_iterations < 0)
    throw std::invalid_argument("run_soed_pe: negative iteration count");

  const std::vector<bool> scen_mask = scenario_mask_of(model, cfg);
  const Eigen::MatrixXd Yp_true = model_responses(model, cfg.Up, cfg.theta_true);
  const int n_reports = std::max(1, n_iterations);

  struct ReplicateTrajectory {
    bool failed = false;
    std::vector<ReplicateOutcome> per_iteration;
    std::vector<Eigen::VectorXd> new_designs;  // one per iteration with OED
  };

  std::vector<ReplicateTrajectory> traj(static_cast<std::size_t>(cfg.n_mc));
  parallel_replicates(cfg.n_mc, cfg.threads, [&](int r) {
    auto& t = traj[static_cast<std::size_t>(r)];
    RngStream stream(cfg.seed, static_cast<std::uint64_t>(r));
    try {
      Eigen::MatrixXd U_cur = init_design;
      Eigen::MatrixXd Y_init = model_responses(model, U_cur, cfg.theta_true);
      Eigen::MatrixXd Ym = perturb(Y_init, cfg.sigma, cfg.noise_scale, stream);
      Eigen::VectorXd theta_cur = scenario_start(cfg);

      for (int iter = 1; iter <= n_reports; ++iter) {
        const EstimationPass pass =
            estimate_once(model, U_cur, Ym, cfg, theta_cur, scen_mask);
        theta_cur = pass.theta_full;
        t.per_iteration.push_back(evaluate_replicate(model, cfg, pass, Yp_true));

        if (n_iterations == 0) break;

        // Fixed parameters never enter the design criterion; with
        // regularized OED the non-identifiable ones are dropped too.
        const std::vector<bool>& oed_mask =
            cfg.reg == RegMethod::GOWithOed ? pass.active : scen_mask;
        if (active_indices(oed_mask).empty())
          throw ConvergenceError("run_soed_pe: empty design criterion mask");
        const DesignCandidate cand = design_next(
            model, U_cur, theta_cur, oed_mask, cfg.sigma, criterion, 1, 21);

        const Eigen::VectorXd u_new = cand.u_new.row(0).transpose();
        const Eigen::VectorXd y_new = model.response(u_new, cfg.theta_true);
        Eigen::VectorXd ym_new(y_new.size());
        for (Eigen::Index i = 0; i < y_new.size(); ++i)
          ym_new[i] = stream.normal(y_new[i], cfg.noise_scale * cfg.sigma[i]);

        U_cur.conservativeResize(U_cur.rows() + 1, Eigen::NoChange);
        U_cur.row(U_cur.rows() - 1) = u_new.transpose();
        Ym.conservativeResize(Ym.rows() + 1, Eigen::NoChange);
        Ym.row(Ym.rows() - 1) = ym_new.transpose();
        t.new_designs.push_back(u_new);
      }
    } catch (const std::exception&) {
      t.failed = true;
      t.per_iteration.clear();
      t.new_designs.clear();
    }
  });

  int n_ok = 0;
  for (const auto& t : traj)
    if (!t.failed) ++n_ok;

  const Eigen::Index n_param = model.param_dim();
  const Eigen::Index ny = model.response_dim();
  std::vector<McReport> reports;
  reports.reserve(static_cast<std::size_t>(n_reports));

  for (int iter = 1; iter <= n_reports; ++iter) {
    MetricsInput mi;
    mi.theta.resize(n_ok, n_param);
    mi.theta_ci.resize(n_ok, n_param);
    mi.s_y.resize(n_ok, ny);
    mi.n_identifiable.resize(n_ok);
    mi.theta_true = cfg.theta_true;
    mi.y_true = Yp_true;
    mi.design_lower = model.control_lower();
    mi.design_upper = model.control_upper();

    int row = 0;
    std::vector<Eigen::VectorXd> pooled;
    for (const auto& t : traj) {
      if (t.failed) continue;
      const auto& o = t.per_iteration[static_cast<std::size_t>(iter - 1)];
      mi.theta.row(row) = o.theta.transpose();
      mi.theta_ci.row(row) = o.theta_ci.transpose();
      mi.s_y.row(row) = o.s_y.transpose();
      mi.n_identifiable[row] = o.n_identifiable;
      mi.predictions.push_back(o.prediction);
      mi.band_half_widths.push_back(o.half_width);
      mi.sigma_y.push_back(o.sigma_y);
      ++row;
      for (int k = 0; k < std::min<int>(iter, static_cast<int>(t.new_designs.size())); ++k)
        pooled.push_back(t.new_designs[static_cast<std::size_t>(k)]);
    }
    if (!pooled.empty()) {
      mi.designs.resize(static_cast<Eigen::Index>(pooled.size()),
                        model.control_dim());
      for (std::size_t k = 0; k < pooled.size(); ++k)
        mi.designs.row(static_cast<Eigen::Index>(k)) = pooled[k].transpose();
    }

    McReport rep = finalize_report(mi, cfg.n_mc - n_ok, cfg.n_mc);
    rep.iteration = iter;
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace nrtlid
