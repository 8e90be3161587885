#include "nrtlid/oed.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "nrtlid/errors.hpp"
#include "nrtlid/sensitivity.hpp"

namespace nrtlid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFimConditionLimit = 1e14;

}  // namespace

const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::A: return "A";
    case Criterion::D: return "D";
    case Criterion::E: return "E";
  }
  return "?";
}

double criterion_value(const Eigen::MatrixXd& S, const Eigen::VectorXd& sigma,
                       Eigen::Index n_experiments, Criterion criterion) {
  if (S.rows() != sigma.size() * n_experiments)
    throw std::invalid_argument("criterion_value: row count mismatch");
  const Eigen::VectorXd w = expand_sigma_rows(sigma, n_experiments).cwiseInverse();
  const Eigen::MatrixXd Jw = w.asDiagonal() * S;
  const Eigen::MatrixXd fim = Jw.transpose() * Jw;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim);
  if (es.info() != Eigen::Success) return kInf;
  const Eigen::VectorXd lam = es.eigenvalues();  // ascending
  const double lmin = lam.minCoeff();
  const double lmax = lam.maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > kFimConditionLimit) return kInf;

  switch (criterion) {
    case Criterion::A: return lam.cwiseInverse().sum();       // trace(C)
    case Criterion::D: return 1.0 / lam.prod();               // det(C)
    case Criterion::E: return 1.0 / lmin;                     // lambda_max(C)
  }
  return kInf;
}

Eigen::MatrixXd design_seeds(const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, int n_starts) {
  const Eigen::Index d = lower.size();
  if (n_starts < 1) throw std::invalid_argument("design_seeds: n_starts < 1");

  auto linspace = [](double lo, double hi, int n) {
    Eigen::VectorXd v(n);
    if (n == 1) {
      v[0] = 0.5 * (lo + hi);
    } else {
      for (int i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    }
    return v;
  };

  if (d == 2 && n_starts == 21) {
    // 7 first-coordinate values by 3 second-coordinate levels.
    const Eigen::VectorXd xs = linspace(lower[0], upper[0], 7);
    const Eigen::VectorXd ps = linspace(lower[1], upper[1], 3);
    Eigen::MatrixXd seeds(21, 2);
    int r = 0;
    for (int ip = 0; ip < 3; ++ip)
      for (int ix = 0; ix < 7; ++ix) seeds.row(r++) << xs[ix], ps[ip];
    return seeds;
  }
  if (d == 1) {
    Eigen::MatrixXd seeds(n_starts, 1);
    seeds.col(0) = linspace(lower[0], upper[0], n_starts);
    return seeds;
  }
  // Generic fallback: as-square-as-possible inclusive lattice, truncated.
  int per_dim = std::max(2, int(std::ceil(std::pow(double(n_starts), 1.0 / double(d)))));
  Eigen::MatrixXd seeds(n_starts, d);
  Eigen::VectorXi counter = Eigen::VectorXi::Zero(d);
  for (int r = 0; r < n_starts; ++r) {
    for (Eigen::Index k = 0; k < d; ++k)
      seeds(r, k) = lower[k] + (upper[k] - lower[k]) * double(counter[k]) / double(per_dim - 1);
    for (Eigen::Index k = 0; k < d; ++k) {
      if (++counter[k] < per_dim) break;
      counter[k] = 0;
    }
  }
  return seeds;
}

DesignCandidate design_next(const ResponseModel& model,
                            const Eigen::MatrixXd& U_exp,
                            const Eigen::VectorXd& theta,
                            const std::vector<bool>& mask,
                            const Eigen::VectorXd& sigma,
                            Criterion criterion, int n_new, int n_starts) {
  if (U_exp.rows() == 0)
    throw std::invalid_argument("design_next: existing design is empty");
  if (n_new < 1) throw std::invalid_argument("design_next: n_new < 1");
  if (active_indices(mask).empty())
    throw std::invalid_argument("design_next: no active parameters");

  const Eigen::Index d = model.control_dim();
  const Eigen::VectorXd lo = model.control_lower();
  const Eigen::VectorXd hi = model.control_upper();
  const Eigen::VectorXd range = hi - lo;

  // Sensitivity of the already-run experiments is fixed during the search.
  const Eigen::MatrixXd S_exp = sensitivity_matrix(model, U_exp, theta, mask);
  const Eigen::Index ny = model.response_dim();
  const Eigen::Index n_cols = S_exp.cols();

  // Flattened decision vector: n_new control points, point-major.
  auto objective = [&](const Eigen::VectorXd& z) -> double {
    Eigen::MatrixXd S_total(S_exp.rows() + n_new * ny, n_cols);
    S_total.topRows(S_exp.rows()) = S_exp;
    for (int p = 0; p < n_new; ++p) {
      const Eigen::VectorXd u = z.segment(p * d, d);
      Eigen::MatrixXd J;
      try {
        J = model.response_jacobian(u, theta);
      } catch (const std::exception&) {
        return kInf;
      }
      if (!J.allFinite()) return kInf;
      const auto idx = active_indices(mask);
      for (std::size_t k = 0; k < idx.size(); ++k)
        S_total.block(S_exp.rows() + p * ny, static_cast<Eigen::Index>(k), ny, 1) =
            J.col(idx[k]);
    }
    return criterion_value(S_total, sigma,
                           U_exp.rows() + n_new, criterion);
  };

  auto project = [&](Eigen::VectorXd z) {
    for (int p = 0; p < n_new; ++p)
      for (Eigen::Index k = 0; k < d; ++k) {
        auto& v = z[p * d + k];
        v = std::min(std::max(v, lo[k]), hi[k]);
      }
    return z;
  };

  // Central finite-difference gradient with one-sided fallback near the box.
  auto gradient = [&](const Eigen::VectorXd& z, double fz, Eigen::VectorXd& g) {
    g.resize(z.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      const double h = 1e-6 * range[k % d];
      Eigen::VectorXd zp = z, zm = z;
      zp[k] = std::min(z[k] + h, hi[k % d]);
      zm[k] = std::max(z[k] - h, lo[k % d]);
      const double denom = zp[k] - zm[k];
      if (denom <= 0.0) {
        g[k] = 0.0;
        continue;
      }
      const double fp = (zp[k] == z[k]) ? fz : objective(zp);
      const double fm = (zm[k] == z[k]) ? fz : objective(zm);
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        g[k] = 0.0;
        continue;
      }
      g[k] = (fp - fm) / denom;
    }
  };

  // Projected BFGS with Armijo backtracking.
  auto local_minimize = [&](Eigen::VectorXd z, double& f_out) {
    z = project(z);
    double f = objective(z);
    if (!std::isfinite(f)) {
      f_out = f;
      return z;
    }
    const Eigen::Index nz = z.size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(nz, nz);
    Eigen::VectorXd g;
    gradient(z, f, g);
    for (int it = 0; it < 120; ++it) {
      Eigen::VectorXd p = -H * g;
      if (p.dot(g) >= 0.0) p = -g;  // reset to steepest descent
      double step = 1.0;
      bool moved = false;
      Eigen::VectorXd z_new;
      double f_new = f;
      for (int ls = 0; ls < 40; ++ls) {
        z_new = project(z + step * p);
        const Eigen::VectorXd s = z_new - z;
        if (s.lpNorm<Eigen::Infinity>() < 1e-14 * range.maxCoeff()) break;
        f_new = objective(z_new);
        if (std::isfinite(f_new) && f_new <= f - 1e-4 * step * g.dot(-p) &&
            f_new < f) {
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      Eigen::VectorXd g_new;
      gradient(z_new, f_new, g_new);
      const Eigen::VectorXd s = z_new - z;
      const Eigen::VectorXd yv = g_new - g;
      const double sy = s.dot(yv);
      if (sy > 1e-12 * s.norm() * yv.norm()) {  // curvature condition
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nz, nz);
        const Eigen::MatrixXd V = I - (s * yv.transpose()) / sy;
        H = V * H * V.transpose() + (s * s.transpose()) / sy;
      }
      z = z_new;
      f = f_new;
      g = g_new;
      if (s.lpNorm<Eigen::Infinity>() <= 1e-10 * range.maxCoeff()) break;
    }
    f_out = f;
    return z;
  };

  const Eigen::MatrixXd seed_points = design_seeds(lo, hi, n_starts);
  DesignCandidate best;
  best.criterion = criterion;
  best.value = kInf;
  std::string diag;

  for (int s = 0; s < n_starts; ++s) {
    Eigen::VectorXd z0(n_new * d);
    for (int p = 0; p < n_new; ++p) z0.segment(p * d, d) = seed_points.row(s % seed_points.rows());
    double f = kInf;
    const Eigen::VectorXd z = local_minimize(z0, f);
    if (!std::isfinite(f)) {
      diag += "start " + std::to_string(s) + ": singular; ";
      continue;
    }
    if (f < best.value) {
      best.value = f;
      best.start_index = s;
      best.u_new.resize(n_new, d);
      for (int p = 0; p < n_new; ++p) best.u_new.row(p) = z.segment(p * d, d).transpose();
    }
  }

  if (!std::isfinite(best.value))
    throw ConvergenceError("design_next: every start failed: " + diag);
  return best;
}

}  // namespace nrtlid
