#include "nrtlid/regularization.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

namespace nrtlid {

namespace {

void finish_ranking(IdentifiabilityResult& r) {
  r.ranking = r.identifiable;
  r.ranking.insert(r.ranking.end(), r.fixed.begin(), r.fixed.end());
}

}  // namespace

IdentifiabilityResult regularize_e(const Eigen::MatrixXd& Sbar, double eps) {
  if (Sbar.cols() == 0)
    throw std::invalid_argument("regularize_e: matrix has no columns");

  IdentifiabilityResult out;
  std::vector<int> remaining(static_cast<std::size_t>(Sbar.cols()));
  std::iota(remaining.begin(), remaining.end(), 0);

  Eigen::VectorXd eigenvalues;
  while (!remaining.empty()) {
    Eigen::MatrixXd Sr(Sbar.rows(), static_cast<Eigen::Index>(remaining.size()));
    for (std::size_t k = 0; k < remaining.size(); ++k)
      Sr.col(static_cast<Eigen::Index>(k)) = Sbar.col(remaining[k]);
    const Eigen::MatrixXd fim = Sr.transpose() * Sr;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fim);
    eigenvalues = es.eigenvalues();  // ascending
    if (eigenvalues[0] >= eps) break;
    // Drop the parameter dominating the weakest eigendirection.
    Eigen::Index worst = 0;
    es.eigenvectors().col(0).cwiseAbs().maxCoeff(&worst);
    out.fixed.push_back(remaining[static_cast<std::size_t>(worst)]);
    remaining.erase(remaining.begin() + worst);
  }

  out.identifiable = remaining;
  out.diagnostics = remaining.empty() ? Eigen::VectorXd() : eigenvalues;
  finish_ranking(out);
  return out;
}

IdentifiabilityResult regularize_svd(const Eigen::MatrixXd& Sbar,
                                     double eps_cond) {
  if (Sbar.cols() == 0)
    throw std::invalid_argument("regularize_svd: matrix has no columns");

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Sbar);
  const Eigen::VectorXd sv = svd.singularValues();  // descending

  Eigen::Index r = 0;
  if (sv.size() > 0 && sv[0] > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > 0.0 && sv[0] / sv[i] <= eps_cond) r = i + 1;
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Sbar);
  const auto perm = qr.colsPermutation().indices();

  IdentifiabilityResult out;
  for (Eigen::Index k = 0; k < perm.size(); ++k) {
    const int col = perm[k];
    if (k < r)
      out.identifiable.push_back(col);
    else
      out.fixed.push_back(col);
  }
  out.diagnostics = sv;
  finish_ranking(out);
  return out;
}

IdentifiabilityResult regularize_fs(const Eigen::MatrixXd& Sbar_yao,
                                    double eps) {
  if (Sbar_yao.cols() == 0)
    throw std::invalid_argument("regularize_fs: matrix has no columns");

  Eigen::MatrixXd X = Sbar_yao;
  std::vector<int> remaining(static_cast<std::size_t>(X.cols()));
  std::iota(remaining.begin(), remaining.end(), 0);

  IdentifiabilityResult out;
  std::vector<double> diag;

  while (!remaining.empty()) {
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      const double mag = X.col(remaining[k]).norm();
      if (mag > best_mag) {
        best_mag = mag;
        best = k;
      }
    }
    if (best_mag < eps) break;

    const int col = remaining[best];
    out.identifiable.push_back(col);
    diag.push_back(best_mag);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));

    // Deflate what is left against the selected direction.
    const Eigen::VectorXd q = X.col(col) / best_mag;
    for (int other : remaining) X.col(other) -= q * (q.dot(X.col(other)));
  }

  // Rejected columns ranked by their final deflated magnitude.
  std::vector<std::pair<double, int>> rest;
  for (int col : remaining) rest.emplace_back(X.col(col).norm(), col);
  std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [mag, col] : rest) {
    out.fixed.push_back(col);
    diag.push_back(mag);
  }

  out.diagnostics = Eigen::Map<const Eigen::VectorXd>(
      diag.data(), static_cast<Eigen::Index>(diag.size()));
  finish_ranking(out);
  return out;
}

IdentifiabilityResult regularize_go(const Eigen::MatrixXd& Sbar) {
  const int n = static_cast<int>(Sbar.cols());
  if (n == 0) throw std::invalid_argument("regularize_go: matrix has no columns");
  if (n > 20)
    throw std::invalid_argument("regularize_go: exhaustive search limited to 20 columns");

  const Eigen::MatrixXd fim = Sbar.transpose() * Sbar;

  // Lexicographic comparison of sorted index sets encoded as bit masks:
  // the smaller lowest set bit wins, then the next, and so on.
  auto lex_less = [](unsigned a, unsigned b) {
    while (a != 0 && b != 0) {
      const int ia = std::countr_zero(a);
      const int ib = std::countr_zero(b);
      if (ia != ib) return ia < ib;
      a &= a - 1;
      b &= b - 1;
    }
    return a == 0 && b != 0;  // equal prefix: the shorter set comes first
  };

  double best_det = 0.0;
  unsigned best_mask = 0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    const int k = std::popcount(mask);
    Eigen::MatrixXd sub(k, k);
    int p = 0;
    for (int i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      int q = 0;
      for (int j = 0; j < n; ++j) {
        if (!(mask >> j & 1)) continue;
        sub(p, q++) = fim(i, j);
      }
      ++p;
    }
    const double det = sub.determinant();
    bool take = false;
    if (best_mask == 0 || det > best_det) {
      take = true;
    } else if (det == best_det) {
      const int kb = std::popcount(best_mask);
      if (k > kb || (k == kb && lex_less(mask, best_mask))) take = true;
    }
    if (take) {
      best_det = det;
      best_mask = mask;
    }
  }

  IdentifiabilityResult out;
  for (int i = 0; i < n; ++i)
    (best_mask >> i & 1 ? out.identifiable : out.fixed).push_back(i);
  out.diagnostics = Eigen::VectorXd::Constant(1, best_det);
  finish_ranking(out);
  return out;
}

}  // namespace nrtlid
