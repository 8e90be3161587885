#ifndef NRTLID_STATS_HPP
#define NRTLID_STATS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace nrtlid {

// Inverse standard normal CDF (Wichura's PPND16), |error| < 1e-15 over (0,1).
double normal_quantile(double p);

// Student-t inverse CDF; accepts non-integer degrees of freedom.
double t_quantile(double dof, double p);

// Shapiro-Wilk W statistic with Royston's coefficient approximation
// (AS R94). Valid for 3 <= n <= 5000; returns W in (0, 1].
double shapiro_wilk_w(std::span<const double> sample);

// Centered L2 discrepancy of a point set in the unit hypercube
// (rows = points). Zero-row input is rejected.
double centered_discrepancy(const Eigen::MatrixXd& points);

// Reproducible random stream identified by (base_seed, replicate_index).
// Streams with distinct identities are statistically independent and the
// draw sequence depends only on the identity, never on thread schedule.
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t replicate_index);

  double uniform01();  // open interval (0, 1)
  double normal(double mean, double stddev);

  // Deterministic child stream; lanes of the same parent are independent.
  RngStream fork(std::uint64_t lane) const;

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t replicate_index() const { return replicate_; }
  std::uint64_t draw_count() const { return draws_; }

 private:
  std::uint64_t base_seed_;
  std::uint64_t replicate_;
  std::array<std::uint64_t, 4> state_;
  std::uint64_t draws_ = 0;
};

std::vector<double> sample_normal(RngStream& stream, double mean, double stddev,
                                  std::size_t count);

}  // namespace nrtlid

#endif
