#include "nrtlid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/students_t.hpp>

namespace nrtlid {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p must lie in (0, 1)");

  // Wichura (1988), algorithm AS 241, routine PPND16.
  static constexpr double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2,
      1.9715909503065514427e3,  1.3731693765509461125e4,
      4.5921953931549871457e4,  6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static constexpr double b[8] = {
      1.0,                      4.2313330701600911252e1,
      6.8718700749205790830e2,  5.3941960214247511077e3,
      2.1213794301586595867e4,  3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static constexpr double c[8] = {
      1.42343711074968357734e0,  4.63033784615654529590e0,
      5.76949722146069140550e0,  3.64784832476320460504e0,
      1.27045825245236838258e0,  2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {
      1.0,                       2.05319162663775882187e0,
      1.67638483018380384940e0,  6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double e[8] = {
      6.65790464350110377720e0,  5.46378491116411436990e0,
      1.78482653991729133580e0,  2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {
      1.0,                       5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto horner = [](const double (&k)[8], double r) {
    return ((((((k[7] * r + k[6]) * r + k[5]) * r + k[4]) * r + k[3]) * r + k[2]) * r + k[1]) * r + k[0];
  };

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, r) / horner(b, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    val = horner(e, r) / horner(f, r);
  }
  return (q < 0.0) ? -val : val;
}

double t_quantile(double dof, double p) {
  if (!(dof > 0.0)) throw std::domain_error("t_quantile: dof must be positive");
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("t_quantile: p must lie in (0, 1)");
  const boost::math::students_t_distribution<double> dist(dof);
  return boost::math::quantile(dist, p);
}

double shapiro_wilk_w(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3) throw std::domain_error("shapiro_wilk_w: need at least 3 values");
  if (n > 5000)
    throw std::domain_error("shapiro_wilk_w: Royston approximation valid up to n=5000");

  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());

  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  double ssq = 0.0;
  for (double v : x) ssq += (v - mean) * (v - mean);
  if (ssq <= 0.0)
    throw std::domain_error("shapiro_wilk_w: sample has zero range");

  // Expected normal order statistics via Blom-type plotting positions.
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i)
    m[i] = normal_quantile((double(i + 1) - 0.375) / (double(n) + 0.25));
  double ssumm2 = 0.0;
  for (double v : m) ssumm2 += v * v;

  std::vector<double> w(n);
  if (n == 3) {
    w[0] = -std::sqrt(0.5);
    w[1] = 0.0;
    w[2] = std::sqrt(0.5);
  } else {
    // Royston (1995) polynomial corrections for the extreme weights.
    const double rsn = 1.0 / std::sqrt(double(n));
    auto poly5 = [&](double c1, double c2, double c3, double c4, double c5) {
      return ((((c5 * rsn + c4) * rsn + c3) * rsn + c2) * rsn + c1) * rsn;
    };
    const double norm = std::sqrt(ssumm2);
    const double an = m[n - 1] / norm +
                      poly5(0.221157, -0.147981, -2.071190, 4.434685, -2.706056);
    double phi;
    std::size_t i1;
    if (n > 5) {
      const double an1 = m[n - 2] / norm +
                         poly5(0.042981, -0.293762, -1.752461, 5.682633, -3.582633);
      phi = (ssumm2 - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
            (1.0 - 2.0 * an * an - 2.0 * an1 * an1);
      w[n - 1] = an;
      w[n - 2] = an1;
      w[0] = -an;
      w[1] = -an1;
      i1 = 2;
    } else {
      phi = (ssumm2 - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * an * an);
      w[n - 1] = an;
      w[0] = -an;
      i1 = 1;
    }
    const double sphi = std::sqrt(phi);
    for (std::size_t i = i1; i < n - i1; ++i) w[i] = m[i] / sphi;
  }

  double num = 0.0;
  for (std::size_t i = 0; i < n; ++i) num += w[i] * x[i];
  double W = num * num / ssq;
  return std::min(W, 1.0);
}

double centered_discrepancy(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n == 0 || d == 0)
    throw std::domain_error("centered_discrepancy: empty point set");
  if ((points.array() < 0.0).any() || (points.array() > 1.0).any())
    throw std::domain_error("centered_discrepancy: point outside unit cube");

  const Eigen::ArrayXXd z = points.array() - 0.5;
  const Eigen::ArrayXXd az = z.abs();

  double sum1 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < d; ++k)
      prod *= 1.0 + 0.5 * az(i, k) - 0.5 * az(i, k) * az(i, k);
    sum1 += prod;
  }
  double sum2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double prod = 1.0;
      for (Eigen::Index k = 0; k < d; ++k)
        prod *= 1.0 + 0.5 * az(i, k) + 0.5 * az(j, k) -
                0.5 * std::abs(points(i, k) - points(j, k));
      sum2 += prod;
    }
  }
  const double nn = double(n);
  const double cd2 = std::pow(13.0 / 12.0, double(d)) - (2.0 / nn) * sum1 +
                     sum2 / (nn * nn);
  return std::sqrt(std::max(cd2, 0.0));
}

namespace {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t base_seed, std::uint64_t replicate_index)
    : base_seed_(base_seed), replicate_(replicate_index) {
  // Mix identity into a full xoshiro256++ state via splitmix64.
  std::uint64_t s = base_seed ^ (0x9e3779b97f4a7c15ULL * (replicate_index + 1));
  s = splitmix64(s) ^ replicate_index;
  for (auto& word : state_) word = splitmix64(s);
}

double RngStream::uniform01() {
  // xoshiro256++
  auto& s = state_;
  const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
  const std::uint64_t t = s[1] << 17;
  s[2] ^= s[0];
  s[3] ^= s[1];
  s[1] ^= s[2];
  s[0] ^= s[3];
  s[2] ^= t;
  s[3] = rotl(s[3], 45);
  ++draws_;
  return (double(result >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal(double mean, double stddev) {
  if (stddev < 0.0) throw std::domain_error("RngStream::normal: negative stddev");
  const double z = normal_quantile(uniform01());
  return mean + stddev * z;
}

RngStream RngStream::fork(std::uint64_t lane) const {
  std::uint64_t s = base_seed_ ^ rotl(replicate_ + 0x5851f42d4c957f2dULL, 17);
  return RngStream(splitmix64(s), lane);
}

std::vector<double> sample_normal(RngStream& stream, double mean, double stddev,
                                  std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) v = stream.normal(mean, stddev);
  return out;
}

}  // namespace nrtlid
