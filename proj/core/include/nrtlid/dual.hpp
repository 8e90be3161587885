#ifndef NRTLID_DUAL_HPP
#define NRTLID_DUAL_HPP

#include <array>
#include <cmath>
#include <cstddef>

namespace nrtlid {

// Unqualified exp/pow/... in code templated over double or Dual must reach
// the std overloads for plain doubles.
using std::exp;
using std::log;
using std::pow;
using std::sqrt;

// Forward-mode dual number carrying N partial derivatives alongside the
// value. Thermodynamic routines are templated on the scalar type, so one
// evaluation with Dual<N> yields the value and all N partials at once.
template <std::size_t N>
struct Dual {
  double v{0.0};
  std::array<double, N> d{};

  Dual() = default;
  Dual(double value) : v(value) { d.fill(0.0); }  // NOLINT: implicit by design
  Dual(double value, const std::array<double, N>& deriv) : v(value), d(deriv) {}

  // Independent variable: unit seed in slot `slot`.
  static Dual variable(double value, std::size_t slot) {
    Dual x(value);
    x.d[slot] = 1.0;
    return x;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - v * inv * o.d[i]) * inv;
    v *= inv;
    return *this;
  }
};

template <std::size_t N>
inline Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
inline Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
inline Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
inline Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }

template <std::size_t N>
inline Dual<N> operator+(double a, Dual<N> b) { return Dual<N>(a) += b; }
template <std::size_t N>
inline Dual<N> operator-(double a, const Dual<N>& b) { return Dual<N>(a) -= b; }
template <std::size_t N>
inline Dual<N> operator*(double a, Dual<N> b) { return b *= Dual<N>(a); }
template <std::size_t N>
inline Dual<N> operator/(double a, const Dual<N>& b) { return Dual<N>(a) /= b; }

template <std::size_t N>
inline Dual<N> operator+(Dual<N> a, double b) { return a += Dual<N>(b); }
template <std::size_t N>
inline Dual<N> operator-(Dual<N> a, double b) { return a -= Dual<N>(b); }
template <std::size_t N>
inline Dual<N> operator*(Dual<N> a, double b) { return a *= Dual<N>(b); }
template <std::size_t N>
inline Dual<N> operator/(Dual<N> a, double b) { return a /= Dual<N>(b); }

template <std::size_t N>
inline Dual<N> operator-(Dual<N> a) {
  a.v = -a.v;
  for (auto& g : a.d) g = -g;
  return a;
}

template <std::size_t N>
inline bool operator<(const Dual<N>& a, const Dual<N>& b) { return a.v < b.v; }
template <std::size_t N>
inline bool operator>(const Dual<N>& a, const Dual<N>& b) { return a.v > b.v; }

template <std::size_t N>
inline Dual<N> exp(const Dual<N>& x) {
  Dual<N> r;
  r.v = std::exp(x.v);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = r.v * x.d[i];
  return r;
}

template <std::size_t N>
inline Dual<N> log(const Dual<N>& x) {
  Dual<N> r;
  r.v = std::log(x.v);
  const double inv = 1.0 / x.v;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = inv * x.d[i];
  return r;
}

// Power with constant exponent; d/dx x^p = p x^(p-1).
template <std::size_t N>
inline Dual<N> pow(const Dual<N>& x, double p) {
  Dual<N> r;
  r.v = std::pow(x.v, p);
  const double s = p * std::pow(x.v, p - 1.0);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = s * x.d[i];
  return r;
}

template <std::size_t N>
inline Dual<N> sqrt(const Dual<N>& x) {
  Dual<N> r;
  r.v = std::sqrt(x.v);
  const double s = 0.5 / r.v;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = s * x.d[i];
  return r;
}

// Value extraction usable in code templated over double or Dual.
inline double value_of(double x) { return x; }
template <std::size_t N>
inline double value_of(const Dual<N>& x) { return x.v; }

}  // namespace nrtlid

#endif
