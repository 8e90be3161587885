#ifndef NRTLID_THERMO_HPP
#define NRTLID_THERMO_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "nrtlid/dual.hpp"
#include "nrtlid/errors.hpp"

namespace nrtlid {

// Binary NRTL parameter set. Parameter order used throughout the library
// (sensitivity columns, masks, bounds): A12, B12, A21, B21, alpha.
template <class Scalar>
struct NrtlParamsOf {
  Scalar A12{};
  Scalar B12{};  // K
  Scalar A21{};
  Scalar B21{};  // K
  Scalar alpha{};
};

using NrtlParams = NrtlParamsOf<double>;

inline constexpr int kNrtlParamCount = 5;
inline constexpr std::array<const char*, 5> kNrtlParamNames = {
    "A12", "B12", "A21", "B21", "alpha"};

inline double nrtl_param(const NrtlParams& p, int j) {
  switch (j) {
    case 0: return p.A12;
    case 1: return p.B12;
    case 2: return p.A21;
    case 3: return p.B21;
    case 4: return p.alpha;
    default: throw std::out_of_range("nrtl_param: index " + std::to_string(j));
  }
}

inline void set_nrtl_param(NrtlParams& p, int j, double v) {
  switch (j) {
    case 0: p.A12 = v; break;
    case 1: p.B12 = v; break;
    case 2: p.A21 = v; break;
    case 3: p.B21 = v; break;
    case 4: p.alpha = v; break;
    default: throw std::out_of_range("set_nrtl_param: index " + std::to_string(j));
  }
}

// Pure component described by a Wagner 2.5-5 vapor-pressure correlation
// ln(Ps/Pc) = (a t + b t^1.5 + c t^2.5 + d t^5) / Tr with t = 1 - T/Tc.
struct PureComponent {
  std::string name;
  double Tc{};               // K
  double Pc{};               // Pa
  std::array<double, 4> wagner{};  // a, b, c, d
  double T_min{};            // K, correlation validity
  double T_max{};            // K
};

enum class AzeotropeType { None, PressureMax, PressureMin, Double };

struct Mixture {
  PureComponent component1;
  PureComponent component2;
  NrtlParams nrtl;
  std::string label;
  AzeotropeType azeotrope{AzeotropeType::None};
};

// Bubble-point state: everything needed to restate both isofugacity
// equations x^V_i P = x^L_i gamma_i Ps_i.
struct VleState {
  double x1L{};
  double P{};   // Pa
  double T{};   // K
  double x1V{};
  double gamma1{};
  double gamma2{};
};

void validate(const PureComponent& c);

// --- NRTL kernels, templated so a Dual evaluation produces derivatives ---

// tau12 = A12 + B12/T, tau21 = A21 + B21/T.
template <class S>
std::pair<S, S> tau_eval(const S& T, const NrtlParamsOf<S>& p) {
  if (!(value_of(T) > 0.0))
    throw std::domain_error("tau_eval: temperature must be positive");
  return {p.A12 + p.B12 / T, p.A21 + p.B21 / T};
}

// Binary NRTL activity coefficients (gamma1, gamma2) at liquid fraction x1L.
template <class S>
std::pair<S, S> activity_coefficients(double x1L, const S& T,
                                      const NrtlParamsOf<S>& p) {
  if (!(x1L >= 0.0 && x1L <= 1.0))
    throw std::domain_error("activity_coefficients: x1L outside [0, 1]");
  const auto [tau12, tau21] = tau_eval(T, p);
  const S G12 = exp(-p.alpha * tau12);
  const S G21 = exp(-p.alpha * tau21);
  const S x1 = S(x1L);
  const S x2 = S(1.0 - x1L);
  const S q21 = G21 / (x1 + x2 * G21);
  const S q12 = G12 / (x2 + x1 * G12);
  const S ln_g1 = x2 * x2 * (tau21 * q21 * q21 + tau12 * q12 / (x2 + x1 * G12));
  const S ln_g2 = x1 * x1 * (tau12 * q12 * q12 + tau21 * q21 / (x1 + x2 * G21));
  return {exp(ln_g1), exp(ln_g2)};
}

// Wagner 2.5-5 saturation pressure; strictly increasing on [T_min, T_max].
template <class S>
S vapor_pressure(const PureComponent& c, const S& T) {
  const double Tv = value_of(T);
  if (!(Tv >= c.T_min && Tv <= c.T_max))
    throw std::range_error("vapor_pressure: T=" + std::to_string(Tv) +
                           " K outside validity range of " + c.name);
  const S Tr = T / c.Tc;
  const S t = 1.0 - Tr;
  const auto& w = c.wagner;
  const S s = w[0] * t + w[1] * pow(t, 1.5) + w[2] * pow(t, 2.5) + w[3] * pow(t, 5.0);
  return c.Pc * exp(s / Tr);
}

// Pressure residual of the isobaric bubble-point problem at temperature T:
// x1 g1 Ps1 + x2 g2 Ps2 - P. Root in T defines the bubble point.
template <class S>
S bubble_residual(double x1L, double P, const S& T, const Mixture& m,
                  const NrtlParamsOf<S>& p) {
  const auto [g1, g2] = activity_coefficients(x1L, T, p);
  const S ps1 = vapor_pressure(m.component1, T);
  const S ps2 = vapor_pressure(m.component2, T);
  return x1L * g1 * ps1 + (1.0 - x1L) * g2 * ps2 - P;
}

// Temperature at which the component's vapor pressure equals P.
double saturation_temperature(const PureComponent& c, double P);

// Isobaric bubble point: solves the pressure residual for T on a bracket
// spanning both pure-component saturation temperatures (+-20 K, clipped to
// the joint Wagner validity range), then polishes with Newton so the
// relative pressure residual lands near machine precision (contract: 1e-10).
VleState bubble_point(double x1L, double P, const Mixture& m);

// Bubble point plus dT/dtheta and dx1V/dtheta for the five NRTL parameters,
// by implicit differentiation of the pressure residual at the solved root.
struct BubbleDerivatives {
  VleState state;
  std::array<double, 5> dT_dtheta{};
  std::array<double, 5> dx1V_dtheta{};
};

BubbleDerivatives bubble_point_with_derivatives(double x1L, double P,
                                                const Mixture& m);

}  // namespace nrtlid

#endif
