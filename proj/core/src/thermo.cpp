#include "nrtlid/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nrtlid {

void validate(const PureComponent& c) {
  if (!(c.Tc > 0.0)) throw std::invalid_argument(c.name + ": Tc must be positive");
  if (!(c.Pc > 0.0)) throw std::invalid_argument(c.name + ": Pc must be positive");
  if (!(c.T_min < c.T_max && c.T_max <= c.Tc))
    throw std::invalid_argument(c.name + ": requires T_min < T_max <= Tc");
  for (double w : c.wagner)
    if (!std::isfinite(w))
      throw std::invalid_argument(c.name + ": non-finite Wagner coefficient");
}

namespace {

// Brent's method: inverse-quadratic / secant steps with a bisection
// safeguard. Assumes f(a) and f(b) straddle zero.
template <class F>
double brent(F&& f, double a, double b, double fa, double fb, double xtol,
             double ftol, int max_iter = 200) {
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double mid = 0.5 * (c - b);
    if (std::abs(mid) <= tol || std::abs(fb) <= ftol) return b;
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p, q;
      if (a == c) {  // secant
        p = 2.0 * mid * s;
        q = 1.0 - s;
      } else {  // inverse quadratic interpolation
        const double qa = fa / fc, r = fb / fc;
        p = s * (2.0 * mid * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * mid * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = mid;
        e = d;
      }
    } else {
      d = mid;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol) ? d : (mid > 0.0 ? tol : -tol);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  return b;
}

}  // namespace

double saturation_temperature(const PureComponent& c, double P) {
  if (!(P > 0.0))
    throw std::domain_error("saturation_temperature: P must be positive");
  const double lo = c.T_min, hi = c.T_max;
  const double flo = vapor_pressure(c, lo) - P;
  const double fhi = vapor_pressure(c, hi) - P;
  if (flo > 0.0 || fhi < 0.0)
    throw ConvergenceError(
        "saturation_temperature: P=" + std::to_string(P) +
            " Pa not bracketed by validity range of " + c.name,
        lo, hi, flo, fhi);
  auto f = [&](double T) { return vapor_pressure(c, T) - P; };
  return brent(f, lo, hi, flo, fhi, 1e-12, 1e-10 * P);
}

VleState bubble_point(double x1L, double P, const Mixture& m) {
  if (!(x1L >= 0.0 && x1L <= 1.0))
    throw std::domain_error("bubble_point: x1L outside [0, 1]");
  if (!(P > 0.0)) throw std::domain_error("bubble_point: P must be positive");

  const double Ts1 = saturation_temperature(m.component1, P);
  const double Ts2 = saturation_temperature(m.component2, P);
  const double joint_lo = std::max(m.component1.T_min, m.component2.T_min);
  const double joint_hi = std::min(m.component1.T_max, m.component2.T_max);
  double lo = std::max(std::min(Ts1, Ts2) - 20.0, joint_lo);
  double hi = std::min(std::max(Ts1, Ts2) + 20.0, joint_hi);

  auto f = [&](double T) { return bubble_residual(x1L, P, T, m, m.nrtl); };
  double flo = f(lo);
  double fhi = f(hi);
  if (!(flo <= 0.0 && fhi >= 0.0) && !(flo >= 0.0 && fhi <= 0.0))
    throw ConvergenceError("bubble_point: no sign change on bracket", lo, hi,
                           flo, fhi);

  double T = brent(f, lo, hi, flo, fhi, 1e-13 * std::max(lo, 1.0), 1e-12 * P);

  // Newton polish toward machine precision; keeps the implicit-function
  // derivatives and the plug-back residual test far inside tolerance.
  using D1 = Dual<1>;
  NrtlParamsOf<D1> pd{D1(m.nrtl.A12), D1(m.nrtl.B12), D1(m.nrtl.A21),
                      D1(m.nrtl.B21), D1(m.nrtl.alpha)};
  for (int k = 0; k < 3; ++k) {
    const D1 r = bubble_residual(x1L, P, D1::variable(T, 0), m, pd);
    if (std::abs(r.v) <= 4.0 * std::numeric_limits<double>::epsilon() * P) break;
    if (r.d[0] == 0.0) break;
    const double step = r.v / r.d[0];
    const double Tn = std::clamp(T - step, joint_lo, joint_hi);
    if (Tn == T) break;
    T = Tn;
  }

  VleState s;
  s.x1L = x1L;
  s.P = P;
  s.T = T;
  const auto [g1, g2] = activity_coefficients(x1L, T, m.nrtl);
  s.gamma1 = g1;
  s.gamma2 = g2;
  s.x1V = x1L * g1 * vapor_pressure(m.component1, T) / P;
  return s;
}

BubbleDerivatives bubble_point_with_derivatives(double x1L, double P,
                                                const Mixture& m) {
  BubbleDerivatives out;
  out.state = bubble_point(x1L, P, m);

  // Slots 0..4 carry the NRTL parameters, slot 5 the temperature.
  using D6 = Dual<6>;
  const NrtlParamsOf<D6> pd{
      D6::variable(m.nrtl.A12, 0), D6::variable(m.nrtl.B12, 1),
      D6::variable(m.nrtl.A21, 2), D6::variable(m.nrtl.B21, 3),
      D6::variable(m.nrtl.alpha, 4)};
  const D6 T = D6::variable(out.state.T, 5);

  const D6 r = bubble_residual(x1L, P, T, m, pd);
  const double r_T = r.d[5];
  if (r_T == 0.0 || !std::isfinite(r_T))
    throw NumericalError("bubble_point_with_derivatives: singular dF/dT");

  const auto [g1, g2] = activity_coefficients(x1L, T, pd);
  const D6 y = x1L * g1 * vapor_pressure(m.component1, T) / P;

  for (int j = 0; j < kNrtlParamCount; ++j) {
    const double dT = -r.d[j] / r_T;
    out.dT_dtheta[j] = dT;
    out.dx1V_dtheta[j] = y.d[j] + y.d[5] * dT;
    if (!std::isfinite(out.dT_dtheta[j]) || !std::isfinite(out.dx1V_dtheta[j]))
      throw NumericalError("bubble_point_with_derivatives: non-finite derivative");
  }
  return out;
}

}  // namespace nrtlid
