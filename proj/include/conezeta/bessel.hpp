#pragma once
// Self-contained Bessel/exponential-integral kernel for real arguments.
// Orders are restricted to |v| < 1 plus the v = 0 log-partner functions;
// that is all the boundary operators downstream ever need.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "conezeta/constants.hpp"

namespace conezeta::bessel {

inline constexpr double z_switch = 12.0;   // series vs. asymptotic crossover (J, Y, I)
inline constexpr double k0_switch = 2.0;   // K0 series breaks down much earlier
inline constexpr double i_overflow = 700.0;

struct BesselEval {
  double value = 0.0;
  enum class Method { series, asymptotic, quadrature } method = Method::series;
  double est_error = 0.0;
  bool log_scaled = false;  // value holds log of the function instead
};

namespace detail {

// Lanczos (g = 7, n = 9).  std::tgamma is the primary route; this one exists
// so tests can cross-check Gamma with an independent evaluation.
inline double gamma_lanczos(double x) {
  static const double g = 7.0;
  static const double c[9] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_lanczos(1.0 - x));
  }
  x -= 1.0;
  double a = c[0];
  double t = x + g + 0.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

inline const std::vector<double>& harmonic_table() {
  static const std::vector<double> H = [] {
    std::vector<double> h(61, 0.0);
    for (int k = 1; k <= 60; ++k) h[k] = h[k - 1] + 1.0 / k;
    return h;
  }();
  return H;
}

// Hankel-type asymptotic tail sum_k s_k a_k(v)/z^k with caller-chosen signs.
// Returns (P, Q, first_omitted) where P collects even k, Q odd k.
struct HankelSums {
  double P = 0.0, Q = 0.0, omitted = 0.0;
};

inline HankelSums hankel_pq(double v, double z) {
  HankelSums s;
  const double mu = 4.0 * v * v;
  double term = 1.0;
  double prev = std::numeric_limits<double>::max();
  s.P = 1.0;
  int sign_p = -1, sign_q = 1;
  for (int k = 0; k < 80; ++k) {
    double next = term * (mu - (2 * k + 1) * (2 * k + 1)) / (8.0 * (k + 1) * z);
    if (std::abs(next) >= prev) {  // divergent tail reached
      s.omitted = std::abs(next);
      return s;
    }
    prev = std::abs(next);
    term = next;
    if (k % 2 == 0) {
      s.Q += sign_q * term;
      sign_q = -sign_q;
    } else {
      s.P += sign_p * term;
      sign_p = -sign_p;
    }
    if (std::abs(term) < 1e-18) {
      s.omitted = std::abs(term);
      return s;
    }
  }
  s.omitted = std::abs(term);
  return s;
}

} // namespace detail

inline double gamma_fn(double x) { return std::tgamma(x); }

// tau_nu = 2^{2 nu} Gamma(1+nu) / Gamma(1-nu)
inline double tau_factor(double nu) {
  return std::exp2(2.0 * nu) * gamma_fn(1.0 + nu) / gamma_fn(1.0 - nu);
}

// ---------------------------------------------------------------- J_v, v in (-1,1)
inline BesselEval bessel_j_eval(double v, double z) {
  if (z < 0.0) throw std::domain_error("bessel_j: z must be >= 0");
  BesselEval out;
  if (z <= z_switch) {
    out.method = BesselEval::Method::series;
    if (z == 0.0) {
      out.value = (v == 0.0) ? 1.0 : (v > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      return out;
    }
    double term = std::pow(0.5 * z, v) / gamma_fn(1.0 + v);
    double sum = term, maxt = std::abs(term);
    const double q = 0.25 * z * z;
    for (int k = 0; k < 400; ++k) {
      term *= -q / ((k + 1.0) * (v + k + 1.0));
      sum += term;
      maxt = std::max(maxt, std::abs(term));
      if (std::abs(term) < 1e-18 * (std::abs(sum) + maxt)) break;
    }
    out.value = sum;
    out.est_error = maxt * 4e-16 + std::abs(term);
    return out;
  }
  out.method = BesselEval::Method::asymptotic;
  auto s = detail::hankel_pq(v, z);
  const double w = z - 0.5 * v * std::numbers::pi - 0.25 * std::numbers::pi;
  const double amp = std::sqrt(2.0 / (std::numbers::pi * z));
  out.value = amp * (std::cos(w) * s.P - std::sin(w) * s.Q);
  out.est_error = amp * (s.omitted + 4e-16);
  return out;
}

inline double bessel_j(double v, double z) { return bessel_j_eval(v, z).value; }

// ---------------------------------------------------------------- Y_0
inline BesselEval bessel_y0_eval(double z) {
  if (z <= 0.0) throw std::domain_error("bessel_y0: z must be > 0");
  BesselEval out;
  if (z <= z_switch) {
    out.method = BesselEval::Method::series;
    // (pi/2) Y0(z) = (log(z/2) + gamma) J0(z) - sum_{k>=1} H_k (-z^2/4)^k / (k!)^2
    const auto& H = detail::harmonic_table();
    const double q = -0.25 * z * z;
    double pw = 1.0, sum = 0.0, maxt = 0.0;
    for (int k = 1; k <= 60; ++k) {
      pw *= q / (k * (double)k);
      double t = H[k] * pw;
      sum += t;
      maxt = std::max(maxt, std::abs(t));
      if (std::abs(t) < 1e-18 * (std::abs(sum) + maxt + 1.0)) break;
    }
    auto j0 = bessel_j_eval(0.0, z);
    out.value = (2.0 / std::numbers::pi) *
                ((std::log(0.5 * z) + euler_gamma) * j0.value - sum);
    out.est_error = (maxt * 4e-16 + std::abs(std::log(0.5 * z) + euler_gamma) * j0.est_error) *
                    (2.0 / std::numbers::pi);
    return out;
  }
  out.method = BesselEval::Method::asymptotic;
  auto s = detail::hankel_pq(0.0, z);
  const double w = z - 0.25 * std::numbers::pi;
  const double amp = std::sqrt(2.0 / (std::numbers::pi * z));
  out.value = amp * (std::sin(w) * s.P + std::cos(w) * s.Q);
  out.est_error = amp * (s.omitted + 4e-16);
  return out;
}

inline double bessel_y0(double z) { return bessel_y0_eval(z).value; }

// ---------------------------------------------------------------- I_v, v in (-1,1)
inline BesselEval bessel_i_eval(double v, double x) {
  if (x < 0.0) throw std::domain_error("bessel_i: x must be >= 0");
  BesselEval out;
  if (x <= z_switch) {
    out.method = BesselEval::Method::series;
    if (x == 0.0) {
      out.value = (v == 0.0) ? 1.0 : (v > 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      return out;
    }
    double term = std::pow(0.5 * x, v) / gamma_fn(1.0 + v);
    double sum = term;
    const double q = 0.25 * x * x;
    for (int k = 0; k < 400; ++k) {
      term *= q / ((k + 1.0) * (v + k + 1.0));
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    out.value = sum;
    out.est_error = sum * 4e-16;
    return out;
  }
  // I_v(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(v) / x^k
  out.method = BesselEval::Method::asymptotic;
  const double mu = 4.0 * v * v;
  double term = 1.0, sum = 1.0, prev = std::numeric_limits<double>::max();
  double omitted = 0.0;
  for (int k = 0; k < 80; ++k) {
    double next = -term * (mu - (2 * k + 1) * (2 * k + 1)) / (8.0 * (k + 1) * x);
    if (std::abs(next) >= prev) { omitted = std::abs(next); break; }
    prev = std::abs(next);
    term = next;
    sum += term;
    omitted = std::abs(term);
    if (std::abs(term) < 1e-18) break;
  }
  const double scale = x - 0.5 * std::log(2.0 * std::numbers::pi * x);
  if (x > i_overflow) {
    out.log_scaled = true;
    out.value = scale + std::log(sum);
    out.est_error = omitted + 4e-16;
    return out;
  }
  out.value = std::exp(scale) * sum;
  out.est_error = std::exp(scale) * (omitted + 4e-16);
  return out;
}

inline double bessel_i(double v, double x) {
  auto e = bessel_i_eval(v, x);
  if (e.log_scaled) throw std::overflow_error("bessel_i: overflow, use bessel_i_scaled");
  return e.value;
}

// I_v(x) * e^{-x} * sqrt(2 pi x); stays O(1) for all large x.
inline double bessel_i_scaled(double v, double x) {
  auto e = bessel_i_eval(v, x);
  if (e.log_scaled) return std::exp(e.value - x + 0.5 * std::log(2.0 * std::numbers::pi * x));
  if (e.method == BesselEval::Method::series)
    return e.value * std::exp(-x) * std::sqrt(2.0 * std::numbers::pi * x);
  return e.value * std::exp(-x) * std::sqrt(2.0 * std::numbers::pi * x);
}

// ---------------------------------------------------------------- K_0
// Series below k0_switch; above it the log/I0 series cancels catastrophically,
// so evaluate the integral representation K0(x) = int_0^inf e^{-x cosh t} dt
// by trapezoid (the integrand is even and analytic, the rule converges
// geometrically).
inline double k0_scaled(double x) {  // K0(x) * e^{x}
  if (x <= 0.0) throw std::domain_error("k0: x must be > 0");
  if (x <= k0_switch) {
    const auto& H = detail::harmonic_table();
    double i0 = bessel_i(0.0, x);
    const double q = 0.25 * x * x;
    double pw = 1.0, sum = 0.0;
    for (int k = 1; k <= 60; ++k) {
      pw *= q / (k * (double)k);
      double t = H[k] * pw;
      sum += t;
      if (t < 1e-18 * (sum + 1.0)) break;
    }
    return (-(std::log(0.5 * x) + euler_gamma) * i0 + sum) * std::exp(x);
  }
  const double h = 0.04;
  double acc = 0.5;  // t = 0 endpoint of e^{x(1-cosh t)}
  for (int k = 1; k < 4000; ++k) {
    double t = k * h;
    double e = x * (1.0 - std::cosh(t));
    if (e < -45.0) break;
    acc += std::exp(e);
  }
  return acc * h;
}

inline double bessel_k0(double x) {
  if (x > i_overflow) throw std::overflow_error("bessel_k0: underflow, use k0_scaled");
  return k0_scaled(x) * std::exp(-x);
}

// ---------------------------------------------------------------- Jtilde_0
// Jtilde0(mu r) = (pi/2) Y0(mu r) - (log mu - log 2 + gamma) J0(mu r)
//              = (log r) J0(mu r) - sum_{k>=1} H_k (-(mu r)^2/4)^k / (k!)^2
// Both routes exposed; jtilde0 picks by argument size.
inline double jtilde0_series(double mu, double r) {
  const auto& H = detail::harmonic_table();
  const double z = mu * r;
  const double q = -0.25 * z * z;
  double pw = 1.0, sum = 0.0;
  for (int k = 1; k <= 60; ++k) {
    pw *= q / (k * (double)k);
    sum += H[k] * pw;
    if (std::abs(H[k] * pw) < 1e-18 * (std::abs(sum) + 1.0)) break;
  }
  return std::log(r) * bessel_j(0.0, z) - sum;
}

inline double jtilde0_y0_route(double mu, double r) {
  const double z = mu * r;
  return 0.5 * std::numbers::pi * bessel_y0(z) -
         (std::log(mu) - std::numbers::ln2 + euler_gamma) * bessel_j(0.0, z);
}

inline double jtilde0(double mu, double r) {
  return (mu * r <= z_switch) ? jtilde0_series(mu, r) : jtilde0_y0_route(mu, r);
}

// Jtilde0 continued to mu = ix:  -(log x - gamma_tilde) I0(xr) - K0(xr).
inline double jtilde0_imag(double x, double r) {
  return -(std::log(x) - gamma_tilde) * bessel_i(0.0, x * r) - bessel_k0(x * r);
}

// ---------------------------------------------------------------- Ei_k
// Ei_k(z) = int_1^inf e^{-z u} u^{-k} du = E_k(z), k >= 1, z > 0.
inline double expint_k(int k, double z) {
  if (k < 1) throw std::domain_error("expint_k: k must be >= 1");
  if (z <= 0.0) throw std::domain_error("expint_k: z must be > 0");
  if (z > 1.0) {
    // modified Lentz continued fraction
    const double tiny = 1e-300;
    double b = z + k, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 200; ++i) {
      double a = -static_cast<double>(i) * (k - 1 + i);
      b += 2.0;
      d = 1.0 / (a * d + b);
      c = b + a / c;
      double del = c * d;
      h *= del;
      if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-z);
  }
  // series:  E_k(z) = (-z)^{k-1}/(k-1)! * (-log z + psi(k)) - sum_{m != k-1} (-z)^m / ((m-k+1) m!)
  double psi = -euler_gamma;
  for (int j = 1; j <= k - 1; ++j) psi += 1.0 / j;
  double fac = 1.0;  // (-z)^{k-1}/(k-1)!
  for (int j = 1; j <= k - 1; ++j) fac *= -z / j;
  double sum = fac * (-std::log(z) + psi);
  double pw = 1.0;  // (-z)^m / m!
  for (int m = 0; m <= 300; ++m) {
    if (m != k - 1) {
      double t = pw / (m - k + 1.0);
      sum -= t;
      if (std::abs(t) < 1e-18 * (std::abs(sum) + 1.0) && m > k) break;
    }
    pw *= -z / (m + 1.0);
  }
  return sum;
}

} // namespace conezeta::bessel
