#pragma once
// Assembly of the zeta-function singularity ledger: unusual poles with their
// orders and leading coefficients, logarithmic branch points, the log-at-zero
// term, plus the decomposable / split-type refinements and the evaluable
// resolvent/heat tail structures.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "conezeta/bessel.hpp"
#include "conezeta/genseries.hpp"
#include "conezeta/quadrature.hpp"
#include "conezeta/symplectic.hpp"

namespace conezeta {

struct PoleEntry {
  double location = 0.0;  // s = -xi
  int order = 1;          // |p_xi| + 1
  cplx leading = 0.0;     // f_xi(-xi)
  std::optional<cplx> combined_residue;  // order 1, xi not integer
  bool integer_flag = false;             // xi in Z: sine factor vanishes at s=-xi
};

struct LogEntry {
  double location = 0.0;  // s = -xi (xi = 0 allowed)
  int ell = 1;            // ell_xi
  cplx leading = 0.0;
  bool unreliable = false;  // ell may sit beyond the ell-truncation
};

struct DecomposableView {
  std::vector<cplx> beta;                     // beta_1..beta_K
  std::vector<std::pair<double, cplx>> c_xi;  // q1-block poles: (xi, c_xi)

  // f(s) = sum_k beta_k (-2s)^{k-1}/(k-1)!
  cplx f(double s) const {
    cplx acc = 0.0;
    double pw = 1.0, fact = 1.0;
    for (size_t k = 1; k <= beta.size(); ++k) {
      acc += beta[k - 1] * pw / fact;
      pw *= -2.0 * s;
      fact *= k;
    }
    return acc;
  }
};

struct SplitView {
  std::vector<double> kappas;  // gamma_tilde - tan(theta_l), theta_l != pi/2 only

  double f(double s) const {
    double acc = 0.0;
    for (double k : kappas) acc += std::exp(-2.0 * s * k);
    return acc;
  }
};

struct SingularityReport {
  int log_at_zero_coeff = 0;  // j0 - q0, attached to e^{-2s(log2-gamma)} log s
  std::vector<PoleEntry> poles;  // by location descending
  std::vector<LogEntry> logs;
  Truncation trunc;
  std::optional<DecomposableView> decomposable_view;
  std::optional<SplitView> split_view;
  // raw data kept for tail evaluation downstream
  CTable ctable;
  int j0 = 0;
  int q0 = 0;
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

inline bool near_integer(double xi) { return std::abs(xi - std::round(xi)) < 1e-9; }

// Ledger rows from a coefficient table (xi > 0 rows give poles/logs; the
// xi = 0 row can only carry a log entry).
inline void fill_ledgers(SingularityReport& rep) {
  for (const auto& row : rep.ctable.rows) {
    bool xi_zero = row.xi < xi_merge_tol;
    if (!xi_zero && row.p_marker) {
      int p = *row.p_marker;  // <= 0
      int ap = -p;
      PoleEntry e;
      e.location = -row.xi;
      e.order = ap + 1;
      cplx c = row.coeffs.at(p);
      e.leading = ((ap + 1) % 2 == 0 ? 1.0 : -1.0) * c * row.xi * factorial(ap) /
                  std::exp2(static_cast<double>(ap));
      e.integer_flag = near_integer(row.xi);
      if (e.order == 1 && !e.integer_flag)
        e.combined_residue =
            std::sin(-std::numbers::pi * row.xi) / std::numbers::pi * e.leading;
      rep.poles.push_back(e);
    }
    if (row.ell_marker) {
      int l = *row.ell_marker;  // >= 1
      LogEntry e;
      e.location = -row.xi;
      e.ell = l;
      cplx c = row.coeffs.at(l);
      if (xi_zero)
        e.leading = c * std::exp2(static_cast<double>(l)) / factorial(l - 1);
      else
        e.leading = -c * row.xi * std::exp2(static_cast<double>(l)) / factorial(l - 1);
      e.unreliable = row.ell_unreliable;
      rep.logs.push_back(e);
    }
  }
}

} // namespace detail

inline SingularityReport zeta_structure(const MatrixXcd& A, const MatrixXcd& B,
                                        const SpectralSpec& spec,
                                        double xi_max = 6.0, int ell_max = 12,
                                        int K = 10) {
  auto v = validate_lagrangian(A, B, spec);
  if (v.verdict != LagrangianVerdict::ok)
    throw std::invalid_argument("zeta_structure: invalid boundary condition");
  SingularityReport rep;
  rep.trunc = Truncation{xi_max, ell_max};
  rep.q0 = spec.q0;

  GenSeries p = det_p(A, B, spec);
  if (p.empty()) throw std::runtime_error("degenerate Lagrangian determinant");
  auto norm = normalize_leading(p);
  rep.j0 = norm.j0;
  rep.log_at_zero_coeff = norm.j0 - spec.q0;
  if (!norm.tail.empty()) rep.ctable = log_expand(norm.tail, rep.trunc);
  rep.ctable.trunc = rep.trunc;
  detail::fill_ledgers(rep);

  auto dec = decompose(A, B, spec);
  if (dec.decomposable) {
    DecomposableView dv;
    dv.beta = beta_coeffs(poly_p0(dec.A0, dec.B0), K);
    if (dec.A1.rows() > 0) dv.c_xi = poly_p1(dec.A1, dec.B1, spec.nus, rep.trunc).c;
    rep.decomposable_view = dv;
    if (dec.split_angles) {
      SplitView sv;
      for (double th : *dec.split_angles)
        if (std::abs(th - 0.5 * std::numbers::pi) > 1e-12)
          sv.kappas.push_back(gamma_tilde - std::tan(th));
      rep.split_view = sv;
    }
  }
  return rep;
}

inline SingularityReport decomposable_structure(const MatrixXcd& A0, const MatrixXcd& B0,
                                                const MatrixXcd& A1, const MatrixXcd& B1,
                                                const SpectralSpec& spec, int K = 10,
                                                double xi_max = 6.0) {
  SingularityReport rep;
  rep.trunc = Truncation{xi_max, 12};
  rep.q0 = spec.q0;
  DecomposableView dv;
  auto p0 = poly_p0(A0, B0);
  dv.beta = beta_coeffs(p0, K);
  rep.log_at_zero_coeff = -(static_cast<int>(p0.size()) - 1);
  if (A1.rows() > 0) {
    auto p1 = poly_p1(A1, B1, spec.nus, rep.trunc);
    dv.c_xi = p1.c;
    for (const auto& [xi, c] : p1.c) {
      PoleEntry e;
      e.location = -xi;
      e.order = 1;
      e.leading = -c * xi;
      e.integer_flag = detail::near_integer(xi);
      if (!e.integer_flag)
        e.combined_residue = std::sin(-std::numbers::pi * xi) / std::numbers::pi * e.leading;
      rep.poles.push_back(e);
    }
  }
  rep.decomposable_view = dv;
  auto sa = split_angles(A0, B0);
  if (sa) {
    SplitView sv;
    for (double th : *sa)
      if (std::abs(th - 0.5 * std::numbers::pi) > 1e-12)
        sv.kappas.push_back(gamma_tilde - std::tan(th));
    rep.split_view = sv;
  }
  return rep;
}

// ------------------------------------------------------- resolvent tails
// Closed term algebra coef * u^{-a} (c - log u)^{-b} with u = -lambda;
// stable under d/dlambda.
struct LogPowTerm {
  cplx coef = 0.0;
  double a = 0.0;
  int b = 0;
  double c = 0.0;
};

inline std::vector<LogPowTerm> d_dlambda(const std::vector<LogPowTerm>& ts) {
  std::vector<LogPowTerm> out;
  out.reserve(2 * ts.size());
  for (const auto& t : ts) {
    if (t.a != 0.0) out.push_back({t.coef * t.a, t.a + 1.0, t.b, t.c});
    if (t.b != 0) out.push_back({-t.coef * static_cast<double>(t.b), t.a + 1.0, t.b + 1, t.c});
  }
  return out;
}

inline cplx eval_terms(const std::vector<LogPowTerm>& ts, double lambda) {
  if (lambda >= 0.0) throw std::domain_error("eval_terms: lambda must be negative");
  double u = -lambda;
  cplx acc = 0.0;
  for (const auto& t : ts)
    acc += t.coef * std::pow(u, -t.a) * std::pow(t.c - std::log(u), -t.b);
  return acc;
}

// (1/N!) d^N/dl^N { (q0-j0) / ((-l)(log(-l) - 2 gt)) }
//   - (1/N!) d^{N+1}/dl^{N+1} { sum 2^l c_{l xi} (-l)^{-xi} (2 gt - log(-l))^{-l} }
inline cplx resolvent_tail_terms(const SingularityReport& rep, int N, double lambda) {
  if (N < 0) throw std::invalid_argument("resolvent_tail_terms: N must be >= 0");
  const double c2 = 2.0 * gamma_tilde;
  std::vector<LogPowTerm> first;
  // (q0 - j0) u^{-1} (log u - 2gt)^{-1} = -(q0 - j0) u^{-1} (2gt - log u)^{-1}
  if (rep.q0 != rep.j0)
    first.push_back({cplx(-(rep.q0 - rep.j0), 0.0), 1.0, 1, c2});
  std::vector<LogPowTerm> second;
  for (const auto& row : rep.ctable.rows)
    for (const auto& [ell, c] : row.coeffs)
      second.push_back({c * std::exp2(static_cast<double>(ell)), row.xi, ell, c2});

  double invfact = 1.0;
  for (int i = 2; i <= N; ++i) invfact /= i;
  for (int i = 0; i < N; ++i) first = d_dlambda(first);
  for (int i = 0; i < N + 1; ++i) second = d_dlambda(second);
  return invfact * (eval_terms(first, lambda) - eval_terms(second, lambda));
}

// Decomposable refinement: -(1/N!) d^{N+1} { sum c_xi (-l)^{-xi} }
//                          +(1/N!) d^N { (-l)^{-1} sum 2^{k-1} beta_k (log(-l))^{-k} }
inline cplx resolvent_tail_terms_decomposable(const DecomposableView& dv, int N,
                                              double lambda) {
  std::vector<LogPowTerm> first;
  for (size_t k = 1; k <= dv.beta.size(); ++k)
    first.push_back({dv.beta[k - 1] * std::exp2(static_cast<double>(k) - 1.0),
                     1.0, static_cast<int>(k), 0.0});
  // (log u)^{-k} = (0 - log u)^{-k} * (-1)^{k}
  for (size_t k = 1; k <= dv.beta.size(); ++k)
    first[k - 1].coef *= (k % 2 == 0 ? 1.0 : -1.0);
  std::vector<LogPowTerm> second;
  for (const auto& [xi, c] : dv.c_xi) second.push_back({c, xi, 0, 0.0});

  double invfact = 1.0;
  for (int i = 2; i <= N; ++i) invfact /= i;
  for (int i = 0; i < N; ++i) first = d_dlambda(first);
  for (int i = 0; i < N + 1; ++i) second = d_dlambda(second);
  return invfact * (eval_terms(first, lambda) - eval_terms(second, lambda));
}

// ------------------------------------------------------- heat structure
struct HeatFamily {
  double xi = 0.0;
  int k_lo = 0, k_hi = 0;     // (log t)^k exponents; k_hi < k_lo means open-ended downward
  bool open_down = false;     // family continues to -infinity in k
  std::vector<int> zero_ks;   // exponents whose coefficient is constrained to 0
};

struct HeatStructure {
  bool half_integer_scale = true;  // t^{(-n+k)/2} background (coefficients out of scope)
  bool log_t_flag = false;         // a genuine log t term
  bool inv_log_family = false;     // (log t)^{-1-k}, k >= 0
  std::vector<HeatFamily> pole_families;  // t^xi (log t)^k, k = 0..|p_xi|+1
  std::vector<HeatFamily> log_families;   // t^xi (log t)^{-ell_xi-k}, k >= 0
  bool decomposable = false;       // refinement: t^xi poles + sum d_k (log t)^{-k}
};

inline HeatStructure heat_structure(const SingularityReport& rep) {
  HeatStructure hs;
  hs.log_t_flag = rep.log_at_zero_coeff != 0;
  hs.inv_log_family = rep.log_at_zero_coeff != 0;
  for (const auto& e : rep.poles) {
    HeatFamily f;
    f.xi = -e.location;
    f.k_lo = 0;
    f.k_hi = e.order;  // |p_xi| + 1
    if (std::abs(f.xi - 1.0) < 1e-9) f.zero_ks.push_back(0);  // c~_{1,0} = 0
    if (!detail::near_integer(f.xi) || f.xi < -1e-9)
      f.zero_ks.push_back(e.order);  // c~_{xi,|p|+1} = 0 off the integers
    hs.pole_families.push_back(f);
  }
  for (const auto& e : rep.logs) {
    if (e.location > -1e-9) continue;  // xi = 0 folds into the log/inv-log flags
    HeatFamily f;
    f.xi = -e.location;
    f.k_lo = -e.ell;
    f.open_down = true;
    hs.log_families.push_back(f);
  }
  hs.decomposable = rep.decomposable_view.has_value();
  return hs;
}

// ------------------------------------------------------- verify_logint
// int_{t0}^inf x^{-2s-1} (c - log x)^{-k} dx  ==  (-1)^k e^{-2sc}/C^{k-1} Ei_k(2sC),
// C = log t0 - c > 0.
struct LogintResult {
  double lhs = 0.0, rhs = 0.0, diff = 0.0;
};

inline LogintResult verify_logint(double c, double s, int k, double t0) {
  if (!(std::log(t0) > c)) throw std::domain_error("verify_logint: need log t0 > c");
  if (s <= 0.0 || k < 1) throw std::domain_error("verify_logint: need s > 0, k >= 1");
  const double C = std::log(t0) - c;
  LogintResult out;
  // substitute u = log x: int_{log t0}^inf e^{-2su} (c-u)^{-k} du; the base
  // c - u is negative there, so pull the sign out before std::pow
  double U = std::log(t0) + 60.0 / (2.0 * s);
  auto g = [&](double u) {
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return sign * std::exp(-2.0 * s * u) * std::pow(u - c, -(double)k);
  };
  out.lhs = quad::adaptive_simpson(g, std::log(t0), U, 1e-13);
  double sign = (k % 2 == 0) ? 1.0 : -1.0;
  out.rhs = sign * std::exp(-2.0 * s * c) / std::pow(C, k - 1) *
            bessel::expint_k(k, 2.0 * s * C);
  out.diff = std::abs(out.lhs - out.rhs);
  return out;
}

} // namespace conezeta
