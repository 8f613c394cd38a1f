#pragma once
// Finite generalized power series in (x, y): terms c * x^ell * y^{2 xi} with
// xi = sum_j k_j nu_j carried as exact integer vectors against the nu basis.
// The k-vectors stay exact through all arithmetic; merging by numerical xi
// happens only when flattening to a coefficient table.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "conezeta/bessel.hpp"
#include "conezeta/symplectic.hpp"

namespace conezeta {

inline constexpr double xi_merge_tol = 1e-9;
inline constexpr double coeff_drop_rel = 1e-14;

struct Truncation {
  double xi_max = 6.0;
  int ell_max = 12;
};

struct TermKey {
  int ell = 0;
  std::vector<int> kvec;  // one slot per nu_j; entries may go negative after
                          // factoring out the leading monomial
  auto operator<=>(const TermKey&) const = default;
};

class GenSeries {
 public:
  GenSeries() = default;
  explicit GenSeries(std::vector<double> nus) : nus_(std::move(nus)) {}

  static GenSeries constant(std::vector<double> nus, cplx c) {
    GenSeries s(std::move(nus));
    if (c != 0.0) s.terms_[TermKey{0, std::vector<int>(s.nus_.size(), 0)}] = c;
    return s;
  }

  // c * x^ell * y^{2 sum k_j nu_j}
  static GenSeries monomial(std::vector<double> nus, int ell, std::vector<int> kvec, cplx c) {
    GenSeries s(std::move(nus));
    if (kvec.size() != s.nus_.size()) throw std::invalid_argument("monomial: kvec size");
    if (c != 0.0) s.terms_[TermKey{ell, std::move(kvec)}] = c;
    return s;
  }

  const std::vector<double>& nus() const { return nus_; }
  const std::map<TermKey, cplx>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  size_t size() const { return terms_.size(); }

  double xi_of(const std::vector<int>& kvec) const {
    double v = 0.0;
    for (size_t j = 0; j < nus_.size(); ++j) v += kvec[j] * nus_[j];
    return v;
  }

  void add_term(const TermKey& k, cplx c) {
    auto it = terms_.find(k);
    if (it == terms_.end()) {
      if (c != 0.0) terms_[k] = c;
    } else {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  GenSeries& operator+=(const GenSeries& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, c);
    return *this;
  }
  GenSeries& operator-=(const GenSeries& o) {
    for (const auto& [k, c] : o.terms_) add_term(k, -c);
    return *this;
  }
  GenSeries operator+(const GenSeries& o) const { GenSeries r = *this; r += o; return r; }
  GenSeries operator-(const GenSeries& o) const { GenSeries r = *this; r -= o; return r; }
  GenSeries operator*(cplx c) const {
    GenSeries r(nus_);
    if (c == 0.0) return r;
    for (const auto& [k, v] : terms_) r.terms_[k] = v * c;
    return r;
  }

  GenSeries operator*(const GenSeries& o) const {
    GenSeries r(nus_);
    for (const auto& [ka, ca] : terms_) {
      for (const auto& [kb, cb] : o.terms_) {
        TermKey k;
        k.ell = ka.ell + kb.ell;
        k.kvec.resize(nus_.size());
        for (size_t j = 0; j < nus_.size(); ++j) k.kvec[j] = ka.kvec[j] + kb.kvec[j];
        r.add_term(k, ca * cb);
      }
    }
    return r;
  }

  // Drop terms outside the working window.  ell bounds are a band
  // [-ell_slack, ell_max + ell_slack] so that later multiplications by
  // negative-ell factors cannot push discarded mass back into range.
  // high_xis, when given, records the xi of every dropped term with ell
  // above the window (the least positive ell there is then unknowable).
  void truncate(double xi_max, int ell_hi, int ell_lo,
                std::vector<double>* high_xis = nullptr) {
    for (auto it = terms_.begin(); it != terms_.end();) {
      double xi = xi_of(it->first.kvec);
      if (xi > xi_max + xi_merge_tol || it->first.ell > ell_hi || it->first.ell < ell_lo) {
        if (high_xis && it->first.ell > ell_hi && xi <= xi_max + xi_merge_tol)
          high_xis->push_back(xi);
        it = terms_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void drop_tiny(double abs_tol) {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) < abs_tol) it = terms_.erase(it);
      else ++it;
    }
  }

  cplx eval(double x, double y) const {
    cplx s = 0.0;
    for (const auto& [k, c] : terms_)
      s += c * std::pow(x, k.ell) * std::pow(y, 2.0 * xi_of(k.kvec));
    return s;
  }

 private:
  std::vector<double> nus_;
  std::map<TermKey, cplx> terms_;
};

inline GenSeries operator*(cplx c, const GenSeries& s) { return s * c; }

// ------------------------------------------------------------------ det_p
// Symbolic characteristic polynomial p(x, y) = det(A - B * D) where
// D = diag(x Id_{q0}, tau_j y^{2 nu_j}).  Laplace expansion along columns;
// q stays small (<= 8 in practice) so this is cheap and exact.
namespace detail {

inline GenSeries det_recursive(const std::vector<std::vector<GenSeries>>& M,
                               std::vector<int>& rows, int col,
                               const std::vector<double>& nus) {
  const int n = static_cast<int>(M.size());
  if (col == n) return GenSeries::constant(nus, 1.0);
  GenSeries acc(nus);
  int sign = 1;
  for (size_t ri = 0; ri < rows.size(); ++ri) {
    int r = rows[ri];
    if (!M[r][col].empty()) {
      std::vector<int> rest;
      rest.reserve(rows.size() - 1);
      for (size_t rj = 0; rj < rows.size(); ++rj)
        if (rj != ri) rest.push_back(rows[rj]);
      GenSeries sub = det_recursive(M, rest, col + 1, nus);
      acc += (M[r][col] * sub) * cplx(sign, 0.0);
    }
    sign = -sign;
  }
  return acc;
}

} // namespace detail

inline GenSeries det_p(const MatrixXcd& A, const MatrixXcd& B, const SpectralSpec& spec,
                       double tau_scale = 1.0) {
  spec.check();
  const int q = spec.q();
  if (A.rows() != q || A.cols() != q || B.rows() != q || B.cols() != q)
    throw std::invalid_argument("det_p: A, B must be q x q");
  const std::vector<double>& nus = spec.nus;
  const int q1 = spec.q1();

  std::vector<GenSeries> d(q, GenSeries(nus));
  for (int j = 0; j < spec.q0; ++j)
    d[j] = GenSeries::monomial(nus, 1, std::vector<int>(q1, 0), 1.0);
  for (int j = 0; j < q1; ++j) {
    std::vector<int> kv(q1, 0);
    kv[j] = 1;
    d[spec.q0 + j] =
        GenSeries::monomial(nus, 0, kv, tau_scale * bessel::tau_factor(nus[j]));
  }

  std::vector<std::vector<GenSeries>> M(q, std::vector<GenSeries>(q, GenSeries(nus)));
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      GenSeries e = GenSeries::constant(nus, A(i, j));
      e -= d[j] * B(i, j);
      M[i][j] = e;
    }
  std::vector<int> rows(q);
  for (int i = 0; i < q; ++i) rows[i] = i;
  return detail::det_recursive(M, rows, 0, nus);
}

// --------------------------------------------------------- normalize_leading
// p = a x^{j0} y^{2 alpha0} (1 + tail), with alpha0 the smallest xi present
// (ties by kvec lexicographic) and j0 the smallest x-power at that xi.
struct NormalizedSeries {
  int j0 = 0;
  std::vector<int> alpha0_kvec;
  double alpha0 = 0.0;
  cplx a = 0.0;
  GenSeries tail;
};

inline NormalizedSeries normalize_leading(const GenSeries& p) {
  if (p.empty()) throw std::invalid_argument("normalize_leading: zero series");
  NormalizedSeries out;
  bool first = true;
  double best_xi = 0.0;
  const std::vector<int>* best_kvec = nullptr;
  for (const auto& [k, c] : p.terms()) {
    double xi = p.xi_of(k.kvec);
    if (first || xi < best_xi - xi_merge_tol ||
        (xi < best_xi + xi_merge_tol && k.kvec < *best_kvec)) {
      best_xi = xi;
      best_kvec = &k.kvec;
      first = false;
    }
  }
  out.alpha0_kvec = *best_kvec;
  out.alpha0 = best_xi;
  bool have_j0 = false;
  for (const auto& [k, c] : p.terms()) {
    if (k.kvec != out.alpha0_kvec) continue;
    if (!have_j0 || k.ell < out.j0) {
      out.j0 = k.ell;
      out.a = c;
      have_j0 = true;
    }
  }
  out.tail = GenSeries(p.nus());
  for (const auto& [k, c] : p.terms()) {
    TermKey nk;
    nk.ell = k.ell - out.j0;
    nk.kvec.resize(k.kvec.size());
    for (size_t j = 0; j < k.kvec.size(); ++j) nk.kvec[j] = k.kvec[j] - out.alpha0_kvec[j];
    if (nk.ell == 0 && std::all_of(nk.kvec.begin(), nk.kvec.end(),
                                   [](int v) { return v == 0; })) {
      cplx rest = c / out.a - 1.0;
      if (rest != 0.0) out.tail.add_term(nk, rest);
    } else {
      out.tail.add_term(nk, c / out.a);
    }
  }
  return out;
}

// ------------------------------------------------------------------ CTable
struct CTableRow {
  double xi = 0.0;
  std::map<int, cplx> coeffs;            // ell -> c_{ell, xi}
  std::vector<std::vector<int>> kvecs;   // exact keys merged into this bucket
  std::optional<int> p_marker;           // min ell <= 0 with c != 0
  std::optional<int> ell_marker;         // min ell > 0 with c != 0
  bool saw_high_ell = false;             // bucket had terms beyond the ell window
  bool ell_unreliable = false;
};

struct CTable {
  std::vector<CTableRow> rows;  // ascending xi
  Truncation trunc;

  const CTableRow* find(double xi) const {
    for (const auto& r : rows)
      if (std::abs(r.xi - xi) < 1e-7) return &r;
    return nullptr;
  }
};

inline void extract_markers(CTable& t) {
  for (auto& row : t.rows) {
    row.p_marker.reset();
    row.ell_marker.reset();
    for (const auto& [ell, c] : row.coeffs) {
      if (ell <= 0 && (!row.p_marker || ell < *row.p_marker)) row.p_marker = ell;
      if (ell > 0 && (!row.ell_marker || ell < *row.ell_marker)) row.ell_marker = ell;
    }
    // the least positive ell might sit beyond the kept window
    row.ell_unreliable = !row.ell_marker && row.saw_high_ell;
  }
}

inline CTable flatten_to_table(const GenSeries& s, const Truncation& trunc) {
  struct Entry {
    double xi;
    TermKey key;
    cplx c;
    bool high;  // ell beyond the window: contributes only the reliability bit
  };
  std::vector<Entry> entries;
  for (const auto& [k, c] : s.terms()) {
    double xi = s.xi_of(k.kvec);
    if (xi > trunc.xi_max + xi_merge_tol) continue;
    bool high = k.ell > trunc.ell_max;
    if (k.ell < -trunc.ell_max) continue;
    entries.push_back({xi, k, c, high});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.xi != b.xi) return a.xi < b.xi;
    return a.key < b.key;
  });
  CTable table;
  table.trunc = trunc;
  for (const auto& e : entries) {
    if (table.rows.empty() || e.xi > table.rows.back().xi + xi_merge_tol) {
      table.rows.push_back(CTableRow{});
      table.rows.back().xi = e.xi;
    }
    auto& row = table.rows.back();
    if (e.high) {
      row.saw_high_ell = true;
    } else {
      row.coeffs[e.key.ell] += e.c;
      row.kvecs.push_back(e.key.kvec);
    }
  }
  // representative xi = first (smallest) in bucket; drop relatively tiny coefficients
  for (auto& row : table.rows) {
    double mx = 0.0;
    for (const auto& [ell, c] : row.coeffs) mx = std::max(mx, std::abs(c));
    for (auto it = row.coeffs.begin(); it != row.coeffs.end();) {
      if (std::abs(it->second) < coeff_drop_rel * mx) it = row.coeffs.erase(it);
      else ++it;
    }
  }
  std::erase_if(table.rows, [](const CTableRow& r) { return r.coeffs.empty(); });
  extract_markers(table);
  return table;
}

// --------------------------------------------------------------- log_expand
namespace detail {

// Long-double term maps for the log/exp power-series loops.  Intermediate
// powers carry coefficients several orders above the final ones and cancel
// back down, so the extra mantissa bits keep the round trip below 1e-12.
using lcplx = std::complex<long double>;
using LMap = std::map<TermKey, lcplx>;

inline double lmap_xi(const std::vector<double>& nus, const std::vector<int>& kvec) {
  double v = 0.0;
  for (size_t j = 0; j < nus.size(); ++j) v += kvec[j] * nus[j];
  return v;
}

inline LMap to_lmap(const GenSeries& s) {
  LMap m;
  for (const auto& [k, c] : s.terms()) m[k] = lcplx(c.real(), c.imag());
  return m;
}

inline GenSeries from_lmap(const LMap& m, const std::vector<double>& nus) {
  GenSeries s(nus);
  for (const auto& [k, c] : m)
    s.add_term(k, cplx(static_cast<double>(c.real()), static_cast<double>(c.imag())));
  return s;
}

inline LMap lmap_mul(const LMap& a, const LMap& b, size_t nslots) {
  LMap r;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) {
      TermKey k;
      k.ell = ka.ell + kb.ell;
      k.kvec.resize(nslots);
      for (size_t j = 0; j < nslots; ++j) k.kvec[j] = ka.kvec[j] + kb.kvec[j];
      r[k] += ca * cb;
    }
  return r;
}

inline void lmap_truncate(LMap& m, const std::vector<double>& nus, double xi_max,
                          int ell_hi, int ell_lo, std::vector<double>* high_xis) {
  for (auto it = m.begin(); it != m.end();) {
    double xi = lmap_xi(nus, it->first.kvec);
    if (xi > xi_max + xi_merge_tol || it->first.ell > ell_hi ||
        it->first.ell < ell_lo || std::abs(it->second) < 1e-250L) {
      if (high_xis && it->first.ell > ell_hi && xi <= xi_max + xi_merge_tol)
        high_xis->push_back(xi);
      it = m.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace detail

// log(1 + tail) truncated to xi <= xi_max, |ell| <= ell_max.  Every tail term
// must have xi > 0, or xi == 0 with ell > 0.  Terms with negative ell are
// allowed provided xi > 0; they bound how far the working ell-band must
// extend beyond ell_max, since each negative-ell factor spends xi-budget.
inline GenSeries log_expand_series(const GenSeries& tail, const Truncation& trunc,
                                   std::vector<double>* high_xis = nullptr) {
  double beta_min = std::numeric_limits<double>::infinity();
  int ell_neg = 0;
  for (const auto& [k, c] : tail.terms()) {
    double xi = tail.xi_of(k.kvec);
    if (xi < -xi_merge_tol || (std::abs(xi) <= xi_merge_tol && k.ell <= 0))
      throw std::invalid_argument("log_expand: tail term with xi <= 0 and ell <= 0");
    if (xi > xi_merge_tol) beta_min = std::min(beta_min, xi);
    ell_neg = std::max(ell_neg, -k.ell);
  }
  int slack = 0;
  if (ell_neg > 0) {
    if (!std::isfinite(beta_min))
      throw std::invalid_argument("log_expand: negative ell without xi budget");
    slack = ell_neg * static_cast<int>(std::ceil(trunc.xi_max / beta_min) + 1);
  }
  const int ell_hi = trunc.ell_max + slack;
  const int ell_lo = -trunc.ell_max - slack;

  const auto& nus = tail.nus();
  detail::LMap t = detail::to_lmap(tail);
  detail::lmap_truncate(t, nus, trunc.xi_max, ell_hi, ell_lo, high_xis);
  detail::LMap acc, pw = t;
  int m_cap = 4 * (trunc.ell_max + slack + 4);
  if (std::isfinite(beta_min))
    m_cap += static_cast<int>(std::ceil(trunc.xi_max / beta_min)) + 4;
  for (int m = 1; m <= m_cap && !pw.empty(); ++m) {
    long double sg = (m % 2 == 1 ? 1.0L : -1.0L) / m;
    for (const auto& [k, c] : pw) acc[k] += c * sg;
    pw = detail::lmap_mul(pw, t, nus.size());
    detail::lmap_truncate(pw, nus, trunc.xi_max, ell_hi, ell_lo, high_xis);
  }
  return detail::from_lmap(acc, nus);
}

inline CTable log_expand(const GenSeries& tail, const Truncation& trunc = {}) {
  std::vector<double> high_xis;
  CTable t = flatten_to_table(log_expand_series(tail, trunc, &high_xis), trunc);
  std::sort(high_xis.begin(), high_xis.end());
  high_xis.erase(std::unique(high_xis.begin(), high_xis.end(),
                             [](double a, double b) { return b - a < xi_merge_tol; }),
                 high_xis.end());
  for (double xi : high_xis) {
    bool found = false;
    for (auto& row : t.rows)
      if (std::abs(row.xi - xi) < xi_merge_tol) {
        row.saw_high_ell = true;
        found = true;
      }
    if (!found) {
      // the whole family at this xi sat beyond the ell window; keep an empty
      // marker row so the uncertainty is visible downstream
      CTableRow row;
      row.xi = xi;
      row.saw_high_ell = true;
      t.rows.push_back(row);
    }
  }
  std::sort(t.rows.begin(), t.rows.end(),
            [](const CTableRow& a, const CTableRow& b) { return a.xi < b.xi; });
  extract_markers(t);
  return t;
}

// exp of a constant-free series (for round-trip checks)
inline GenSeries exp_expand_series(const GenSeries& u, const Truncation& trunc) {
  for (const auto& [k, c] : u.terms()) {
    double xi = u.xi_of(k.kvec);
    if (std::abs(xi) <= xi_merge_tol &&
        std::all_of(k.kvec.begin(), k.kvec.end(), [](int v) { return v == 0; }) && k.ell == 0)
      throw std::invalid_argument("exp_expand: constant term present");
  }
  double beta_min = std::numeric_limits<double>::infinity();
  int ell_neg = 0;
  for (const auto& [k, c] : u.terms()) {
    double xi = u.xi_of(k.kvec);
    if (xi > xi_merge_tol) beta_min = std::min(beta_min, xi);
    ell_neg = std::max(ell_neg, -k.ell);
  }
  int slack = 0;
  if (ell_neg > 0 && std::isfinite(beta_min))
    slack = ell_neg * static_cast<int>(std::ceil(trunc.xi_max / beta_min) + 1);
  const int ell_hi = trunc.ell_max + slack;
  const int ell_lo = -trunc.ell_max - slack;
  const auto& nus = u.nus();
  detail::LMap t = detail::to_lmap(u);
  detail::lmap_truncate(t, nus, trunc.xi_max, ell_hi, ell_lo, nullptr);
  detail::LMap acc = detail::to_lmap(GenSeries::constant(nus, 1.0));
  detail::LMap pw = t;
  long double fact = 1.0L;
  int m_cap = 4 * (trunc.ell_max + slack + 4) +
              (std::isfinite(beta_min)
                   ? static_cast<int>(std::ceil(trunc.xi_max / beta_min)) + 4
                   : 0);
  for (int m = 1; m <= m_cap && !pw.empty(); ++m) {
    fact *= m;
    for (const auto& [k, c] : pw) acc[k] += c / fact;
    pw = detail::lmap_mul(pw, t, nus.size());
    detail::lmap_truncate(pw, nus, trunc.xi_max, ell_hi, ell_lo, nullptr);
  }
  return detail::from_lmap(acc, nus);
}

// --------------------------------------------------------------- poly_p0
// p0(z) = det((gamma_tilde - z) A0 - B0) as a dense polynomial in z
// (coefficients ascending), obtained by interpolation at q0+1 nodes.
inline std::vector<cplx> poly_p0(const MatrixXcd& A0, const MatrixXcd& B0) {
  const int q0 = static_cast<int>(A0.rows());
  if (q0 == 0) return {cplx(1.0, 0.0)};
  const int n = q0 + 1;
  Eigen::MatrixXcd V(n, n);
  Eigen::VectorXcd rhs(n);
  for (int i = 0; i < n; ++i) {
    double z = -1.0 + 2.0 * i / (n - 1);  // nodes in [-1, 1]
    MatrixXcd M = (gamma_tilde - z) * A0 - B0;
    rhs(i) = M.determinant();
    cplx pw = 1.0;
    for (int j = 0; j < n; ++j) {
      V(i, j) = pw;
      pw *= z;
    }
  }
  Eigen::VectorXcd sol = V.fullPivLu().solve(rhs);
  std::vector<cplx> coeffs(n);
  for (int i = 0; i < n; ++i) coeffs[i] = sol(i);
  // trim numerically-zero leading coefficients
  double mx = 0.0;
  for (auto& c : coeffs) mx = std::max(mx, std::abs(c));
  while (coeffs.size() > 1 && std::abs(coeffs.back()) <= 1e-12 * mx) coeffs.pop_back();
  return coeffs;
}

// beta_k from p0'/p0 = sum_{k>=1} beta_k z^{-k} (expansion at infinity);
// beta_1 = deg p0.
inline std::vector<cplx> beta_coeffs(const std::vector<cplx>& p0, int K) {
  const int d = static_cast<int>(p0.size()) - 1;
  std::vector<cplx> beta(K + 1, 0.0);  // 1-based
  if (d == 0) return std::vector<cplx>(beta.begin() + 1, beta.end());
  // match z^m coefficients of p0(z) * sum beta_k z^{-k} = p0'(z), m = d-1 .. d-K
  for (int k = 1; k <= K; ++k) {
    int m = d - k;
    cplx lhs = (m + 1 >= 0 && m + 1 <= d) ? cplx(m + 1.0, 0.0) * p0[m + 1] : cplx(0.0);
    cplx acc = 0.0;
    for (int j = 1; j < k; ++j) {
      int idx = m + j;
      if (idx >= 0 && idx <= d) acc += beta[j] * p0[idx];
    }
    beta[k] = (lhs - acc) / p0[d];
  }
  return std::vector<cplx>(beta.begin() + 1, beta.end());
}

// --------------------------------------------------------------- poly_p1
// Pure q1 block: p1(y) = det(A1 - B1 diag(tau_j y^{2 nu_j})), normalized and
// log-expanded; returns the xi -> c_xi list (all terms have ell = 0).
struct P1Expansion {
  double alpha0 = 0.0;
  cplx a = 0.0;
  std::vector<std::pair<double, cplx>> c;  // (xi, c_xi), xi > 0
};

inline P1Expansion poly_p1(const MatrixXcd& A1, const MatrixXcd& B1,
                           const std::vector<double>& nus, const Truncation& trunc = {}) {
  SpectralSpec s1;
  s1.q0 = 0;
  s1.nus = nus;
  s1.R = 1.0;
  GenSeries p = det_p(A1, B1, s1);
  auto norm = normalize_leading(p);
  P1Expansion out;
  out.alpha0 = norm.alpha0;
  out.a = norm.a;
  if (norm.tail.empty()) return out;
  CTable t = log_expand(norm.tail, trunc);
  for (const auto& row : t.rows) {
    auto it = row.coeffs.find(0);
    if (it != row.coeffs.end() && row.xi > xi_merge_tol)
      out.c.push_back({row.xi, it->second});
  }
  return out;
}

} // namespace conezeta
