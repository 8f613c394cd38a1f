// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

#include "conezeta/model.hpp"
#include "conezeta/singularity.hpp"

using namespace conezeta;
namespace nb = std::numbers;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
  std::printf("%s  criterion %2d  %-28s %s\n", ok ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  if (!ok) ++failures;
}

MatrixXcd mat1(double v) {
  MatrixXcd m(1, 1);
  m << v;
  return m;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

const PoleEntry* find_pole(const SingularityReport& r, double loc) {
  for (const auto& e : r.poles)
    if (std::abs(e.location - loc) < 1e-7) return &e;
  return nullptr;
}

const LogEntry* find_log(const SingularityReport& r, double loc) {
  for (const auto& e : r.logs)
    if (std::abs(e.location - loc) < 1e-7) return &e;
  return nullptr;
}

// 1. simple poles at s = -k/2 with residues -+1/(2 pi), k = 1..5, tol 1e-12,
//    runtime < 1 s
void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  SpectralSpec spec{0, {0.5}, 1.0};
  auto rep = zeta_structure(mat1(1.0), mat1(1.0), spec);
  bool ok = true;
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) {
    const auto* e = find_pole(rep, -0.5 * k);
    if (!e || e->order != 1) { ok = false; continue; }
    if (k % 2 == 0) {
      if (!e->integer_flag || e->combined_residue) ok = false;
      continue;
    }
    if (!e->combined_residue) { ok = false; continue; }
    double expect = -0.5 * std::sin(0.5 * nb::pi * k) / nb::pi;
    worst = std::max(worst, std::abs(*e->combined_residue - expect));
  }
  if (worst > 1e-12) ok = false;
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 1.0) ok = false;
  char d[128];
  std::snprintf(d, sizeof d, "max residue err %.2e, %.3f s (tol 1e-12, < 1 s)", worst, secs);
  report(1, "half-integer residues", ok, d);
}

// 2. pole order k+1 with leading (-1)^k tau^k k! nu / 2^k and the parity-rule
//    log leadings for the coupled 3x3 example, k = 1..4, tol 1e-10
void criterion2() {
  double nu = 0.35, tau = bessel::tau_factor(nu);
  SpectralSpec spec{2, {nu}, 1.0};
  MatrixXcd A(3, 3), B = MatrixXcd::Identity(3, 3);
  A << 0, 1, -1, 1, 0, 0, 1, 0, 0;
  auto rep = zeta_structure(A, B, spec);
  bool ok = true;
  double worst = 0.0;
  for (int k = 1; k <= 4; ++k) {
    double xi = nu * k;
    const auto* p = find_pole(rep, -xi);
    if (!p || p->order != k + 1) { ok = false; continue; }
    double f_expect = (k % 2 == 0 ? 1.0 : -1.0) * std::pow(tau, k) * factorial(k) *
                      nu / std::exp2(k);
    worst = std::max(worst, std::abs(p->leading - f_expect) / std::abs(f_expect));
    const auto* l = find_log(rep, -xi);
    int ell_expect = (k % 2 == 1) ? 1 : 2;
    if (!l || l->ell != ell_expect) { ok = false; continue; }
    int m = k / 2;
    double binom = 1.0;
    for (int i = 1; i <= m + 1; ++i) binom = binom * (k - i + 1) / i;
    double g_expect = 2.0 * nu * ((m + 1) % 2 == 0 ? 1.0 : -1.0) * std::pow(tau, k) *
                      binom * (k % 2 == 0 ? 2.0 : 1.0);
    worst = std::max(worst, std::abs(l->leading - g_expect) / std::abs(g_expect));
  }
  if (worst > 1e-10) ok = false;
  char d[96];
  std::snprintf(d, sizeof d, "max rel err %.2e (tol 1e-10)", worst);
  report(2, "arbitrary-order poles", ok, d);
}

// 3. resolvent identity: sine case against coth x, mixed case against the
//    enumerated spectrum with mu_max = 300; runtime < 30 s
void criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst_sine = 0.0;
  {
    ModelProblem pb{SpectralSpec{0, {0.5}, 1.0}, mat1(0.0), mat1(1.0)};
    for (double x : {1.0, 2.0, 5.0, 10.0}) {
      double lhs = resolvent_trace_via_F(pb, x) / (2.0 * x);
      double rhs = 1.0 / (std::tanh(x) * 2.0 * x) - 1.0 / (2.0 * x * x);
      worst_sine = std::max(worst_sine, std::abs(lhs - rhs));
    }
    if (worst_sine > 1e-7) ok = false;
  }
  double worst_mixed = 0.0;
  {
    SpectralSpec spec{1, {0.3}, 1.0};
    MatrixXcd A(2, 2), B = MatrixXcd::Identity(2, 2);
    A << 0, 1, -1, 0;
    ModelProblem pb{spec, A, B};
    auto sp = find_eigenvalues(pb, 300.0);
    for (double x : {5.0, 10.0}) {
      auto ex = resolvent_trace_exact(sp, x);
      double diff = std::abs(resolvent_trace_via_F(pb, x) - 2.0 * x * ex.value);
      double bound = 2.0 * x * ex.tail_bound + 1e-6;
      worst_mixed = std::max(worst_mixed, diff - bound);
      if (diff > bound) ok = false;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 30.0) ok = false;
  char d[128];
  std::snprintf(d, sizeof d, "sine err %.2e (tol 1e-7), mixed margin %.2e, %.1f s",
                worst_sine, worst_mixed, secs);
  report(3, "resolvent identity", ok, d);
}

// 4. closed-form spectra mu_j = j pi and (j - 1/2) pi for j <= 30, tol 1e-10
void criterion4() {
  bool ok = true;
  double worst = 0.0;
  SpectralSpec spec{0, {0.5}, 1.0};
  auto sine = find_eigenvalues({spec, mat1(0.0), mat1(1.0)}, 30.2 * nb::pi);
  auto cosine = find_eigenvalues({spec, mat1(1.0), mat1(0.0)}, 30.0 * nb::pi);
  if (sine.eigs.size() < 30 || cosine.eigs.size() < 30) {
    ok = false;
  } else {
    for (int j = 1; j <= 30; ++j) {
      worst = std::max(worst, std::abs(sine.eigs[j - 1].mu - j * nb::pi));
      worst = std::max(worst, std::abs(cosine.eigs[j - 1].mu - (j - 0.5) * nb::pi));
    }
  }
  if (worst > 1e-10) ok = false;
  char d[96];
  std::snprintf(d, sizeof d, "max |mu - closed form| %.2e (tol 1e-10)", worst);
  report(4, "closed-form spectra", ok, d);
}

// 5. beta_k = sum_l kappa_l^{k-1} over random split angle tuples, k <= 10,
//    tol 1e-12; a theta = pi/2 component contributes nothing
void criterion5() {
  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> uang(0.0, nb::pi);
  std::uniform_int_distribution<int> uq(1, 3);
  bool ok = true;
  double worst = 0.0;
  auto check_tuple = [&](const std::vector<double>& ths) {
    int q0 = static_cast<int>(ths.size());
    MatrixXcd A0 = MatrixXcd::Zero(q0, q0), B0 = MatrixXcd::Zero(q0, q0);
    std::vector<double> kappas;
    for (int l = 0; l < q0; ++l) {
      A0(l, l) = std::cos(ths[l]);
      B0(l, l) = std::sin(ths[l]);
      if (std::abs(ths[l] - 0.5 * nb::pi) > 1e-12)
        kappas.push_back(gamma_tilde - std::tan(ths[l]));
    }
    auto beta = beta_coeffs(poly_p0(A0, B0), 10);
    for (size_t k = 1; k <= beta.size(); ++k) {
      double expect = 0.0;
      for (double kp : kappas) expect += std::pow(kp, static_cast<double>(k - 1));
      double scale = std::max(1.0, std::abs(expect));
      worst = std::max(worst, std::abs(beta[k - 1] - expect) / scale);
    }
  };
  for (int rep_i = 0; rep_i < 20; ++rep_i) {
    int q0 = uq(rng);
    std::vector<double> ths;
    while (static_cast<int>(ths.size()) < q0) {
      double th = uang(rng);
      if (std::abs(th - 0.5 * nb::pi) > 0.2) ths.push_back(th);
    }
    check_tuple(ths);
  }
  check_tuple({0.4, 0.5 * nb::pi, 2.3});  // pi/2 must drop out exactly
  if (worst > 1e-12) ok = false;
  char d[96];
  std::snprintf(d, sizeof d, "max rel err %.2e over 21 tuples (tol 1e-12)", worst);
  report(5, "split-type beta identity", ok, d);
}

// 6. det_p against numeric substitution over 100 random valid boundary
//    conditions with q <= 4, relative tol 1e-10
void criterion6() {
  std::mt19937 rng(6160);
  std::uniform_real_distribution<double> ud(0.2, 2.0);
  bool ok = true;
  double worst = 0.0;
  for (int rep_i = 0; rep_i < 100; ++rep_i) {
    int q0 = rep_i % 3;            // 0..2
    int q1 = 1 + (rep_i / 3) % 3;  // 1..3
    if (q0 + q1 > 4) q1 = 4 - q0;
    SpectralSpec spec{q0, {}, 1.0};
    for (int j = 0; j < q1; ++j) spec.nus.push_back(0.15 + 0.19 * j + 0.01 * (rep_i % 5));
    auto L = random_lagrangian(spec, rng, rep_i % 2 == 0);
    GenSeries p = det_p(L.A, L.B, spec);
    for (int pt = 0; pt < 3; ++pt) {
      double x = ud(rng), y = ud(rng);
      Eigen::VectorXcd diag(spec.q());
      for (int i = 0; i < q0; ++i) diag(i) = x;
      for (int j = 0; j < q1; ++j)
        diag(q0 + j) = bessel::tau_factor(spec.nus[j]) *
                       std::pow(y, 2.0 * spec.nus[j]);
      MatrixXcd M = L.A - L.B * diag.asDiagonal().toDenseMatrix();
      cplx direct = M.determinant();
      cplx series = p.eval(x, y);
      double scale = std::max({std::abs(direct), L.A.norm(), 1e-6});
      worst = std::max(worst, std::abs(direct - series) / scale);
    }
  }
  if (worst > 1e-10) ok = false;
  char d[96];
  std::snprintf(d, sizeof d, "max rel err %.2e over 100 draws (tol 1e-10)", worst);
  report(6, "determinant oracle", ok, d);
}

// 7. log/exp round trip of the three closed-form tails, coefficientwise 1e-12
void criterion7() {
  Truncation tr{6.0, 12};
  auto roundtrip = [&](GenSeries tail) {
    GenSeries back = exp_expand_series(log_expand_series(tail, tr), tr);
    back -= GenSeries::constant(back.nus(), 1.0);
    back -= tail;
    back.truncate(tr.xi_max, tr.ell_max, -tr.ell_max);
    double worst = 0.0;
    for (const auto& [k, c] : back.terms()) worst = std::max(worst, std::abs(c));
    return worst;
  };
  double w1 = roundtrip(GenSeries::monomial({0.5}, 0, {1}, -1.0));
  double w2 = roundtrip(GenSeries::monomial({0.3}, 1, {1}, bessel::tau_factor(0.3)));
  GenSeries t3 = GenSeries::monomial({0.35}, 1, {1}, bessel::tau_factor(0.35));
  t3 += GenSeries::monomial({0.35}, -1, {1}, -bessel::tau_factor(0.35));
  double w3 = roundtrip(t3);
  double worst = std::max({w1, w2, w3});
  char d[96];
  std::snprintf(d, sizeof d, "max coeff err %.2e (tol 1e-12)", worst);
  report(7, "log/exp round trip", worst <= 1e-12, d);
}

// 8. exact log-weight integral identity, diff < 1e-8
void criterion8() {
  const double e1 = std::exp(1.0);
  double worst = 0.0;
  for (auto [c, s, k, t0] : {std::tuple{0.0, 1.0, 1, e1}, {0.0, 1.0, 2, e1},
                             {0.5, 0.7, 1, e1 * e1}})
    worst = std::max(worst, verify_logint(c, s, k, t0).diff);
  char d[96];
  std::snprintf(d, sizeof d, "max diff %.2e (tol 1e-8)", worst);
  report(8, "logint identity", worst < 1e-8, d);
}

// 9. asymptotic residual decreases 100 -> 400 and sits below 10x its fitted
//    next-order prediction at x = 200
void criterion9() {
  bool ok = true;
  std::string det;
  auto check = [&](const ModelProblem& pb, const char* tag) {
    auto rep = zeta_structure(pb.A, pb.B, pb.spec);
    auto rc = asymptotic_residual(pb, rep.ctable, rep.j0, {100.0, 200.0, 400.0});
    double r100 = std::abs(rc.points[0].residual);
    double r200 = std::abs(rc.points[1].residual);
    double r400 = std::abs(rc.points[2].residual);
    if (!(r400 < r200 && r200 < r100)) ok = false;
    // power-law fit through the endpoints predicts the middle point
    double slope = std::log(r400 / r100) / std::log(4.0);
    double predict = r100 * std::pow(2.0, slope);
    if (r200 > 10.0 * predict) ok = false;
    char b[128];
    std::snprintf(b, sizeof b, "%s r=%.1e/%.1e/%.1e ", tag, r100, r200, r400);
    det += b;
  };
  check({SpectralSpec{0, {0.3}, 1.0}, mat1(1.0), mat1(1.0)}, "v=0.3");
  check({SpectralSpec{1, {}, 1.0}, mat1(std::cos(nb::pi / 5)),
         mat1(std::sin(nb::pi / 5))}, "q0-theta");
  report(9, "asymptotic residual", ok, det);
}

// 10. Friedrichs-type configurations yield empty singular ledgers
void criterion10() {
  SpectralSpec s1{0, {0.5}, 1.0};
  auto r1 = zeta_structure(mat1(0.0), mat1(1.0), s1);
  SpectralSpec s2{1, {}, 1.0};
  auto r2 = zeta_structure(mat1(0.0), mat1(1.0), s2);
  bool ok = r1.poles.empty() && r1.logs.empty() && r1.log_at_zero_coeff == 0 &&
            r2.poles.empty() && r2.logs.empty() && r2.log_at_zero_coeff == 0;
  report(10, "Friedrichs emptiness", ok, "both ledgers empty");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
