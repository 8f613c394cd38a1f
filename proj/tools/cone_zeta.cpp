// cone_zeta: batch front end for the cone zeta-function singularity pipeline.
// Subcommands: validate | structure | eigs | verify | examples.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "conezeta/model.hpp"
#include "conezeta/singularity.hpp"

using json = nlohmann::json;
using namespace conezeta;

namespace {

struct Options {
  double ximax = 6.0;
  int lmax = 12;
  double mumax = 100.0;
  int K = 10;
};

struct ProblemConfig {
  SpectralSpec spec;
  MatrixXcd A, B;
  Options opts;
};

// ------------------------------------------------------------ config I/O
cplx parse_complex(const json& j, const std::string& path) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cplx(j[0].get<double>(), j[1].get<double>());
  throw std::runtime_error(path + ": expected number or [re, im] pair");
}

MatrixXcd parse_matrix(const json& j, const std::string& path, int q) {
  if (!j.is_array() || static_cast<int>(j.size()) != q)
    throw std::runtime_error(path + ": expected " + std::to_string(q) + " rows");
  MatrixXcd M(q, q);
  for (int i = 0; i < q; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != q)
      throw std::runtime_error(path + "[" + std::to_string(i) + "]: expected " +
                               std::to_string(q) + " entries");
    for (int k = 0; k < q; ++k)
      M(i, k) = parse_complex(row[k], path + "[" + std::to_string(i) + "][" +
                                          std::to_string(k) + "]");
  }
  return M;
}

ProblemConfig parse_config(const json& j) {
  ProblemConfig cfg;
  try {
    cfg.spec.q0 = j.at("q0").get<int>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("q0: ") + e.what());
  }
  try {
    cfg.spec.nus = j.at("nus").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("nus: ") + e.what());
  }
  try {
    cfg.spec.R = j.value("R", 1.0);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("R: ") + e.what());
  }
  cfg.spec.check();
  int q = cfg.spec.q();
  if (!j.contains("A")) throw std::runtime_error("A: missing");
  if (!j.contains("B")) throw std::runtime_error("B: missing");
  cfg.A = parse_matrix(j.at("A"), "A", q);
  cfg.B = parse_matrix(j.at("B"), "B", q);
  if (j.contains("options")) {
    const auto& o = j.at("options");
    cfg.opts.ximax = o.value("ximax", 6.0);
    cfg.opts.lmax = o.value("lmax", 12);
    cfg.opts.mumax = o.value("mumax", 100.0);
    cfg.opts.K = o.value("K", 10);
  }
  return cfg;
}

json matrix_to_json(const MatrixXcd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < M.cols(); ++k)
      row.push_back({M(i, k).real(), M(i, k).imag()});
    rows.push_back(row);
  }
  return rows;
}

json serialize_config(const ProblemConfig& cfg) {
  json j;
  j["q0"] = cfg.spec.q0;
  j["nus"] = cfg.spec.nus;
  j["R"] = cfg.spec.R;
  j["A"] = matrix_to_json(cfg.A);
  j["B"] = matrix_to_json(cfg.B);
  j["options"] = {{"ximax", cfg.opts.ximax},
                  {"lmax", cfg.opts.lmax},
                  {"mumax", cfg.opts.mumax},
                  {"K", cfg.opts.K}};
  return j;
}

// ------------------------------------------------------------ built-ins
MatrixXcd mat(std::initializer_list<std::initializer_list<double>> rows) {
  int n = static_cast<int>(rows.size());
  MatrixXcd M(n, static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (const auto& r : rows) {
    int k = 0;
    for (double v : r) M(i, k++) = v;
    ++i;
  }
  return M;
}

ProblemConfig builtin_config(const std::string& name) {
  ProblemConfig c;
  c.spec.R = 1.0;
  if (name == "fmp") {
    c.spec.q0 = 0; c.spec.nus = {0.5};
    c.A = mat({{1}}); c.B = mat({{1}});
  } else if (name == "fmp-friedrichs") {
    c.spec.q0 = 0; c.spec.nus = {0.5};
    c.A = mat({{0}}); c.B = mat({{1}});
  } else if (name == "lap-r2") {
    c.spec.q0 = 1; c.spec.nus = {};
    c.A = mat({{1}}); c.B = mat({{0}});
  } else if (name == "countk") {
    c.spec.q0 = 1; c.spec.nus = {0.3};
    c.A = mat({{0, 1}, {-1, 0}});
    c.B = mat({{1, 0}, {0, 1}});
  } else if (name == "arb-order") {
    c.spec.q0 = 1; c.spec.nus = {0.4};
    c.A = mat({{-1, 1}, {0, 0}});
    c.B = mat({{0, 0}, {1, -1}});
  } else if (name == "count3k") {
    c.spec.q0 = 2; c.spec.nus = {0.35};
    c.A = mat({{0, 1, -1}, {1, 0, 0}, {1, 0, 0}});
    c.B = mat({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  } else if (name == "split-theta") {
    double th = std::numbers::pi / 4.0;
    c.spec.q0 = 1; c.spec.nus = {};
    c.A = mat({{std::cos(th)}});
    c.B = mat({{std::sin(th)}});
  } else if (name == "split-theta-pi2") {
    c.spec.q0 = 1; c.spec.nus = {};
    c.A = mat({{0}});
    c.B = mat({{1}});
  } else {
    throw std::runtime_error("unknown example '" + name +
                             "' (try: fmp fmp-friedrichs lap-r2 countk arb-order "
                             "count3k split-theta split-theta-pi2)");
  }
  return c;
}

// ------------------------------------------------------------ output
struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw std::runtime_error("cannot open output file " + path);
      os = &file;
    }
  }
  std::ostream& out() { return *os; }
};

std::string fmt_c(cplx z) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.15g%+.15gi", z.real(), z.imag());
  return buf;
}

void emit_structure_csv(std::ostream& os, const SingularityReport& rep) {
  os << "location,kind,order_or_ell,leading_re,leading_im,residue_re,residue_im,flags\n";
  char buf[320];
  if (rep.log_at_zero_coeff != 0) {
    std::snprintf(buf, sizeof buf, "%.17e,log0,0,%.17e,%.17e,,,\n", 0.0,
                  static_cast<double>(rep.log_at_zero_coeff), 0.0);
    os << buf;
  }
  for (const auto& p : rep.poles) {
    std::string flags = p.integer_flag ? "integer_xi" : "";
    if (p.combined_residue) {
      std::snprintf(buf, sizeof buf, "%.17e,pole,%d,%.17e,%.17e,%.17e,%.17e,%s\n",
                    p.location, p.order, p.leading.real(), p.leading.imag(),
                    p.combined_residue->real(), p.combined_residue->imag(), flags.c_str());
    } else {
      std::snprintf(buf, sizeof buf, "%.17e,pole,%d,%.17e,%.17e,,,%s\n", p.location,
                    p.order, p.leading.real(), p.leading.imag(), flags.c_str());
    }
    os << buf;
  }
  for (const auto& l : rep.logs) {
    std::snprintf(buf, sizeof buf, "%.17e,log,%d,%.17e,%.17e,,,%s\n", l.location, l.ell,
                  l.leading.real(), l.leading.imag(), l.unreliable ? "unreliable_ell" : "");
    os << buf;
  }
}

json report_to_json(const SingularityReport& rep) {
  json j;
  j["log_at_zero_coeff"] = rep.log_at_zero_coeff;
  j["truncation"] = {{"ximax", rep.trunc.xi_max}, {"lmax", rep.trunc.ell_max}};
  j["poles"] = json::array();
  for (const auto& p : rep.poles) {
    json e = {{"location", p.location},
              {"order", p.order},
              {"leading", {p.leading.real(), p.leading.imag()}},
              {"integer_flag", p.integer_flag}};
    if (p.combined_residue)
      e["combined_residue"] = {p.combined_residue->real(), p.combined_residue->imag()};
    j["poles"].push_back(e);
  }
  j["logs"] = json::array();
  for (const auto& l : rep.logs)
    j["logs"].push_back({{"location", l.location},
                         {"ell", l.ell},
                         {"leading", {l.leading.real(), l.leading.imag()}},
                         {"unreliable", l.unreliable}});
  if (rep.decomposable_view) {
    json dv;
    dv["beta"] = json::array();
    for (auto b : rep.decomposable_view->beta) dv["beta"].push_back({b.real(), b.imag()});
    dv["c_xi"] = json::array();
    for (const auto& [xi, c] : rep.decomposable_view->c_xi)
      dv["c_xi"].push_back({{"xi", xi}, {"c", {c.real(), c.imag()}}});
    j["decomposable_view"] = dv;
  }
  if (rep.split_view) j["split_view"] = {{"kappas", rep.split_view->kappas}};
  return j;
}

void emit_structure_text(std::ostream& os, const SingularityReport& rep) {
  os << "singularity structure (ximax=" << rep.trunc.xi_max
     << ", lmax=" << rep.trunc.ell_max << ")\n";
  if (rep.log_at_zero_coeff != 0)
    os << "  log s term at s=0 with coefficient (j0-q0) = " << rep.log_at_zero_coeff
       << "  [times e^{-2s(log2-gamma)} sin(pi s)/pi]\n";
  if (rep.poles.empty() && rep.logs.empty() && rep.log_at_zero_coeff == 0)
    os << "  empty singular ledger (only the regular part)\n";
  for (const auto& p : rep.poles) {
    os << "  pole  s=" << p.location << "  order " << p.order << "  f(-xi) = "
       << fmt_c(p.leading);
    if (p.combined_residue) os << "  residue = " << fmt_c(*p.combined_residue);
    if (p.integer_flag) os << "  [integer xi: sine factor vanishes]";
    os << "\n";
  }
  for (const auto& l : rep.logs) {
    os << "  log   s=" << l.location << "  ell " << l.ell
       << "  g-leading = " << fmt_c(l.leading);
    if (l.unreliable) os << "  [ell beyond truncation]";
    os << "\n";
  }
}

// ------------------------------------------------------------ commands
int cmd_validate(const ProblemConfig& cfg, Sink& sink) {
  auto v = validate_lagrangian(cfg.A, cfg.B, cfg.spec);
  auto& os = sink.out();
  switch (v.verdict) {
    case LagrangianVerdict::ok:
      os << "ok: rank(A B) = q and A'B* is Hermitian";
      if (v.conditioning_warning) os << "  [warning: near-tolerance rank]";
      os << "\n";
      break;
    case LagrangianVerdict::rank_deficient:
      os << "invalid: rank(A B) < q\n";
      return 1;
    case LagrangianVerdict::not_self_adjoint:
      os << "invalid: A'B* is not Hermitian (defect " << v.hermiticity_defect << ")\n";
      return 1;
  }
  auto dec = decompose(cfg.A, cfg.B, cfg.spec);
  os << (dec.decomposable ? "decomposable" : "not decomposable") << "\n";
  if (dec.decomposable && dec.split_angles && cfg.spec.q0 > 0) {
    os << "split type, angles:";
    for (double th : *dec.split_angles) os << " " << th;
    os << "\n";
  }
  return 0;
}

int cmd_structure(const ProblemConfig& cfg, Sink& sink, const std::string& format) {
  auto rep = zeta_structure(cfg.A, cfg.B, cfg.spec, cfg.opts.ximax, cfg.opts.lmax,
                            cfg.opts.K);
  if (format == "csv")
    emit_structure_csv(sink.out(), rep);
  else if (format == "json")
    sink.out() << report_to_json(rep).dump(2) << "\n";
  else
    emit_structure_text(sink.out(), rep);
  return 0;
}

int cmd_eigs(const ProblemConfig& cfg, Sink& sink, const std::string& format) {
  ModelProblem pb{cfg.spec, cfg.A, cfg.B};
  auto sp = find_eigenvalues(pb, cfg.opts.mumax);
  auto& os = sink.out();
  if (format == "json") {
    json j;
    j["mu_max"] = sp.mu_max;
    j["density_slope"] = sp.density_slope;
    j["count_warning"] = sp.count_warning;
    j["eigenvalues"] = json::array();
    for (const auto& e : sp.eigs)
      j["eigenvalues"].push_back(
          {{"mu", e.mu}, {"mu_squared", e.lambda}, {"multiplicity", e.multiplicity}});
    os << j.dump(2) << "\n";
    return 0;
  }
  os << "mu,mu_squared,multiplicity\n";
  char buf[120];
  for (const auto& e : sp.eigs) {
    std::snprintf(buf, sizeof buf, "%.17e,%.17e,%d\n", e.negative ? -e.mu : e.mu,
                  e.lambda, e.multiplicity);
    os << buf;
  }
  if (sp.count_warning)
    std::cerr << "warning: eigenvalue count deviates from the density slope; "
                 "possible missed roots\n";
  return 0;
}

int cmd_verify(const ProblemConfig& cfg, Sink& sink, double corrupt_tau) {
  auto& os = sink.out();
  bool all_ok = true;
  auto row = [&](const std::string& name, bool ok, const std::string& detail) {
    os << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) os << "  (" << detail << ")";
    os << "\n";
    if (!ok) all_ok = false;
  };

  ModelProblem pb{cfg.spec, cfg.A, cfg.B};

  // 1. resolvent identity at moderate x
  if (pb.real_coefficients()) {
    try {
      auto sp = find_eigenvalues(pb, cfg.opts.mumax);
      bool ok = true;
      std::ostringstream det;
      for (double x : {1.0, 2.0, 5.0, 10.0}) {
        auto ex = resolvent_trace_exact(sp, x);
        double via = resolvent_trace_via_F(pb, x);
        double diff = std::abs(via - 2.0 * x * ex.value);
        double tol = 2.0 * x * ex.tail_bound + 1e-6;
        if (diff > tol) ok = false;
        det << "x=" << x << " diff=" << diff << " ";
      }
      row("resolvent identity", ok, det.str());
    } catch (const std::exception& e) {
      row("resolvent identity", false, e.what());
    }
  } else {
    row("resolvent identity", true, "skipped: complex coefficients");
  }

  // 2. asymptotic residual: decrease + sensitivity against a reference
  //    boundary condition with empty expansion (regular 1/x series cancels
  //    in the difference, so any coefficient corruption is visible)
  try {
    GenSeries p = det_p(cfg.A, cfg.B, cfg.spec, corrupt_tau);
    auto norm = normalize_leading(p);
    Truncation tr{cfg.opts.ximax, cfg.opts.lmax};
    CTable ct;
    ct.trunc = tr;
    if (!norm.tail.empty()) ct = log_expand(norm.tail, tr);
    auto res = asymptotic_residual(pb, ct, norm.j0, {100.0, 200.0, 400.0});
    double rmax = 0.0;
    for (const auto& p_ : res.points) rmax = std::max(rmax, std::abs(p_.residual));
    bool ok = res.decreasing || rmax < 1e-10;  // noise floor of the differentiation
    std::ostringstream det;
    det << "r(100)=" << res.points[0].residual << " r(400)=" << res.points[2].residual;

    ModelProblem ref = pb;
    ref.A = MatrixXcd::Identity(cfg.spec.q(), cfg.spec.q());
    ref.B = MatrixXcd::Zero(cfg.spec.q(), cfg.spec.q());
    CTable empty_ct;
    empty_ct.trunc = tr;
    for (double x : {100.0, 400.0}) {
      double dref = dlogF_dx(ref, x) -
                    asymptotic_subtraction(empty_ct, 0, cfg.spec.q0,
                                           cfg.spec.q() * cfg.spec.R, x);
      double dl = dlogF_dx(pb, x) -
                  asymptotic_subtraction(ct, norm.j0, cfg.spec.q0,
                                         cfg.spec.q() * cfg.spec.R, x);
      double d = std::abs(dl - dref);
      det << " Ldiff(" << x << ")=" << d;
      if (d > 1e-7) ok = false;
    }
    row("asymptotic residual", ok, det.str());
  } catch (const std::exception& e) {
    row("asymptotic residual", false, e.what());
  }

  // 3. exact log-weight Mellin integral identity
  {
    bool ok = true;
    std::ostringstream det;
    const double e1 = std::exp(1.0);
    for (auto [c, s, k, t0] : {std::tuple{0.0, 1.0, 1, e1}, {0.0, 1.0, 2, e1},
                               {0.5, 0.7, 1, e1 * e1}}) {
      auto r = verify_logint(c, s, k, t0);
      det << "k=" << k << " diff=" << r.diff << " ";
      if (r.diff > 1e-8) ok = false;
    }
    row("logint identity", ok, det.str());
  }

  // 4. round trips: log/exp of the normalized tail, config serialization
  {
    bool ok = true;
    std::string detail;
    try {
      GenSeries p = det_p(cfg.A, cfg.B, cfg.spec);
      auto norm = normalize_leading(p);
      if (!norm.tail.empty()) {
        Truncation tr{cfg.opts.ximax, cfg.opts.lmax};
        GenSeries lg = log_expand_series(norm.tail, tr);
        GenSeries back = exp_expand_series(lg, tr);
        back -= GenSeries::constant(back.nus(), 1.0);
        back -= norm.tail;
        back.truncate(tr.xi_max, tr.ell_max, -tr.ell_max);
        double worst = 0.0;
        for (const auto& [k, c] : back.terms()) worst = std::max(worst, std::abs(c));
        if (worst > 1e-12) ok = false;
        detail = "max coeff error " + std::to_string(worst);
      }
      json j = serialize_config(cfg);
      ProblemConfig c2 = parse_config(j);
      if (serialize_config(c2) != j) ok = false;
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    row("round trips", ok, detail);
  }

  return all_ok ? 0 : 1;
}

int cmd_examples(const std::string& name, Sink& sink, const Options& opts) {
  auto& os = sink.out();
  ProblemConfig cfg = builtin_config(name);
  cfg.opts = opts;
  auto rep = zeta_structure(cfg.A, cfg.B, cfg.spec, opts.ximax, opts.lmax, opts.K);

  os << "example '" << name << "': q0=" << cfg.spec.q0 << " nus=[";
  for (double nu : cfg.spec.nus) os << nu << " ";
  os << "] R=" << cfg.spec.R << "\n\ncomputed:\n";
  emit_structure_text(os, rep);
  os << "\nexpected (closed formulas):\n";

  if (name == "fmp") {
    double nu = cfg.spec.nus[0], tau = bessel::tau_factor(nu);
    for (int k = 1; k * nu <= opts.ximax + 1e-9; ++k) {
      double xi = nu * k;
      double lead = nu * std::pow(tau, k);  // f(-xi) = -c_xi * xi, c_xi = -(1/k) tau^k
      os << "  pole  s=" << -xi << "  order 1  f(-xi) = " << lead;
      if (std::abs(xi - std::round(xi)) > 1e-9)
        os << "  residue = " << std::sin(-std::numbers::pi * xi) / std::numbers::pi * lead;
      else
        os << "  [integer xi]";
      os << "\n";
    }
  } else if (name == "fmp-friedrichs" || name == "split-theta-pi2") {
    os << "  empty singular ledger (Friedrichs-type)\n";
  } else if (name == "lap-r2") {
    os << "  single log s term with coefficient j0-q0 = -1, kappa = " << gamma_tilde
       << "\n";
  } else if (name == "split-theta") {
    os << "  single log s term with coefficient -1, kappa = gamma_tilde - tan(pi/4) = "
       << gamma_tilde - 1.0 << "\n";
  } else if (name == "countk") {
    double nu = cfg.spec.nus[0], tau = bessel::tau_factor(nu);
    // c_{k, nu k} = (-1)^{k-1} tau^k / k, ell_{nu k} = k, no poles
    for (int k = 1; k * nu <= opts.ximax + 1e-9 && k <= opts.lmax; ++k) {
      double xi = nu * k;
      double c = ((k % 2 == 1) ? 1.0 : -1.0) * std::pow(tau, k) / k;
      double fact = 1.0;
      for (int i = 2; i <= k - 1; ++i) fact *= i;
      double lead = -c * xi * std::exp2(k) / fact;
      os << "  log   s=" << -xi << "  ell " << k << "  g-leading = " << lead << "\n";
    }
  } else if (name == "arb-order") {
    double nu = cfg.spec.nus[0], tau = bessel::tau_factor(nu);
    // c_{-k, nu k} = -tau^k / k -> pole order k+1
    for (int k = 1; k * nu <= opts.ximax + 1e-9 && k <= opts.lmax; ++k) {
      double xi = nu * k;
      double c = -std::pow(tau, k) / k;
      double fact = 1.0;
      for (int i = 2; i <= k; ++i) fact *= i;
      double lead = ((k + 1) % 2 == 0 ? 1.0 : -1.0) * c * xi * fact / std::exp2(k);
      os << "  pole  s=" << -xi << "  order " << k + 1 << "  f(-xi) = " << lead << "\n";
    }
  } else if (name == "count3k") {
    double nu = cfg.spec.nus[0], tau = bessel::tau_factor(nu);
    // p_{nu k} = -k, f_k(-nu k) = (-1)^k tau^k k! nu / 2^k;
    // ell_{nu k} = 1 (k odd) / 2 (k even), g-leading with C(k, m+1), m = floor(k/2)
    for (int k = 1; k * nu <= opts.ximax + 1e-9 && k <= opts.lmax; ++k) {
      double xi = nu * k;
      double fact = 1.0;
      for (int i = 2; i <= k; ++i) fact *= i;
      double flead = ((k % 2 == 0) ? 1.0 : -1.0) * std::pow(tau, k) * fact * nu /
                     std::exp2(k);
      os << "  pole  s=" << -xi << "  order " << k + 1 << "  f(-xi) = " << flead
         << "   [p_xi = " << -k << "]\n";
      int m = k / 2;
      double binom = 1.0;
      for (int i = 1; i <= m + 1; ++i) binom = binom * (k - i + 1) / i;
      double sgn = ((m + 1) % 2 == 0) ? 1.0 : -1.0;  // (-1)^{m+1}
      // g-leading: 2 nu (-1)^{m+1} tau^k C(k, m+1), doubled for k even
      double glead = 2.0 * nu * sgn * std::pow(tau, k) * binom * ((k % 2 == 0) ? 2.0 : 1.0);
      os << "  log   s=" << -xi << "  ell " << (k % 2 == 1 ? 1 : 2)
         << "  g-leading ~ " << glead << "   [parity rule]\n";
    }
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"cone zeta-function singularity structure and model-problem validation"};
  app.require_subcommand(1);

  std::string config_path, example_name, out_path, format = "text";
  double ximax = 6.0, mumax = -1.0;
  int lmax = 12;
  double corrupt_tau = 1.0;

  auto add_common = [&](CLI::App* sub, bool need_input) {
    sub->add_option("--config", config_path, "problem config JSON");
    if (need_input) sub->add_option("--example", example_name, "built-in example name");
    sub->add_option("--ximax", ximax, "xi truncation (default 6)");
    sub->add_option("--lmax", lmax, "ell truncation (default 12)");
    sub->add_option("--mumax", mumax, "eigenvalue scan bound");
    sub->add_option("--out", out_path, "output file (default stdout)");
    sub->add_option("--format", format, "text|csv|json")
        ->check(CLI::IsMember({"text", "csv", "json"}));
  };

  auto* validate = app.add_subcommand("validate", "check the boundary condition");
  add_common(validate, true);
  auto* structure = app.add_subcommand("structure", "singularity ledger");
  add_common(structure, true);
  auto* eigs = app.add_subcommand("eigs", "model-problem spectrum");
  add_common(eigs, true);
  auto* verify = app.add_subcommand("verify", "built-in identity checks");
  add_common(verify, true);
  verify->add_option("--corrupt-tau", corrupt_tau,
                     "scale tau in the expansion (sensitivity testing)");
  auto* examples = app.add_subcommand("examples", "run a named built-in example");
  std::string exname;
  examples->add_option("name", exname, "example name")->required();
  add_common(examples, false);

  CLI11_PARSE(app, argc, argv);

  try {
    ProblemConfig cfg;
    bool have_cfg = false;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot open config " << config_path << "\n";
        return 2;
      }
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return 2;
      }
      try {
        cfg = parse_config(j);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
      have_cfg = true;
    } else if (!example_name.empty()) {
      try {
        cfg = builtin_config(example_name);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      have_cfg = true;
    }
    if (ximax != 6.0) cfg.opts.ximax = ximax;
    if (lmax != 12) cfg.opts.lmax = lmax;
    if (mumax > 0.0) cfg.opts.mumax = mumax;

    Sink sink(out_path);

    if (examples->parsed()) {
      Options o = cfg.opts;
      if (ximax != 6.0) o.ximax = ximax;
      if (lmax != 12) o.lmax = lmax;
      if (mumax > 0.0) o.mumax = mumax;
      try {
        builtin_config(exname);  // unknown name is an input error
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      return cmd_examples(exname, sink, o);
    }
    if (!have_cfg) {
      std::cerr << "error: --config or --example is required\n";
      return 2;
    }
    if (validate->parsed()) return cmd_validate(cfg, sink);
    if (structure->parsed()) return cmd_structure(cfg, sink, format);
    if (eigs->parsed()) return cmd_eigs(cfg, sink, format);
    if (verify->parsed()) return cmd_verify(cfg, sink, corrupt_tau);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
