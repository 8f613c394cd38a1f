#pragma once
// Spectral data of the model cross-section and the (A,B) boundary-condition
// matrices: validation against the self-adjointness criterion, block
// decomposition, and extraction of split angles for the q0 block.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "conezeta/constants.hpp"

namespace conezeta {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline constexpr double rank_rel_tol = 1e-10;

struct SpectralSpec {
  int q0 = 0;                 // multiplicity of the -1/4 cross-section eigenvalue
  std::vector<double> nus;    // nu_j in (0,1), eigenvalues in (-1/4, 3/4)
  double R = 1.0;

  int q1() const { return static_cast<int>(nus.size()); }
  int q() const { return q0 + q1(); }

  void check() const {
    if (q0 < 0) throw std::invalid_argument("spec: q0 must be >= 0");
    if (R <= 0.0) throw std::invalid_argument("spec: R must be > 0");
    for (double nu : nus)
      if (!(nu > 0.0 && nu < 1.0))
        throw std::invalid_argument("spec: each nu must lie in (0,1)");
    if (q() == 0) throw std::invalid_argument("spec: q must be positive");
  }
};

struct Lagrangian {
  MatrixXcd A, B;
};

enum class LagrangianVerdict { ok, rank_deficient, not_self_adjoint };

struct ValidationResult {
  LagrangianVerdict verdict = LagrangianVerdict::ok;
  bool conditioning_warning = false;
  double min_singular_value = 0.0;
  double hermiticity_defect = 0.0;
};

// A' = A with the first q0 columns negated (sign convention of the q0-block
// symplectic form).
inline MatrixXcd a_prime(const MatrixXcd& A, const SpectralSpec& spec) {
  MatrixXcd Ap = A;
  for (int j = 0; j < spec.q0; ++j) Ap.col(j) = -A.col(j);
  return Ap;
}

inline int numerical_rank(const MatrixXcd& M, double* min_sv = nullptr,
                          bool* near_tol = nullptr) {
  Eigen::JacobiSVD<MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  double tol = rank_rel_tol * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++r;
  if (min_sv) *min_sv = sv(sv.size() - 1);
  if (near_tol) {
    *near_tol = false;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > tol && sv(i) < 1e3 * tol) *near_tol = true;
  }
  return r;
}

inline ValidationResult validate_lagrangian(const MatrixXcd& A, const MatrixXcd& B,
                                            const SpectralSpec& spec) {
  spec.check();
  const int q = spec.q();
  if (A.rows() != q || A.cols() != q || B.rows() != q || B.cols() != q)
    throw std::invalid_argument("lagrangian: A, B must be q x q");
  ValidationResult res;
  MatrixXcd AB(q, 2 * q);
  AB << A, B;
  bool near = false;
  int r = numerical_rank(AB, &res.min_singular_value, &near);
  res.conditioning_warning = near;
  if (r < q) {
    res.verdict = LagrangianVerdict::rank_deficient;
    return res;
  }
  MatrixXcd H = a_prime(A, spec) * B.adjoint();
  double defect = (H - H.adjoint()).norm();
  double scale = std::max(A.norm() * B.norm(), 1e-300);
  res.hermiticity_defect = defect / scale;
  if (res.hermiticity_defect > 1e-10) {
    res.verdict = LagrangianVerdict::not_self_adjoint;
    return res;
  }
  res.verdict = LagrangianVerdict::ok;
  return res;
}

// Orthonormal basis of the null space of M (columns).
inline MatrixXcd null_space(const MatrixXcd& M) {
  Eigen::JacobiSVD<MatrixXcd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double tol = sv.size() ? rank_rel_tol * sv(0) : 0.0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++r;
  return svd.matrixV().rightCols(M.cols() - r);
}

struct DecompositionResult {
  bool decomposable = false;
  // Present only when decomposable.  A0,B0 are q0 x q0 acting on the q0
  // coordinates; A1,B1 are q1 x q1 on the rest.
  MatrixXcd A0, B0, A1, B1;
  std::optional<std::vector<double>> split_angles;  // q0 block of split type
};

namespace detail {

// Columns of the 2q-dimensional boundary space belonging to coordinate set
// idx (0-based within 1..q), duplicated into the A-part and B-part slots.
inline MatrixXcd restrict_columns(const MatrixXcd& AB, const std::vector<int>& idx, int q) {
  MatrixXcd sub(AB.rows(), 2 * static_cast<int>(idx.size()));
  for (size_t c = 0; c < idx.size(); ++c) {
    sub.col(static_cast<int>(c)) = AB.col(idx[c]);
    sub.col(static_cast<int>(c + idx.size())) = AB.col(q + idx[c]);
  }
  return sub;
}

// Rows spanning the orthogonal complement of col(Z) in C^n, as an m x n matrix
// (m = n - cols(Z)).  Any such matrix has null space exactly col(Z).
inline MatrixXcd orth_complement_rows(const MatrixXcd& Z) {
  const int n = static_cast<int>(Z.rows());
  Eigen::JacobiSVD<MatrixXcd> svd(Z, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  double tol = sv.size() ? rank_rel_tol * sv(0) : 0.0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++r;
  return svd.matrixU().rightCols(n - r).adjoint();
}

} // namespace detail

inline DecompositionResult decompose(const MatrixXcd& A, const MatrixXcd& B,
                                     const SpectralSpec& spec);

// Split angles for a pure q0-block boundary condition (A0, B0): returns
// theta_l in [0, pi) per coordinate when the null space of (A0 B0) splits
// into coordinate planes, nullopt otherwise.
inline std::optional<std::vector<double>> split_angles(const MatrixXcd& A0,
                                                       const MatrixXcd& B0) {
  const int q0 = static_cast<int>(A0.rows());
  if (q0 == 0) return std::vector<double>{};
  MatrixXcd AB(q0, 2 * q0);
  AB << A0, B0;
  std::vector<double> angles;
  int total = 0;
  for (int l = 0; l < q0; ++l) {
    MatrixXcd pair(q0, 2);
    pair.col(0) = AB.col(l);
    pair.col(1) = AB.col(q0 + l);
    MatrixXcd N = null_space(pair);
    total += static_cast<int>(N.cols());
    if (N.cols() != 1) continue;
    // null vector (u, v): boundary condition a f0 + b f1 = 0 with (a,b)=(v,-u)
    cplx a = N(1, 0), b = -N(0, 0);
    if (std::abs(b) < 1e-12 * std::abs(a)) {
      angles.push_back(0.0);
      continue;
    }
    // (a,b) is proportional to a real direction (cos th, sin th); rotate by
    // the phase of b, then read the angle and fold into [0, pi).
    cplx phase = b / std::abs(b);
    double ar = std::real(a / phase);
    double br = std::abs(b);
    double th = std::atan2(br, ar);
    if (th < 0.0) th += std::numbers::pi;
    if (th >= std::numbers::pi) th -= std::numbers::pi;
    angles.push_back(th);
  }
  if (total != q0 || static_cast<int>(angles.size()) != q0) return std::nullopt;
  return angles;
}

inline DecompositionResult decompose(const MatrixXcd& A, const MatrixXcd& B,
                                     const SpectralSpec& spec) {
  auto v = validate_lagrangian(A, B, spec);
  if (v.verdict != LagrangianVerdict::ok)
    throw std::invalid_argument("decompose: (A,B) is not a valid boundary condition");
  const int q = spec.q(), q0 = spec.q0, q1 = spec.q1();
  DecompositionResult out;
  MatrixXcd AB(q, 2 * q);
  AB << A, B;

  if (q0 == 0 || q1 == 0) {
    out.decomposable = true;
    if (q0 == 0) {
      out.A1 = A; out.B1 = B;
      out.A0.resize(0, 0); out.B0.resize(0, 0);
      out.split_angles = std::vector<double>{};
    } else {
      out.A0 = A; out.B0 = B;
      out.A1.resize(0, 0); out.B1.resize(0, 0);
      out.split_angles = split_angles(out.A0, out.B0);
    }
    return out;
  }

  std::vector<int> i0(q0), i1(q1);
  for (int j = 0; j < q0; ++j) i0[j] = j;
  for (int j = 0; j < q1; ++j) i1[j] = q0 + j;

  MatrixXcd sub0 = detail::restrict_columns(AB, i0, q);
  MatrixXcd sub1 = detail::restrict_columns(AB, i1, q);
  MatrixXcd Z0 = null_space(sub0);  // N cap V0, in 2q0 coordinates
  MatrixXcd Z1 = null_space(sub1);
  int d0 = static_cast<int>(Z0.cols());
  int d1 = static_cast<int>(Z1.cols());
  if (d0 + d1 != q) return out;  // not decomposable
  out.decomposable = true;

  MatrixXcd AB0 = detail::orth_complement_rows(Z0);  // q0 x 2q0
  MatrixXcd AB1 = detail::orth_complement_rows(Z1);  // q1 x 2q1
  out.A0 = AB0.leftCols(q0);
  out.B0 = AB0.rightCols(q0);
  out.A1 = AB1.leftCols(q1);
  out.B1 = AB1.rightCols(q1);
  out.split_angles = split_angles(out.A0, out.B0);
  return out;
}

// Random valid boundary condition: A' = M (invertible), B = S (A')^{-*} with
// S Hermitian; then any such pair passes validate_lagrangian.
template <class Rng>
Lagrangian random_lagrangian(const SpectralSpec& spec, Rng& rng, bool complex_entries = true) {
  const int q = spec.q();
  auto rnd = [&](void) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    return complex_entries ? cplx(d(rng), d(rng)) : cplx(d(rng), 0.0);
  };
  MatrixXcd M(q, q), S(q, q);
  for (;;) {
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) M(i, j) = rnd();
    if (std::abs(M.determinant()) > 1e-3) break;
  }
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) S(i, j) = rnd();
  S = ((S + S.adjoint()) * 0.5).eval();
  Lagrangian L;
  L.B = S * M.adjoint().inverse();
  L.A = M;
  for (int j = 0; j < spec.q0; ++j) L.A.col(j) = -M.col(j);  // undo the A' sign
  return L;
}

} // namespace conezeta
