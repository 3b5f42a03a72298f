#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"

namespace maslov {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// J = [[0, -Id], [Id, 0]]
inline Mat standard_J(int dim) {
  int m = dim / 2;
  Mat J = Mat::Zero(dim, dim);
  J.block(0, m, m, m) = -Mat::Identity(m, m);
  J.block(m, 0, m, m) = Mat::Identity(m, m);
  return J;
}

inline double symplectic_defect(const Mat& M) {
  Mat J = standard_J(static_cast<int>(M.rows()));
  double scale = std::max(1.0, M.squaredNorm());
  return (M.transpose() * J * M - J).norm() / scale;
}

inline bool is_symplectic(const Mat& M, double tol = 1e-9) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0) return false;
  if (M.rows() == 0) return true;
  return symplectic_defect(M) <= tol;
}

inline Mat symplectic_inverse(const Mat& M) {
  Mat J = standard_J(static_cast<int>(M.rows()));
  return -J * M.transpose() * J;
}

inline Mat rotation2(double theta) {
  Mat R(2, 2);
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return R;
}

// Rank by singular values above rel * max(1, largest singular value).
template <class M>
int numerical_rank(const M& A, double rel) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<typename M::PlainObject> svd(A);
  const auto& s = svd.singularValues();
  double thr = rel * std::max(1.0, s(0));
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return r;
}

struct SchurForm {
  CMat T;
  CMat Q;  // M = Q T Q^H
};

inline SchurForm complex_schur(const Mat& M) {
  Eigen::ComplexSchur<CMat> cs(M.cast<cplx>());
  return {cs.matrixT(), cs.matrixU()};
}

// Swap diagonal entries k and k+1 of the upper triangular T by a Givens rotation.
inline void schur_swap(SchurForm& s, Eigen::Index k) {
  CMat& T = s.T;
  const Eigen::Index n = T.rows();
  cplx t11 = T(k, k), t22 = T(k + 1, k + 1);
  cplx f = T(k, k + 1), g = t22 - t11;
  double cs;
  cplx sn;
  if (std::abs(g) == 0.0) {
    cs = 1.0;
    sn = 0.0;
  } else if (std::abs(f) == 0.0) {
    cs = 0.0;
    sn = std::conj(g) / std::abs(g);
  } else {
    double fn = std::abs(f), gn = std::abs(g), nr = std::hypot(fn, gn);
    cs = fn / nr;
    sn = (f / fn) * std::conj(g) / nr;
  }
  // rows k, k+1 (columns k+2..): x <- c x + s y, y <- c y - conj(s) x
  for (Eigen::Index j = k + 2; j < n; ++j) {
    cplx x = T(k, j), y = T(k + 1, j);
    T(k, j) = cs * x + sn * y;
    T(k + 1, j) = cs * y - std::conj(sn) * x;
  }
  // columns k, k+1 (rows 0..k-1) with conj(s)
  cplx snc = std::conj(sn);
  for (Eigen::Index i = 0; i < k; ++i) {
    cplx x = T(i, k), y = T(i, k + 1);
    T(i, k) = cs * x + snc * y;
    T(i, k + 1) = cs * y - std::conj(snc) * x;
  }
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx x = s.Q(i, k), y = s.Q(i, k + 1);
    s.Q(i, k) = cs * x + snc * y;
    s.Q(i, k + 1) = cs * y - std::conj(snc) * x;
  }
}

// Move the selected diagonal entries to the leading block; returns their count.
inline int schur_reorder(SchurForm& s, std::vector<char> select) {
  const auto n = static_cast<Eigen::Index>(select.size());
  Eigen::Index ks = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!select[i]) continue;
    for (Eigen::Index j = i; j > ks; --j) {
      schur_swap(s, j - 1);
      std::swap(select[j - 1], select[j]);
    }
    ++ks;
  }
  return static_cast<int>(ks);
}

// Orthonormal basis V of the invariant subspace for the selected eigenvalues,
// together with the restricted triangular block T11 (M V = V T11).
struct InvariantSubspace {
  CMat V;
  CMat T;
};

inline InvariantSubspace invariant_subspace(SchurForm s, const std::vector<char>& select) {
  int a = schur_reorder(s, select);
  return {s.Q.leftCols(a), s.T.topLeftCorner(a, a)};
}

// Inertia of a Hermitian matrix.  The matrices this is used on are Gram
// matrices of orthonormal bases, so an absolute threshold separates the
// isotropic directions.
struct Inertia {
  int pos = 0;
  int neg = 0;
  int zero = 0;
};

inline Inertia hermitian_inertia(const CMat& H, double zero_tol = 1e-10) {
  CMat Hs = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(Hs);
  const auto& ev = es.eigenvalues();
  Inertia r;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) <= zero_tol) ++r.zero;
    else if (ev(i) > 0) ++r.pos;
    else ++r.neg;
  }
  return r;
}

}  // namespace maslov
