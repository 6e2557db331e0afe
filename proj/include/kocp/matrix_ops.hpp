#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>
#include <vector>

#include "kocp/index_family.hpp"
#include "kocp/symmetric_matrix.hpp"
#include "kocp/tolerances.hpp"

namespace kocp {

/// Principal-submatrix projection: result(p,q) = Z(i_p, i_q).
inline SymMatrix truncate(const SymMatrix& z, const IndexTuple& t) {
  if (t.max_index() > z.dim()) throw InputError("truncate: tuple index exceeds matrix dim");
  SymMatrix x(t.size());
  for (int p = 0; p < t.size(); ++p)
    for (int q = p; q < t.size(); ++q) x.at(p, q) = z(t.zero_based(p), t.zero_based(q));
  return x;
}

/// Zero-padded injection: result(i_p, i_q) = X(p,q), all other entries 0.
inline SymMatrix lift(const SymMatrix& x, const IndexTuple& t, int d) {
  if (t.size() != x.dim()) throw InputError("lift: tuple length != matrix dim");
  if (t.max_index() > d) throw InputError("lift: tuple index exceeds ambient dim");
  SymMatrix z(d);
  for (int p = 0; p < x.dim(); ++p)
    for (int q = p; q < x.dim(); ++q) z.at(t.zero_based(p), t.zero_based(q)) = x(p, q);
  return z;
}

/// Adds lift(x, t) into z in place (avoids temporaries in hot loops).
inline void add_lift(SymMatrix& z, const SymMatrix& x, const IndexTuple& t) {
  for (int p = 0; p < x.dim(); ++p)
    for (int q = p; q < x.dim(); ++q) z.at(t.zero_based(p), t.zero_based(q)) += x(p, q);
}

/// Comparison matrix M(A): diagonal kept, off-diagonals replaced by -|a_ij|.
inline SymMatrix comparison_matrix(const SymMatrix& a) {
  SymMatrix m(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    m.at(i, i) = a(i, i);
    for (int j = i + 1; j < a.dim(); ++j) m.at(i, j) = -std::abs(a(i, j));
  }
  return m;
}

/// All eigenvalues of a symmetric matrix, ascending.
inline Eigen::VectorXd sym_eigenvalues(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.dense(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("symmetric eigensolver failed to converge");
  return es.eigenvalues();
}

/// Smallest eigenvalue of A. A is declared PSD iff
/// psd_margin(A) >= -tol::psd * max(1, ||A||_F).
inline double psd_margin(const SymMatrix& a) {
  if (a.dim() == 1) return a(0, 0);
  return sym_eigenvalues(a).minCoeff();
}

inline double psd_scale(const SymMatrix& a) { return std::max(1.0, a.frobenius()); }

inline bool is_psd(const SymMatrix& a, double rel_tol = tol::psd) {
  return psd_margin(a) >= -rel_tol * psd_scale(a);
}

/// Diagonal dominance with nonnegative diagonal: a_ii >= sum_{j != i} |a_ij|.
/// Returns the worst row slack (>= 0 means diagonally dominant).
inline double dd_margin(const SymMatrix& a) {
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.dim(); ++i) {
    double off = 0;
    for (int j = 0; j < a.dim(); ++j)
      if (j != i) off += std::abs(a(i, j));
    worst = std::min(worst, a(i, i) - off);
  }
  return worst;
}

/// Margin of the diag-embedded second-order cone: t - ||x||_2 where t is the
/// first coordinate. For a length-1 vector this is just t.
inline double soc_margin(const std::vector<double>& v) {
  double s = 0;
  for (size_t i = 1; i < v.size(); ++i) s += v[i] * v[i];
  return v[0] - std::sqrt(s);
}

/// Block-diagonal composition diag(X1, X2).
inline SymMatrix direct_sum(const SymMatrix& x1, const SymMatrix& x2) {
  SymMatrix z(x1.dim() + x2.dim());
  for (int i = 0; i < x1.dim(); ++i)
    for (int j = i; j < x1.dim(); ++j) z.at(i, j) = x1(i, j);
  for (int i = 0; i < x2.dim(); ++i)
    for (int j = i; j < x2.dim(); ++j) z.at(x1.dim() + i, x1.dim() + j) = x2(i, j);
  return z;
}

/// Splits diag(X1, X2) back into its blocks; the cross block is ignored
/// (callers that care should check it is zero).
inline std::pair<SymMatrix, SymMatrix> split_direct_sum(const SymMatrix& z, int s) {
  if (s < 1 || s >= z.dim()) throw InputError("split_direct_sum: bad split point");
  std::vector<int> lo(s), hi(z.dim() - s);
  for (int i = 0; i < s; ++i) lo[i] = i + 1;
  for (int i = 0; i < z.dim() - s; ++i) hi[i] = s + i + 1;
  return {truncate(z, IndexTuple(lo)), truncate(z, IndexTuple(hi))};
}

}  // namespace kocp
