#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace kocp::detail {

/// Packed upper-triangle (row-major) offset of (i,j) with i <= j, dim k.
inline int packed_off(int k, int i, int j) { return i * k - i * (i - 1) / 2 + (j - i); }

inline int packed_size(int k) { return k * (k + 1) / 2; }

inline Eigen::MatrixXd unpack_sym(int k, const Eigen::VectorXd& u) {
  Eigen::MatrixXd m(k, k);
  int off = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) m(i, j) = m(j, i) = u[off++];
  return m;
}

inline Eigen::VectorXd pack_sym(const Eigen::MatrixXd& m) {
  const int k = static_cast<int>(m.rows());
  Eigen::VectorXd u(packed_size(k));
  int off = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) u[off++] = m(i, j);
  return u;
}

inline Eigen::VectorXd packed_identity(int k) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(packed_size(k));
  for (int i = 0; i < k; ++i) u[packed_off(k, i, i)] = 1.0;
  return u;
}

struct BarrierEval {
  bool interior = false;
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// Hessian of -log det at W = M^{-1}, in packed coordinates:
/// H[(ab),(cd)] = kap_ab * kap_cd * (W_ac W_bd + W_ad W_bc) / 2,
/// kap = 2 off-diagonal, 1 diagonal.
inline Eigen::MatrixXd logdet_packed_hessian(const Eigen::MatrixXd& w) {
  const int k = static_cast<int>(w.rows());
  const int m = packed_size(k);
  Eigen::MatrixXd h(m, m);
  int r = 0;
  for (int a = 0; a < k; ++a)
    for (int b = a; b < k; ++b, ++r) {
      const double ka = a == b ? 1.0 : 2.0;
      int s = 0;
      for (int c = 0; c < k; ++c)
        for (int d = c; d < k; ++d, ++s) {
          const double kc = c == d ? 1.0 : 2.0;
          h(r, s) = 0.5 * ka * kc * (w(a, c) * w(b, d) + w(a, d) * w(b, c));
        }
    }
  return h;
}

/// Gradient of -log det in packed coordinates: -kap_ij * W_ij.
inline Eigen::VectorXd logdet_packed_gradient(const Eigen::MatrixXd& w) {
  const int k = static_cast<int>(w.rows());
  Eigen::VectorXd g(packed_size(k));
  int r = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j, ++r) g[r] = -(i == j ? 1.0 : 2.0) * w(i, j);
  return g;
}

/// -log det barrier for a PSD block given in packed coordinates.
inline BarrierEval psd_packed_barrier(int k, const Eigen::VectorXd& u, bool want_hess) {
  BarrierEval e;
  const Eigen::MatrixXd m = unpack_sym(k, u);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return e;
  const Eigen::MatrixXd l = llt.matrixL();
  double logdet = 0;
  for (int i = 0; i < k; ++i) {
    if (!(l(i, i) > 0)) return e;
    logdet += std::log(l(i, i));
  }
  e.interior = true;
  e.value = -2.0 * logdet;
  const Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(k, k));
  e.grad = logdet_packed_gradient(w);
  if (want_hess) e.hess = logdet_packed_hessian(w);
  return e;
}

/// -log(t^2 - ||x||^2) barrier for u = (t, x), theta = 2.
inline BarrierEval soc_barrier(const Eigen::VectorXd& u, bool want_hess) {
  BarrierEval e;
  const int k = static_cast<int>(u.size());
  const double t = u[0];
  const double r = t * t - u.tail(k - 1).squaredNorm();
  if (!(t > 0) || !(r > 0)) return e;
  e.interior = true;
  e.value = -std::log(r);
  Eigen::VectorXd ju = u;
  ju.tail(k - 1) *= -1.0;  // J u with J = diag(1,-1,...,-1)
  e.grad = (-2.0 / r) * ju;
  if (want_hess) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Identity(k, k) * -1.0;
    j(0, 0) = 1.0;
    e.hess = (-2.0 / r) * j + (4.0 / (r * r)) * (ju * ju.transpose());
  }
  return e;
}

/// -sum log u_i, theta = len.
inline BarrierEval nonneg_barrier(const Eigen::VectorXd& u, bool want_hess) {
  BarrierEval e;
  const int m = static_cast<int>(u.size());
  for (int i = 0; i < m; ++i)
    if (!(u[i] > 0)) return e;
  e.interior = true;
  e.value = 0;
  e.grad.resize(m);
  if (want_hess) e.hess = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    e.value -= std::log(u[i]);
    e.grad[i] = -1.0 / u[i];
    if (want_hess) e.hess(i, i) = 1.0 / (u[i] * u[i]);
  }
  return e;
}

}  // namespace kocp::detail
