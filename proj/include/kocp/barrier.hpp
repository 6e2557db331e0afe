#pragma once

// Self-concordant barrier for the PSD-induced dual cone,
//   f(Y) = sum over J of -log det(truncate(Y, tuple)),
// with gradient -sum lift(truncate(Y)^-1), Hessian quadratic form
// sum tr((T^-1/2 T(H) T^-1/2)^2), Legendre inversion and the induced
// primal barrier F(X) = -<X, Y*> - f(Y*).

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "kocp/cones.hpp"
#include "kocp/detail/block_barriers.hpp"
#include "kocp/matrix_ops.hpp"

namespace kocp {

/// A dual-cone interior point with its per-tuple factorizations.
/// theta = k * |J| is the barrier parameter.
class BarrierPoint {
 public:
  BarrierPoint(SymMatrix y, const ConeSpec& spec) : y_(std::move(y)), spec_(&spec) {
    spec.validate();
    if (spec.family != ConeFamily::Psd)
      throw InputError("barrier: only the PSD-induced dual cone is supported");
    if (y_.dim() != spec.d) throw InputError("barrier: dim mismatch");
    inv_.reserve(spec.J.size());
    value_ = 0;
    for (const auto& t : spec.J.tuples) {
      const SymMatrix tr = truncate(y_, t);
      const double margin = psd_margin(tr);
      if (!(margin > tol::interior * psd_scale(tr)))
        throw NotInteriorError("barrier: truncation " + t.to_string() +
                               " is not positive definite (margin " + std::to_string(margin) +
                               ")");
      Eigen::LLT<Eigen::MatrixXd> llt(tr.dense());
      if (llt.info() != Eigen::Success)
        throw NotInteriorError("barrier: factorization failed on " + t.to_string());
      const Eigen::MatrixXd l = llt.matrixL();
      for (int i = 0; i < tr.dim(); ++i) value_ -= 2.0 * std::log(l(i, i));
      inv_.push_back(llt.solve(Eigen::MatrixXd::Identity(tr.dim(), tr.dim())));
    }
  }

  const SymMatrix& y() const { return y_; }
  const ConeSpec& spec() const { return *spec_; }
  double theta() const { return static_cast<double>(spec_->k) * spec_->J.size(); }

  double value() const { return value_; }

  SymMatrix gradient() const {
    SymMatrix g(spec_->d);
    for (int s = 0; s < spec_->J.size(); ++s)
      add_lift(g, SymMatrix::from_dense(-inv_[s]), spec_->J.tuples[s]);
    return g;
  }

  double hess_quadform(const SymMatrix& h) const {
    if (h.dim() != spec_->d) throw InputError("barrier: direction dim mismatch");
    double q = 0;
    for (int s = 0; s < spec_->J.size(); ++s) {
      const Eigen::MatrixXd hs = truncate(h, spec_->J.tuples[s]).dense();
      const Eigen::MatrixXd m = inv_[s] * hs;
      q += (m * m).trace();
    }
    return q;
  }

  /// Dense Hessian over packed coordinates of S^d (for Newton steps).
  Eigen::MatrixXd hess_packed() const {
    const int n = SymMatrix::packed_size(spec_->d);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    SymMatrix probe(spec_->d);
    for (int s = 0; s < spec_->J.size(); ++s) {
      const IndexTuple& t = spec_->J.tuples[s];
      const Eigen::MatrixXd hloc = detail::logdet_packed_hessian(inv_[s]);
      std::vector<int> glob(detail::packed_size(t.size()));
      int c = 0;
      for (int p = 0; p < t.size(); ++p)
        for (int q = p; q < t.size(); ++q, ++c)
          glob[c] = probe.index(t.zero_based(p), t.zero_based(q));
      for (size_t a = 0; a < glob.size(); ++a)
        for (size_t b = 0; b < glob.size(); ++b)
          h(glob[a], glob[b]) += hloc(static_cast<int>(a), static_cast<int>(b));
    }
    return h;
  }

 private:
  SymMatrix y_;
  const ConeSpec* spec_;
  double value_ = 0;
  std::vector<Eigen::MatrixXd> inv_;
};

inline double barrier_value(const SymMatrix& y, const ConeSpec& spec) {
  return BarrierPoint(y, spec).value();
}

inline SymMatrix barrier_grad(const SymMatrix& y, const ConeSpec& spec) {
  return BarrierPoint(y, spec).gradient();
}

inline double barrier_hess_quadform(const SymMatrix& y, const SymMatrix& h,
                                    const ConeSpec& spec) {
  return BarrierPoint(y, spec).hess_quadform(h);
}

namespace detail_barrier {

inline Eigen::VectorXd pack_with_kappa(const SymMatrix& a) {
  Eigen::VectorXd v(SymMatrix::packed_size(a.dim()));
  int c = 0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j, ++c) v[c] = (i == j ? 1.0 : 2.0) * a(i, j);
  return v;
}

inline SymMatrix unpack_plain(int d, const Eigen::VectorXd& v) {
  SymMatrix a(d);
  int c = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++c) a.at(i, j) = v[c];
  return a;
}

}  // namespace detail_barrier

/// Solves grad f(Y) = -X for Y by damped Newton on f(Y) + <X, Y>.
/// X must lie in the interior of the primal cone K^d_k.
inline SymMatrix legendre_invert(const SymMatrix& x, const ConeSpec& spec,
                                 double residual_tol = 1e-8, int max_iter = 500) {
  spec.validate();
  if (x.dim() != spec.d) throw InputError("legendre_invert: dim mismatch");
  const double theta = static_cast<double>(spec.k) * spec.J.size();
  const double xtr = x.trace();
  if (!(xtr > 0)) throw NotInteriorError("legendre_invert: X has nonpositive trace");
  SymMatrix y = (theta / xtr) * SymMatrix::identity(spec.d);
  const double target = residual_tol * std::max(1.0, x.frobenius());
  double resid = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    BarrierPoint bp(y, spec);
    const SymMatrix grad_mat = bp.gradient();
    resid = (grad_mat + x).frobenius();
    if (resid <= target) return y;
    // coordinate gradient of f(Y) + <X,Y> carries the off-diagonal doubling
    const Eigen::VectorXd g = detail_barrier::pack_with_kappa(grad_mat + x);
    Eigen::MatrixXd h = bp.hess_packed();
    h.diagonal().array() += 1e-14;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("legendre_invert: Hessian factorization failed");
    const Eigen::VectorXd dv = ldlt.solve(-g);
    const double lambda = std::sqrt(std::max(0.0, dv.dot(h * dv)));
    double alpha = lambda <= 0.25 ? 1.0 : 1.0 / (1.0 + lambda);
    const SymMatrix step = detail_barrier::unpack_plain(spec.d, dv);
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      SymMatrix cand = y + alpha * step;
      bool interior = true;
      for (const auto& t : spec.J.tuples) {
        const SymMatrix tr = truncate(cand, t);
        if (!(psd_margin(tr) > tol::interior * psd_scale(tr))) {
          interior = false;
          break;
        }
      }
      if (interior) {
        y = std::move(cand);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved)
      throw NumericalError("legendre_invert: newton-divergence (line search stalled, residual " +
                           std::to_string(resid) + ")");
  }
  throw NumericalError("legendre_invert: newton-divergence (residual " + std::to_string(resid) +
                       " after " + std::to_string(max_iter) + " iterations)");
}

/// F(X) = -<X, Y*> - f(Y*) with Y* = legendre_invert(X): the induced
/// primal barrier, theta * |J|-logarithmically homogeneous.
inline double primal_barrier(const SymMatrix& x, const ConeSpec& spec) {
  const SymMatrix y = legendre_invert(x, spec);
  return -SymMatrix::inner(x, y) - barrier_value(y, spec);
}

}  // namespace kocp
