#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kocp/matrix_ops.hpp"
#include "kocp/symmetric_matrix.hpp"

namespace kocp {

enum class NormDomain { Vector, Matrix };

/// Names a norm on R^d (vector domain) or S^d (matrix domain, via the
/// eigenvalue spectrum): lp / Schatten-p, spectral, nuclear, Ky Fan r.
struct NormDescriptor {
  enum class Kind { Lp, Spectral, Nuclear, KyFan };
  Kind kind = Kind::Lp;
  double p = 2.0;  // Lp only
  int r = 1;       // KyFan only
  NormDomain domain = NormDomain::Vector;

  static NormDescriptor lp(double p, NormDomain dom = NormDomain::Vector) {
    if (p < 1.0) throw InputError("lp norm requires p >= 1");
    return {Kind::Lp, p, 1, dom};
  }
  static NormDescriptor spectral() { return {Kind::Spectral, 0, 1, NormDomain::Matrix}; }
  static NormDescriptor nuclear() { return {Kind::Nuclear, 0, 1, NormDomain::Matrix}; }
  static NormDescriptor kyfan(int r) {
    if (r < 1) throw InputError("kyfan norm requires r >= 1");
    return {Kind::KyFan, 0, r, NormDomain::Matrix};
  }

  /// Parses "l1", "l2", "linf", "lp:3", "spectral", "nuclear", "kyfan:2".
  static NormDescriptor parse(const std::string& s) {
    if (s == "l1") return lp(1);
    if (s == "l2") return lp(2);
    if (s == "linf") return lp(std::numeric_limits<double>::infinity());
    if (s.rfind("lp:", 0) == 0) return lp(std::stod(s.substr(3)));
    if (s == "spectral") return spectral();
    if (s == "nuclear") return nuclear();
    if (s.rfind("kyfan:", 0) == 0) return kyfan(std::stoi(s.substr(6)));
    throw InputError("unknown norm name: " + s);
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Lp:
        if (p == 1) return "l1";
        if (p == 2) return "l2";
        if (std::isinf(p)) return "linf";
        return "lp:" + std::to_string(p);
      case Kind::Spectral: return "spectral";
      case Kind::Nuclear: return "nuclear";
      case Kind::KyFan: return "kyfan:" + std::to_string(r);
    }
    return "?";
  }

  /// The dual norm where it is again a shipped norm; Ky Fan duals are
  /// evaluated directly in dual_norm_eval instead.
  NormDescriptor dual() const {
    switch (kind) {
      case Kind::Lp: {
        if (p == 1.0) return lp(std::numeric_limits<double>::infinity(), domain);
        if (std::isinf(p)) return lp(1.0, domain);
        return lp(p / (p - 1.0), domain);
      }
      case Kind::Spectral: return nuclear();
      case Kind::Nuclear: return spectral();
      case Kind::KyFan: throw InputError("kyfan dual has no named descriptor");
    }
    throw InputError("bad norm descriptor");
  }
};

namespace detail {

inline double lp_of(std::vector<double> mags, double p) {
  for (double& v : mags) v = std::abs(v);
  if (std::isinf(p)) return mags.empty() ? 0.0 : *std::max_element(mags.begin(), mags.end());
  if (p == 1.0) {
    double s = 0;
    for (double v : mags) s += v;
    return s;
  }
  if (p == 2.0) {
    double s = 0;
    for (double v : mags) s += v * v;
    return std::sqrt(s);
  }
  double s = 0;
  for (double v : mags) s += std::pow(v, p);
  return std::pow(s, 1.0 / p);
}

inline std::vector<double> singular_values_desc(const SymMatrix& x) {
  Eigen::VectorXd ev = sym_eigenvalues(x);
  std::vector<double> s(ev.size());
  for (int i = 0; i < ev.size(); ++i) s[i] = std::abs(ev[i]);
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

}  // namespace detail

inline double norm_eval(const NormDescriptor& n, const std::vector<double>& x) {
  if (n.domain != NormDomain::Vector) throw InputError("norm_eval: matrix norm on a vector");
  return detail::lp_of(x, n.kind == NormDescriptor::Kind::Lp ? n.p : 2.0);
}

inline double norm_eval(const NormDescriptor& n, const SymMatrix& x) {
  if (n.domain != NormDomain::Matrix)
    throw InputError("norm_eval: vector norm on a matrix");
  const auto s = detail::singular_values_desc(x);
  switch (n.kind) {
    case NormDescriptor::Kind::Lp: return detail::lp_of(s, n.p);  // Schatten-p
    case NormDescriptor::Kind::Spectral: return s.empty() ? 0.0 : s[0];
    case NormDescriptor::Kind::Nuclear: {
      double t = 0;
      for (double v : s) t += v;
      return t;
    }
    case NormDescriptor::Kind::KyFan: {
      double t = 0;
      for (int i = 0; i < std::min<int>(n.r, static_cast<int>(s.size())); ++i) t += s[i];
      return t;
    }
  }
  throw InputError("bad norm descriptor");
}

/// Dual-norm value. Ky Fan r uses max(spectral, nuclear/r) (experimental,
/// used only inside membership tests).
inline double dual_norm_eval(const NormDescriptor& n, const SymMatrix& x) {
  if (n.kind == NormDescriptor::Kind::KyFan) {
    const auto s = detail::singular_values_desc(x);
    double nuc = 0;
    for (double v : s) nuc += v;
    return std::max(s.empty() ? 0.0 : s[0], nuc / n.r);
  }
  return norm_eval(n.dual(), x);
}

inline double dual_norm_eval(const NormDescriptor& n, const std::vector<double>& x) {
  if (n.kind != NormDescriptor::Kind::Lp) throw InputError("vector dual norm needs lp");
  return norm_eval(n.dual(), x);
}

/// A witness Y with ||Y||_dual = 1 and <X, Y> = ||X||, used to exercise the
/// duality pairing in tests. Vector (lp) domain.
inline std::vector<double> dual_pair_witness(const NormDescriptor& n, const std::vector<double>& x) {
  const int m = static_cast<int>(x.size());
  std::vector<double> y(m, 0.0);
  const double nx = norm_eval(n, x);
  if (nx == 0) return y;
  if (std::isinf(n.p)) {
    int arg = 0;
    for (int i = 1; i < m; ++i)
      if (std::abs(x[i]) > std::abs(x[arg])) arg = i;
    y[arg] = x[arg] >= 0 ? 1.0 : -1.0;
    return y;
  }
  if (n.p == 1.0) {
    for (int i = 0; i < m; ++i) y[i] = x[i] > 0 ? 1.0 : (x[i] < 0 ? -1.0 : 0.0);
    return y;
  }
  // |y_i| = (|x_i|/||x||_p)^{p-1}, matching signs
  for (int i = 0; i < m; ++i) {
    const double t = std::pow(std::abs(x[i]) / nx, n.p - 1.0);
    y[i] = x[i] >= 0 ? t : -t;
  }
  return y;
}

/// Matrix-domain dual pairing witness built from the eigenvectors of X.
inline SymMatrix dual_pair_witness(const NormDescriptor& n, const SymMatrix& x) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.dense());
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  const Eigen::MatrixXd q = es.eigenvectors();
  const int d = x.dim();
  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::abs(ev[a]) > std::abs(ev[b]); });
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  auto sgn = [](double v) { return v >= 0 ? 1.0 : -1.0; };
  switch (n.kind) {
    case NormDescriptor::Kind::Spectral:
      // dual is nuclear: witness q1 sgn(l1) q1'
      w[order[0]] = sgn(ev[order[0]]);
      break;
    case NormDescriptor::Kind::Nuclear:
      for (int i = 0; i < d; ++i) w[i] = sgn(ev[i]);
      break;
    case NormDescriptor::Kind::KyFan:
      for (int i = 0; i < std::min(n.r, d); ++i) w[order[i]] = sgn(ev[order[i]]);
      break;
    case NormDescriptor::Kind::Lp: {
      const double nx = norm_eval(n, x);
      if (nx == 0) break;
      if (std::isinf(n.p)) {
        w[order[0]] = sgn(ev[order[0]]);
      } else if (n.p == 1.0) {
        for (int i = 0; i < d; ++i) w[i] = sgn(ev[i]);
      } else {
        for (int i = 0; i < d; ++i)
          w[i] = sgn(ev[i]) * std::pow(std::abs(ev[i]) / nx, n.p - 1.0);
      }
      break;
    }
  }
  return SymMatrix::from_dense(q * w.asDiagonal() * q.transpose());
}

}  // namespace kocp
