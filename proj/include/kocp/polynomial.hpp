#pragma once

// kDDSOS polynomial certification: monomial bases, the Gram-matrix /
// coefficient correspondence, feasibility through the cone solver, and
// independent certificate verification by symbolic expansion.

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kocp/solver.hpp"

namespace kocp {

using Exponent = std::vector<int>;  // one entry per variable, nonnegative

/// Sparse real polynomial; zero coefficients are never stored.
class Polynomial {
 public:
  explicit Polynomial(int nvars) : nvars_(nvars) {
    if (nvars < 1) throw InputError("Polynomial: nvars must be >= 1");
  }

  int nvars() const { return nvars_; }
  const std::map<Exponent, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponent& e, double coef) {
    if (static_cast<int>(e.size()) != nvars_) throw InputError("Polynomial: exponent arity");
    for (int v : e)
      if (v < 0) throw InputError("Polynomial: negative exponent");
    auto it = terms_.find(e);
    const double next = (it == terms_.end() ? 0.0 : it->second) + coef;
    if (next == 0.0) {
      if (it != terms_.end()) terms_.erase(it);
    } else if (it == terms_.end()) {
      terms_.emplace(e, next);
    } else {
      it->second = next;
    }
  }

  int degree() const {
    int deg = 0;
    for (const auto& [e, c] : terms_) deg = std::max(deg, total(e));
    return deg;
  }

  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    const int deg = degree();
    for (const auto& [e, c] : terms_)
      if (total(e) != deg) return false;
    return true;
  }

  double eval(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != nvars_) throw InputError("Polynomial::eval: arity");
    double acc = 0;
    for (const auto& [e, c] : terms_) {
      double term = c;
      for (int v = 0; v < nvars_; ++v)
        for (int rep = 0; rep < e[v]; ++rep) term *= x[v];
      acc += term;
    }
    return acc;
  }

  double max_abs_coef() const {
    double m = 0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  static int total(const Exponent& e) {
    int t = 0;
    for (int v : e) t += v;
    return t;
  }

 private:
  int nvars_;
  std::map<Exponent, double> terms_;
};

/// Graded-lexicographic monomial basis: degree ascending, then exponent
/// vectors in descending lexicographic order (so [1, x1, x2, x1^2, ...]).
struct MonomialBasis {
  int nvars = 0;
  int half_degree = 0;
  std::vector<Exponent> monomials;

  int size() const { return static_cast<int>(monomials.size()); }
};

namespace detail_poly {

inline void emit_exponents(int var, int remaining, Exponent& cur, std::vector<Exponent>& out) {
  if (var + 1 == static_cast<int>(cur.size())) {
    cur[var] = remaining;
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int take = remaining; take >= 0; --take) {
    cur[var] = take;
    emit_exponents(var + 1, remaining - take, cur, out);
    cur[var] = 0;
  }
}

}  // namespace detail_poly

/// All monomials of total degree <= d (or exactly d when `exact`).
inline MonomialBasis monomial_basis(int n, int d, bool exact = false) {
  if (n < 1 || d < 0) throw InputError("monomial_basis: need n >= 1, d >= 0");
  const long long count = detail::binomial(n + d, d);
  if (count > tol::basis_cap)
    throw InputError("monomial_basis: size " + std::to_string(count) + " exceeds the cap");
  MonomialBasis b;
  b.nvars = n;
  b.half_degree = d;
  Exponent cur(n, 0);
  for (int deg = exact ? d : 0; deg <= d; ++deg)
    detail_poly::emit_exponents(0, deg, cur, b.monomials);
  return b;
}

/// p(x) = m(x)' A m(x) expanded into coefficients.
inline Polynomial gram_to_poly(const SymMatrix& a, const MonomialBasis& basis) {
  if (a.dim() != basis.size()) throw InputError("gram_to_poly: Gram dim != basis size");
  Polynomial p(basis.nvars);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j) {
      const double c = (i == j ? 1.0 : 2.0) * a(i, j);
      if (c == 0.0) continue;
      Exponent e = basis.monomials[i];
      for (int v = 0; v < basis.nvars; ++v) e[v] += basis.monomials[j][v];
      p.add_term(e, c);
    }
  return p;
}

/// A Gram representation p = m' (sum lift(M_s)) m with the blocks in the
/// k-th order cone.
struct GramCertificate {
  MonomialBasis basis;
  Decomposition decomposition;

  SymMatrix gram() const { return decomposition.assemble(); }
};

struct CertifyResult {
  bool feasible = false;
  std::optional<GramCertificate> certificate;
  SolveStatus status = SolveStatus::NumericalFailure;
};

/// Coefficient-matching constraints tr(C_e A) = p_e over the basis.
inline std::vector<std::pair<SymMatrix, double>> gram_constraints(const Polynomial& p,
                                                                  const MonomialBasis& basis) {
  const int h = basis.size();
  std::map<Exponent, SymMatrix> cmats;
  for (int i = 0; i < h; ++i)
    for (int j = i; j < h; ++j) {
      Exponent e = basis.monomials[i];
      for (int v = 0; v < basis.nvars; ++v) e[v] += basis.monomials[j][v];
      auto it = cmats.find(e);
      if (it == cmats.end()) it = cmats.emplace(e, SymMatrix(h)).first;
      it->second.at(i, j) = 1.0;
    }
  std::vector<std::pair<SymMatrix, double>> out;
  out.reserve(cmats.size());
  for (auto& [e, c] : cmats) {
    const auto it = p.terms().find(e);
    out.emplace_back(std::move(c), it == p.terms().end() ? 0.0 : it->second);
  }
  return out;
}

/// The monomial basis certify_kddsos uses: total degree <= deg/2, restricted
/// to exactly deg/2 for homogeneous targets.
inline MonomialBasis certification_basis(const Polynomial& p) {
  const int deg = p.degree();
  if (deg % 2 != 0) throw InputError("certify_kddsos: polynomial degree must be even");
  return monomial_basis(p.nvars(), deg / 2, p.is_homogeneous() && !p.is_zero());
}

/// Decides whether p is a k-th order diagonally dominant sum of squares by
/// solving the Gram feasibility program over (S+^h)_k. Infeasibility is an
/// answer, not an error.
inline CertifyResult certify_kddsos(const Polynomial& p, int k, const SolveOptions& opts = {}) {
  CertifyResult out;
  if (p.is_zero()) {
    out.feasible = true;
    out.status = SolveStatus::Optimal;
    MonomialBasis b = monomial_basis(p.nvars(), 0);
    out.certificate = GramCertificate{b, Decomposition{b.size(), {}}};
    return out;
  }
  const MonomialBasis basis = certification_basis(p);
  const int h = basis.size();
  // every target exponent must be producible as a basis-pair sum
  {
    std::map<Exponent, char> producible;
    for (int i = 0; i < h; ++i)
      for (int j = i; j < h; ++j) {
        Exponent e = basis.monomials[i];
        for (int v = 0; v < basis.nvars; ++v) e[v] += basis.monomials[j][v];
        producible[e] = 1;
      }
    for (const auto& [e, c] : p.terms())
      if (!producible.count(e)) {
        out.feasible = false;
        out.status = SolveStatus::Infeasible;
        return out;
      }
  }
  StandardProblem prob;
  prob.cone = ConeSpec::psd(h, std::min(k, h), opts.force_size);
  prob.side = ProblemSide::PrimalCone;
  prob.A0 = SymMatrix(h);
  prob.constraints = gram_constraints(p, basis);
  const Solution sol = solve(prob, opts);
  out.status = sol.status;
  if (sol.status == SolveStatus::Infeasible) {
    out.feasible = false;
    return out;
  }
  if (sol.status != SolveStatus::Optimal || !sol.decomposition)
    throw NumericalError("certify_kddsos: solver failed (" + sol.message + ")");
  out.feasible = true;
  out.certificate = GramCertificate{basis, *sol.decomposition};
  return out;
}

struct CertificateCheck {
  bool valid = false;
  double max_coef_err = 0;
};

/// Re-derives the polynomial from the certificate by factoring each block
/// (pivoted LDL^T, zero-pivot threshold 1e-10) and expanding the squared
/// k-term combinations symbolically, then compares coefficient maps.
inline CertificateCheck verify_certificate(const Polynomial& p, const GramCertificate& cert) {
  Polynomial expanded(p.nvars());
  for (const auto& [t, m] : cert.decomposition.blocks) {
    const double margin = psd_margin(m);
    if (margin < -tol::psd * psd_scale(m))
      throw InputError("verify_certificate: block " + t.to_string() + " is not PSD (margin " +
                       std::to_string(margin) + ")");
    if (t.max_index() > cert.basis.size())
      throw InputError("verify_certificate: tuple exceeds basis size");
    const int kk = m.dim();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m.dense());
    const Eigen::MatrixXd l = ldlt.matrixL();
    const Eigen::VectorXd dg = ldlt.vectorD();
    const auto perm = ldlt.transpositionsP();
    const double pivot_floor = 1e-10 * psd_scale(m);
    for (int r = 0; r < kk; ++r) {
      if (dg[r] < pivot_floor) continue;
      // row r of sqrt(D) L' P gives one k-term linear combination
      Eigen::VectorXd coefs = Eigen::VectorXd::Zero(kk);
      for (int c = 0; c < kk; ++c) coefs[c] = l(c, r);
      coefs = perm.transpose() * coefs;
      coefs *= std::sqrt(dg[r]);
      // expand (sum_l coefs_l m_{t_l})^2
      for (int a = 0; a < kk; ++a) {
        if (coefs[a] == 0.0) continue;
        for (int b = 0; b < kk; ++b) {
          if (coefs[b] == 0.0) continue;
          Exponent e = cert.basis.monomials[t.zero_based(a)];
          for (int v = 0; v < p.nvars(); ++v)
            e[v] += cert.basis.monomials[t.zero_based(b)][v];
          expanded.add_term(e, coefs[a] * coefs[b]);
        }
      }
    }
  }
  CertificateCheck out;
  std::map<Exponent, double> diff;
  for (const auto& [e, c] : p.terms()) diff[e] += c;
  for (const auto& [e, c] : expanded.terms()) diff[e] -= c;
  for (const auto& [e, c] : diff) out.max_coef_err = std::max(out.max_coef_err, std::abs(c));
  out.valid = out.max_coef_err <= 1e-7 * std::max(1.0, p.max_abs_coef());
  return out;
}

}  // namespace kocp
