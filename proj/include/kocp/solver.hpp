#pragma once

// Interior-point solution of k-th order cone programs in standard and
// inequality form, over the primal cone (block-decomposition variables) or
// the dual cone (truncation-intersection constraints), plus the
// standard<->inequality conversions, the SOCP -> SDD cast, KKT residuals
// and hierarchy scans.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kocp/cones.hpp"
#include "kocp/ipm.hpp"
#include "kocp/matrix_ops.hpp"

namespace kocp {

enum class ProblemSide { PrimalCone, DualCone };

inline const char* to_string(ProblemSide s) {
  return s == ProblemSide::PrimalCone ? "primal" : "dual";
}

/// min tr(A0 X) s.t. tr(A_i X) = b_i, X in K^d_k(J) (or its dual).
struct StandardProblem {
  ConeSpec cone;
  SymMatrix A0{1};
  std::vector<std::pair<SymMatrix, double>> constraints;
  ProblemSide side = ProblemSide::PrimalCone;
};

/// min q'x s.t. P0 + sum x_i P_i in K^d_k(J) (or its dual).
struct InequalityProblem {
  ConeSpec cone;
  std::vector<double> q;
  SymMatrix P0{1};
  std::vector<SymMatrix> P;
  ProblemSide side = ProblemSide::PrimalCone;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max-iter";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double mu_factor = 10.0;
  bool force_size = false;

  ipm::Options ipm() const {
    ipm::Options o;
    o.tol = tol;
    o.max_outer = max_iter;
    o.mu_factor = mu_factor;
    return o;
  }
};

struct KKTReport {
  double primal_eq_res = 0;
  double primal_cone_margin = 0;
  double dual_cone_margin = 0;
  double complementarity = 0;
  double dual_eq_res = 0;
  double gap = 0;
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::optional<SymMatrix> X;
  std::vector<double> y;
  std::optional<SymMatrix> Z;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double gap_estimate = std::numeric_limits<double>::quiet_NaN();
  std::optional<Decomposition> decomposition;    // primal-cone witness for X
  std::optional<Decomposition> z_decomposition;  // primal-cone witness for Z (dual side)
  std::string message;
};

namespace detail_solver {

struct BuiltRows {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  std::vector<int> kept;  // original row index per kept row
  bool inconsistent_zero_row = false;
};

/// Drops (numerically) zero constraint rows; a zero row with b != 0 marks
/// the problem infeasible outright.
inline BuiltRows filter_rows(const Eigen::MatrixXd& g, const Eigen::VectorXd& h) {
  BuiltRows out;
  std::vector<int> keep;
  for (int r = 0; r < g.rows(); ++r) {
    if (g.row(r).lpNorm<Eigen::Infinity>() > 1e-14) {
      keep.push_back(r);
    } else if (std::abs(h[r]) > 1e-12) {
      out.inconsistent_zero_row = true;
    }
  }
  out.G.resize(keep.size(), g.cols());
  out.h.resize(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    out.G.row(static_cast<int>(i)) = g.row(keep[i]);
    out.h[static_cast<int>(i)] = h[keep[i]];
  }
  out.kept = std::move(keep);
  return out;
}

inline std::vector<double> expand_multipliers(const Eigen::VectorXd& y,
                                              const std::vector<int>& kept, int total) {
  std::vector<double> out(total, 0.0);
  for (size_t i = 0; i < kept.size(); ++i) out[kept[i]] = y[static_cast<int>(i)];
  return out;
}

/// A stalled path whose achieved gap already satisfies the 1e-6-grade KKT
/// contract still counts as solved.
inline void promote_stalled(Solution& sol) {
  if (sol.status == SolveStatus::MaxIter && std::isfinite(sol.gap_estimate) &&
      std::isfinite(sol.objective) &&
      sol.gap_estimate <= 5e-7 * (1.0 + std::abs(sol.objective))) {
    sol.status = SolveStatus::Optimal;
    if (sol.message.empty()) sol.message = "path stalled within tolerance";
  }
}

inline SolveStatus map_status(ipm::Status s) {
  switch (s) {
    case ipm::Status::Optimal: return SolveStatus::Optimal;
    case ipm::Status::Infeasible: return SolveStatus::Infeasible;
    case ipm::Status::Unbounded: return SolveStatus::Unbounded;
    case ipm::Status::MaxIter: return SolveStatus::MaxIter;
    case ipm::Status::NumericalFailure: return SolveStatus::NumericalFailure;
  }
  return SolveStatus::NumericalFailure;
}

struct RowReduction {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  std::vector<int> kept;
  bool infeasible = false;
};

/// Keeps a maximal independent subset of rows; flags inconsistency when the
/// dropped rows are not implied by the kept ones.
inline RowReduction reduce_rows(const Eigen::MatrixXd& g, const Eigen::VectorXd& h) {
  RowReduction out;
  const int p = static_cast<int>(g.rows());
  if (p == 0) {
    out.G = g;
    out.h = h;
    return out;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g.transpose());
  qr.setThreshold(tol::rank_pivot);
  const int r = static_cast<int>(qr.rank());
  Eigen::MatrixXd gh(g.rows(), g.cols() + 1);
  gh << g, h;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(gh.transpose());
  qr2.setThreshold(tol::rank_pivot);
  if (qr2.rank() > r) {
    out.infeasible = true;
    return out;
  }
  std::vector<int> kept(qr.colsPermutation().indices().data(),
                        qr.colsPermutation().indices().data() + p);
  kept.resize(r);
  std::sort(kept.begin(), kept.end());
  out.G.resize(r, g.cols());
  out.h.resize(r);
  for (int i = 0; i < r; ++i) {
    out.G.row(i) = g.row(kept[i]);
    out.h[i] = h[kept[i]];
  }
  out.kept = std::move(kept);
  return out;
}

/// Facial presolve for standard-form primal problems over the full index
/// family: finds diagonal coordinates provably zero on the feasible set
/// (a nonnegative combination of diagonal entries that the equalities force
/// to vanish; singletons and pairs cover the constructions this library
/// emits) and drops their rows and columns.
struct StdPresolve {
  bool changed = false;
  bool infeasible = false;
  std::vector<int> survivors;  // 0-based ambient indices kept
  std::vector<int> dropped;
};

inline StdPresolve presolve_forced_zeros(const StandardProblem& prob) {
  StdPresolve out;
  const int d0 = prob.cone.d;
  out.survivors.resize(d0);
  for (int i = 0; i < d0; ++i) out.survivors[i] = i;
  if (prob.constraints.empty()) return out;

  std::vector<int> cur = out.survivors;
  while (static_cast<int>(cur.size()) > prob.cone.k) {
    const int d = static_cast<int>(cur.size());
    const int m = SymMatrix::packed_size(d);
    const int p = static_cast<int>(prob.constraints.size());
    Eigen::MatrixXd stacked(m + 1, p);
    double bscale = 1.0;
    for (int l = 0; l < p; ++l) {
      int c = 0;
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j, ++c)
          stacked(c, l) = prob.constraints[l].first(cur[i], cur[j]);
      bscale = std::max(bscale, std::abs(prob.constraints[l].second));
    }
    const double beta = std::max(1.0, stacked.topRows(m).norm()) / bscale;
    for (int l = 0; l < p; ++l) stacked(m, l) = beta * prob.constraints[l].second;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(stacked);
    SymMatrix probe(d);
    auto forced = [&](int i, int j) {
      Eigen::VectorXd tau = Eigen::VectorXd::Zero(m + 1);
      tau[probe.index(i, i)] = 1.0;
      if (j >= 0) tau[probe.index(j, j)] += 1.0;
      const Eigen::VectorXd alpha = qr.solve(tau);
      return (stacked * alpha - tau).norm() <= 1e-9 * (1.0 + tau.norm());
    };
    std::vector<char> drop(d, 0);
    for (int i = 0; i < d && static_cast<int>(cur.size()) > prob.cone.k; ++i)
      if (!drop[i] && forced(i, -1)) drop[i] = 1;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        if (!drop[i] && !drop[j] && forced(i, j)) drop[i] = drop[j] = 1;
    std::vector<int> next;
    for (int i = 0; i < d; ++i)
      if (!drop[i]) next.push_back(cur[i]);
    if (next.size() == cur.size()) break;
    if (static_cast<int>(next.size()) < prob.cone.k) break;  // cannot reduce below k
    for (int i = 0; i < d; ++i)
      if (drop[i]) out.dropped.push_back(cur[i]);
    cur = std::move(next);
    out.changed = true;
  }
  out.survivors = cur;
  std::sort(out.dropped.begin(), out.dropped.end());
  return out;
}

inline SymMatrix z_from_multipliers(const StandardProblem& prob, const std::vector<double>& y) {
  SymMatrix z = prob.A0;
  for (size_t i = 0; i < prob.constraints.size(); ++i)
    z -= y[i] * prob.constraints[i].first;
  return z;
}

}  // namespace detail_solver

namespace detail_solver {

/// Core path-following solve (no facial presolve).
/// Primal side: families psd and soc, variables are the decomposition
/// blocks. Dual side: the truncation-intersection constraints directly.
inline Solution solve_standard_core(const StandardProblem& prob, const SolveOptions& opts) {
  prob.cone.validate();
  const ConeSpec& spec = prob.cone;
  if (spec.family != ConeFamily::Psd && spec.family != ConeFamily::Soc)
    throw InputError("solve: supported families are psd and soc");
  if (prob.A0.dim() != spec.d) throw InputError("solve: A0 dim != cone dim");
  for (const auto& [a, b] : prob.constraints)
    if (a.dim() != spec.d) throw InputError("solve: constraint dim != cone dim");
  if (spec.J.size() > tol::tuple_cap && !opts.force_size)
    throw InputError("solve: |J| exceeds the size cap; use force_size");

  const int p = static_cast<int>(prob.constraints.size());
  const bool primal = prob.side == ProblemSide::PrimalCone;
  const bool soc = spec.family == ConeFamily::Soc;

  ipm::Program prog;
  Eigen::MatrixXd rawG;
  Eigen::VectorXd rawh(p);
  for (int i = 0; i < p; ++i) rawh[i] = prob.constraints[i].second;

  std::vector<int> diag_vars;  // dual-soc: ambient index per variable
  if (primal) {
    const int nt = spec.J.size();
    const int bk = soc ? spec.k : SymMatrix::packed_size(spec.k);
    prog.nvars = nt * bk;
    prog.c = Eigen::VectorXd::Zero(prog.nvars);
    rawG = Eigen::MatrixXd::Zero(p, prog.nvars);
    for (int s = 0; s < nt; ++s) {
      const IndexTuple& t = spec.J.tuples[s];
      ipm::Block b;
      b.kind = soc ? ipm::BlockKind::Soc : ipm::BlockKind::PsdPacked;
      b.dim = spec.k;
      b.cols.resize(bk);
      for (int c = 0; c < bk; ++c) b.cols[c] = s * bk + c;
      prog.blocks.push_back(std::move(b));
      if (soc) {
        for (int c = 0; c < spec.k; ++c) {
          const int amb = t.zero_based(c);
          prog.c[s * bk + c] += prob.A0(amb, amb);
          for (int i = 0; i < p; ++i) rawG(i, s * bk + c) += prob.constraints[i].first(amb, amb);
        }
      } else {
        int c = 0;
        for (int pp = 0; pp < spec.k; ++pp)
          for (int qq = pp; qq < spec.k; ++qq, ++c) {
            const double kap = pp == qq ? 1.0 : 2.0;
            const int ia = t.zero_based(pp), ja = t.zero_based(qq);
            prog.c[s * bk + c] += kap * prob.A0(ia, ja);
            for (int i = 0; i < p; ++i)
              rawG(i, s * bk + c) += kap * prob.constraints[i].first(ia, ja);
          }
      }
    }
  } else {
    // dual side: variable is X itself (its diagonal for the soc family)
    if (soc) {
      prog.nvars = spec.d;
      diag_vars.resize(spec.d);
      for (int i = 0; i < spec.d; ++i) diag_vars[i] = i;
      prog.c = Eigen::VectorXd::Zero(spec.d);
      rawG = Eigen::MatrixXd::Zero(p, spec.d);
      for (int i = 0; i < spec.d; ++i) {
        prog.c[i] = prob.A0(i, i);
        for (int r = 0; r < p; ++r) rawG(r, i) = prob.constraints[r].first(i, i);
      }
      for (const auto& t : spec.J.tuples) {
        ipm::Block b;
        b.kind = ipm::BlockKind::Soc;
        b.dim = spec.k;
        b.cols.resize(spec.k);
        for (int c = 0; c < spec.k; ++c) b.cols[c] = t.zero_based(c);
        prog.blocks.push_back(std::move(b));
      }
    } else {
      const int n = SymMatrix::packed_size(spec.d);
      prog.nvars = n;
      prog.c = Eigen::VectorXd::Zero(n);
      rawG = Eigen::MatrixXd::Zero(p, n);
      SymMatrix probe(spec.d);
      int c = 0;
      for (int i = 0; i < spec.d; ++i)
        for (int j = i; j < spec.d; ++j, ++c) {
          const double kap = i == j ? 1.0 : 2.0;
          prog.c[c] = kap * prob.A0(i, j);
          for (int r = 0; r < p; ++r) rawG(r, c) = kap * prob.constraints[r].first(i, j);
        }
      for (const auto& t : spec.J.tuples) {
        ipm::Block b;
        b.kind = ipm::BlockKind::PsdPacked;
        b.dim = spec.k;
        b.cols.resize(SymMatrix::packed_size(spec.k));
        int cc = 0;
        for (int pp = 0; pp < spec.k; ++pp)
          for (int qq = pp; qq < spec.k; ++qq, ++cc)
            b.cols[cc] = probe.index(t.zero_based(pp), t.zero_based(qq));
        prog.blocks.push_back(std::move(b));
      }
    }
  }

  auto rows = detail_solver::filter_rows(rawG, rawh);
  Solution sol;
  if (rows.inconsistent_zero_row) {
    sol.status = SolveStatus::Infeasible;
    sol.message = "a constraint is unsupported by the cone pattern";
    return sol;
  }
  prog.G = rows.G;
  prog.h = rows.h;

  auto res = ipm::solve(prog, opts.ipm());
  sol.status = detail_solver::map_status(res.status);
  sol.iterations = res.newton_iterations;
  sol.message = res.message;
  sol.gap_estimate = res.gap_estimate;
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::MaxIter) return sol;

  sol.y = detail_solver::expand_multipliers(res.y, rows.kept, p);
  if (primal) {
    const int bk = soc ? spec.k : SymMatrix::packed_size(spec.k);
    Decomposition dec;
    dec.d = spec.d;
    for (int s = 0; s < spec.J.size(); ++s) {
      SymMatrix m(spec.k);
      if (soc) {
        for (int c = 0; c < spec.k; ++c) m.at(c, c) = res.v[s * bk + c];
      } else {
        int c = 0;
        for (int pp = 0; pp < spec.k; ++pp)
          for (int qq = pp; qq < spec.k; ++qq, ++c) m.at(pp, qq) = res.v[s * bk + c];
      }
      dec.blocks.emplace_back(spec.J.tuples[s], std::move(m));
    }
    sol.X = dec.assemble();
    sol.decomposition = std::move(dec);
  } else {
    if (soc) {
      std::vector<double> diag(spec.d);
      for (int i = 0; i < spec.d; ++i) diag[i] = res.v[i];
      sol.X = SymMatrix::diag(diag);
    } else {
      SymMatrix x(spec.d);
      x.upper().assign(res.v.data(), res.v.data() + res.v.size());
      sol.X = x;
    }
    // dual-slack witness: Z = -(grad f)/t = sum lift(T_s(X)^-1)/t
    if (res.t_final > 0) {
      Decomposition zdec;
      zdec.d = spec.d;
      for (const auto& t : spec.J.tuples) {
        const SymMatrix tr = truncate(*sol.X, t);
        if (soc) {
          // soc barrier gradient: -(2/r) J u per tuple
          std::vector<double> u(t.size());
          for (int c = 0; c < t.size(); ++c) u[c] = (*sol.X)(t.zero_based(c), t.zero_based(c));
          double r2 = u[0] * u[0];
          for (int c = 1; c < t.size(); ++c) r2 -= u[c] * u[c];
          SymMatrix m(t.size());
          m.at(0, 0) = 2.0 * u[0] / (r2 * res.t_final);
          for (int c = 1; c < t.size(); ++c) m.at(c, c) = 2.0 * u[c] / (r2 * res.t_final);
          zdec.blocks.emplace_back(t, std::move(m));
        } else {
          Eigen::LLT<Eigen::MatrixXd> llt(tr.dense());
          if (llt.info() == Eigen::Success) {
            const Eigen::MatrixXd w =
                llt.solve(Eigen::MatrixXd::Identity(tr.dim(), tr.dim())) / res.t_final;
            zdec.blocks.emplace_back(t, SymMatrix::from_dense(w));
          }
        }
      }
      sol.z_decomposition = std::move(zdec);
    }
  }
  sol.Z = detail_solver::z_from_multipliers(prob, sol.y);
  sol.objective = res.objective;
  detail_solver::promote_stalled(sol);
  return sol;
}

}  // namespace detail_solver

/// Solve with a facial presolve pass: primal psd problems over the full
/// index family first shed diagonal coordinates that the equalities force
/// to zero (the paired one-sided encodings of form conversions produce
/// these), then the reduced Slater-regular problem is solved and inflated.
inline Solution solve(const StandardProblem& prob, const SolveOptions& opts = {}) {
  prob.cone.validate();
  const bool eligible = prob.side == ProblemSide::PrimalCone &&
                        prob.cone.family == ConeFamily::Psd && prob.cone.full_J() &&
                        !prob.constraints.empty();
  if (!eligible) return detail_solver::solve_standard_core(prob, opts);

  // reject user-supplied dependent constraint rows up front
  {
    const int p = static_cast<int>(prob.constraints.size());
    const int m = SymMatrix::packed_size(prob.cone.d);
    Eigen::MatrixXd g(p, m);
    Eigen::VectorXd h(p);
    for (int l = 0; l < p; ++l) {
      for (int e = 0; e < m; ++e) g(l, e) = prob.constraints[l].first.upper()[e];
      h[l] = prob.constraints[l].second;
    }
    bool all_zero = true;
    for (int l = 0; l < p && all_zero; ++l)
      if (g.row(l).lpNorm<Eigen::Infinity>() > 1e-14) all_zero = false;
    if (!all_zero) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g.transpose());
      qr.setThreshold(tol::rank_pivot);
      int nonzero = 0;
      for (int l = 0; l < p; ++l)
        if (g.row(l).lpNorm<Eigen::Infinity>() > 1e-14) ++nonzero;
      if (static_cast<int>(qr.rank()) < nonzero)
        throw InputError("solve: equality constraints are linearly dependent");
    }
  }

  const auto pres = detail_solver::presolve_forced_zeros(prob);
  if (!pres.changed) return detail_solver::solve_standard_core(prob, opts);

  const int ds = static_cast<int>(pres.survivors.size());
  StandardProblem red;
  red.cone = ConeSpec::psd(ds, prob.cone.k, opts.force_size);
  red.side = ProblemSide::PrimalCone;
  auto restrict_to = [&](const SymMatrix& a) {
    SymMatrix out(ds);
    for (int i = 0; i < ds; ++i)
      for (int j = i; j < ds; ++j) out.at(i, j) = a(pres.survivors[i], pres.survivors[j]);
    return out;
  };
  red.A0 = restrict_to(prob.A0);
  const int p = static_cast<int>(prob.constraints.size());
  Eigen::MatrixXd gall(p, SymMatrix::packed_size(ds));
  Eigen::VectorXd hall(p);
  std::vector<SymMatrix> ra;
  ra.reserve(p);
  for (int l = 0; l < p; ++l) {
    ra.push_back(restrict_to(prob.constraints[l].first));
    for (int e = 0; e < SymMatrix::packed_size(ds); ++e) gall(l, e) = ra.back().upper()[e];
    hall[l] = prob.constraints[l].second;
  }
  auto rr = detail_solver::reduce_rows(gall, hall);
  Solution sol;
  if (rr.infeasible) {
    sol.status = SolveStatus::Infeasible;
    sol.message = "constraints forced onto the zero face are inconsistent";
    return sol;
  }
  for (int i : rr.kept) red.constraints.emplace_back(ra[i], prob.constraints[i].second);

  Solution inner = detail_solver::solve_standard_core(red, opts);
  sol.status = inner.status;
  sol.iterations = inner.iterations;
  sol.gap_estimate = inner.gap_estimate;
  sol.message = inner.message.empty() ? "facial presolve dropped " +
                                            std::to_string(pres.dropped.size()) + " rows"
                                      : inner.message;
  if (!inner.X) return sol;
  SymMatrix xfull(prob.cone.d);
  for (int i = 0; i < ds; ++i)
    for (int j = i; j < ds; ++j)
      xfull.at(pres.survivors[i], pres.survivors[j]) = (*inner.X)(i, j);
  sol.X = xfull;
  sol.objective = inner.objective;
  sol.y.assign(p, 0.0);
  for (size_t i = 0; i < rr.kept.size(); ++i) sol.y[rr.kept[i]] = inner.y[i];
  sol.Z = detail_solver::z_from_multipliers(prob, sol.y);
  if (inner.decomposition) {
    Decomposition dec;
    dec.d = prob.cone.d;
    for (const auto& [t, m] : inner.decomposition->blocks) {
      std::vector<int> idx(t.size());
      for (int q = 0; q < t.size(); ++q) idx[q] = pres.survivors[t.zero_based(q)] + 1;
      dec.blocks.emplace_back(IndexTuple(idx), m);
    }
    sol.decomposition = std::move(dec);
  }
  return sol;
}

/// Plain PSD-cone barrier solve of the same data (X in S+^d directly), the
/// independent route used to cross-check k = d solves.
inline Solution plain_sdp_solve(const StandardProblem& prob, const SolveOptions& opts = {}) {
  StandardProblem full = prob;
  full.cone = ConeSpec::psd(prob.cone.d, prob.cone.d);
  full.side = ProblemSide::DualCone;  // single full truncation = X itself PSD
  return solve(full, opts);
}

// ---------------------------------------------------------------------------
// KKT residuals

inline KKTReport kkt_residuals(const StandardProblem& prob, const Solution& sol) {
  if (!sol.X || !sol.Z) throw InputError("kkt_residuals: solution has no X/Z");
  KKTReport rep;
  const SymMatrix& x = *sol.X;
  const SymMatrix& z = *sol.Z;
  for (size_t i = 0; i < prob.constraints.size(); ++i)
    rep.primal_eq_res = std::max(
        rep.primal_eq_res,
        std::abs(SymMatrix::inner(prob.constraints[i].first, x) - prob.constraints[i].second));
  if (prob.side == ProblemSide::PrimalCone) {
    if (sol.decomposition) {
      const auto chk = verify_decomposition(x, *sol.decomposition, prob.cone);
      rep.primal_cone_margin = chk.min_block_margin;
    } else {
      rep.primal_cone_margin = primal_margin(x, prob.cone).margin;
    }
    rep.dual_cone_margin = dual_membership(z, prob.cone).margin;
  } else {
    rep.primal_cone_margin = dual_membership(x, prob.cone).margin;
    if (sol.z_decomposition) {
      const auto chk = verify_decomposition(z, *sol.z_decomposition, prob.cone);
      rep.dual_cone_margin =
          chk.recon_err <= 1e-6 * psd_scale(z) ? chk.min_block_margin
                                               : primal_margin(z, prob.cone).margin;
    } else {
      rep.dual_cone_margin = primal_margin(z, prob.cone).margin;
    }
  }
  rep.complementarity = std::abs(SymMatrix::inner(z, x));
  SymMatrix resid = prob.A0 - z;
  double by = 0;
  for (size_t i = 0; i < prob.constraints.size(); ++i) {
    resid -= sol.y[i] * prob.constraints[i].first;
    by += sol.y[i] * prob.constraints[i].second;
  }
  rep.dual_eq_res = resid.frobenius();
  rep.gap = std::abs(SymMatrix::inner(prob.A0, x) - by);
  return rep;
}

// ---------------------------------------------------------------------------
// inequality-form solve

inline Solution solve(const InequalityProblem& prob, const SolveOptions& opts = {}) {
  prob.cone.validate();
  const ConeSpec& spec = prob.cone;
  if (spec.family != ConeFamily::Psd)
    throw InputError("solve(inequality): only the psd family is supported");
  const int n = static_cast<int>(prob.q.size());
  if (static_cast<int>(prob.P.size()) != n)
    throw InputError("solve(inequality): |P| must equal |q|");
  if (prob.P0.dim() != spec.d) throw InputError("solve(inequality): P0 dim != cone dim");
  for (const auto& pm : prob.P)
    if (pm.dim() != spec.d) throw InputError("solve(inequality): P_i dim != cone dim");

  const bool primal = prob.side == ProblemSide::PrimalCone;
  ipm::Program prog;
  Eigen::MatrixXd rawG;
  Eigen::VectorXd rawh;

  // facial presolve (primal, full J): a diagonal pair of the LMI whose
  // affine forms cancel identically is forced to zero, together with the
  // rest of its rows
  std::vector<int> surv(spec.d);
  for (int i = 0; i < spec.d; ++i) surv[i] = i;
  Eigen::MatrixXd xrowsG(0, n);
  Eigen::VectorXd xrowsh(0);
  Solution presolved_fail;
  if (primal && spec.full_J()) {
    auto zero_sum = [&](int i, int j) {
      double sc = std::max({1.0, std::abs(prob.P0(i, i)), std::abs(prob.P0(j, j))});
      if (std::abs(prob.P0(i, i) + prob.P0(j, j)) > 1e-12 * sc) return false;
      for (int l = 0; l < n; ++l) {
        sc = std::max({1.0, std::abs(prob.P[l](i, i)), std::abs(prob.P[l](j, j))});
        if (std::abs(prob.P[l](i, i) + prob.P[l](j, j)) > 1e-12 * sc) return false;
      }
      return true;
    };
    std::vector<char> drop(spec.d, 0);
    int room = spec.d - spec.k;
    for (int i = 0; i < spec.d && room > 0; ++i)
      if (!drop[i] && zero_sum(i, i)) {
        drop[i] = 1;
        --room;
      }
    for (int i = 0; i < spec.d; ++i)
      for (int j = i + 1; j < spec.d && room > 1; ++j)
        if (!drop[i] && !drop[j] && zero_sum(i, j)) {
          drop[i] = drop[j] = 1;
          room -= 2;
        }
    std::vector<int> dropped;
    surv.clear();
    for (int i = 0; i < spec.d; ++i) (drop[i] ? dropped : surv).push_back(i);
    if (!dropped.empty()) {
      std::vector<Eigen::VectorXd> rows;
      std::vector<double> rhs;
      for (int i : dropped)
        for (int j = 0; j < spec.d; ++j) {
          const int a = std::min(i, j), b = std::max(i, j);
          Eigen::VectorXd row(n);
          for (int l = 0; l < n; ++l) row[l] = prob.P[l](a, b);
          if (row.lpNorm<Eigen::Infinity>() <= 1e-14) {
            if (std::abs(prob.P0(a, b)) > 1e-12) {
              presolved_fail.status = SolveStatus::Infeasible;
              presolved_fail.message = "the LMI pins a forced-zero entry to a nonzero value";
              return presolved_fail;
            }
            continue;
          }
          rows.push_back(row);
          rhs.push_back(-prob.P0(a, b));
        }
      Eigen::MatrixXd g(rows.size(), n);
      Eigen::VectorXd h(rows.size());
      for (size_t r = 0; r < rows.size(); ++r) {
        g.row(static_cast<int>(r)) = rows[r];
        h[static_cast<int>(r)] = rhs[r];
      }
      auto rr = detail_solver::reduce_rows(g, h);
      if (rr.infeasible) {
        presolved_fail.status = SolveStatus::Infeasible;
        presolved_fail.message = "forced-zero rows of the LMI are inconsistent";
        return presolved_fail;
      }
      xrowsG = rr.G;
      xrowsh = rr.h;
    }
  }
  const int ds = static_cast<int>(surv.size());
  const int m = SymMatrix::packed_size(ds);
  const IndexFamily jsurv =
      primal ? enumerate_tuples(ds, spec.k, IndexMap::Full, true) : spec.J;

  if (primal) {
    const int bk = SymMatrix::packed_size(spec.k);
    const int nt = jsurv.size();
    prog.nvars = n + nt * bk;
    prog.c = Eigen::VectorXd::Zero(prog.nvars);
    for (int i = 0; i < n; ++i) prog.c[i] = prob.q[i];
    // entry equations: sum_s lift(M_s)[e] - sum_l x_l P_l[e] = P0[e]
    const int nx = static_cast<int>(xrowsG.rows());
    rawG = Eigen::MatrixXd::Zero(m + nx, prog.nvars);
    rawh = Eigen::VectorXd::Zero(m + nx);
    SymMatrix probe(ds);
    int e = 0;
    for (int i = 0; i < ds; ++i)
      for (int j = i; j < ds; ++j, ++e) {
        rawh[e] = prob.P0(surv[i], surv[j]);
        for (int l = 0; l < n; ++l) rawG(e, l) = -prob.P[l](surv[i], surv[j]);
      }
    for (int r = 0; r < nx; ++r) {
      rawG.row(m + r).head(n) = xrowsG.row(r);
      rawh[m + r] = xrowsh[r];
    }
    for (int s = 0; s < nt; ++s) {
      const IndexTuple& t = jsurv.tuples[s];
      ipm::Block b;
      b.kind = ipm::BlockKind::PsdPacked;
      b.dim = spec.k;
      b.cols.resize(bk);
      for (int c = 0; c < bk; ++c) b.cols[c] = n + s * bk + c;
      prog.blocks.push_back(std::move(b));
      int c = 0;
      for (int pp = 0; pp < spec.k; ++pp)
        for (int qq = pp; qq < spec.k; ++qq, ++c)
          rawG(probe.index(t.zero_based(pp), t.zero_based(qq)), n + s * bk + c) += 1.0;
    }
  } else {
    prog.nvars = n;
    prog.c = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) prog.c[i] = prob.q[i];
    rawG.resize(0, n);
    rawh.resize(0);
    // affine truncation blocks of P0 + sum x_l P_l
    for (const auto& t : spec.J.tuples) {
      const int bk = SymMatrix::packed_size(spec.k);
      ipm::Block b;
      b.kind = ipm::BlockKind::PsdPacked;
      b.dim = spec.k;
      b.cols.resize(n);
      for (int i = 0; i < n; ++i) b.cols[i] = i;
      b.map = Eigen::MatrixXd::Zero(bk, n);
      b.offset = Eigen::VectorXd::Zero(bk);
      int c = 0;
      for (int pp = 0; pp < spec.k; ++pp)
        for (int qq = pp; qq < spec.k; ++qq, ++c) {
          b.offset[c] = prob.P0(t.zero_based(pp), t.zero_based(qq));
          for (int l = 0; l < n; ++l) b.map(c, l) = prob.P[l](t.zero_based(pp), t.zero_based(qq));
        }
      prog.blocks.push_back(std::move(b));
    }
  }

  auto rows = detail_solver::filter_rows(rawG, rawh);
  Solution sol;
  if (rows.inconsistent_zero_row) {
    sol.status = SolveStatus::Infeasible;
    sol.message = "the LMI forces an entry no variable reaches";
    return sol;
  }
  prog.G = rows.G;
  prog.h = rows.h;

  auto res = ipm::solve(prog, opts.ipm());
  sol.status = detail_solver::map_status(res.status);
  sol.iterations = res.newton_iterations;
  sol.message = res.message;
  sol.gap_estimate = res.gap_estimate;
  if (sol.status != SolveStatus::Optimal && sol.status != SolveStatus::MaxIter) return sol;

  sol.y.assign(res.v.data(), res.v.data() + n);  // the x variables
  SymMatrix lmi = prob.P0;
  for (int l = 0; l < n; ++l) lmi += sol.y[l] * prob.P[l];
  sol.X = lmi;
  sol.objective = res.objective;
  if (primal) {
    const int bk = SymMatrix::packed_size(spec.k);
    Decomposition dec;
    dec.d = spec.d;
    for (int s = 0; s < jsurv.size(); ++s) {
      SymMatrix blk(spec.k);
      int c = 0;
      for (int pp = 0; pp < spec.k; ++pp)
        for (int qq = pp; qq < spec.k; ++qq, ++c) blk.at(pp, qq) = res.v[n + s * bk + c];
      std::vector<int> idx(jsurv.tuples[s].size());
      for (int q = 0; q < jsurv.tuples[s].size(); ++q)
        idx[q] = surv[jsurv.tuples[s].zero_based(q)] + 1;
      dec.blocks.emplace_back(IndexTuple(idx), std::move(blk));
    }
    sol.decomposition = std::move(dec);
    // dual multiplier matrix from the entry-equation multipliers
    if (res.t_final > 0 && !rows.kept.empty()) {
      SymMatrix z(spec.d);
      std::vector<double> w = detail_solver::expand_multipliers(
          Eigen::VectorXd(res.y), rows.kept, static_cast<int>(rawG.rows()));
      int e = 0;
      for (int i = 0; i < ds; ++i)
        for (int j = i; j < ds; ++j, ++e)
          z.at(surv[i], surv[j]) = w[e] / (i == j ? 1.0 : 2.0);
      sol.Z = z;
    }
  }
  detail_solver::promote_stalled(sol);
  return sol;
}

// ---------------------------------------------------------------------------
// standard <-> inequality conversion (psd family, full J, primal side)

namespace detail_solver {

inline void require_convertible(const ConeSpec& spec, ProblemSide side) {
  if (spec.family != ConeFamily::Psd)
    throw InputError("form conversion: only the psd family is supported");
  if (side != ProblemSide::PrimalCone)
    throw InputError("form conversion: only primal-cone problems are supported");
  if (!spec.full_J())
    throw InputError("form conversion: requires the full index family");
}

}  // namespace detail_solver

/// Standard -> inequality: x carries the packed entries of X; equalities
/// become paired one-sided diagonal blocks stacked with X in one LMI over
/// (S+^{2p'+d})_k, p' = max(p, k) with constraints repeated as needed.
inline InequalityProblem convert_standard_to_inequality(const StandardProblem& prob,
                                                        bool force_size = false) {
  detail_solver::require_convertible(prob.cone, prob.side);
  const int d = prob.cone.d;
  const int k = prob.cone.k;
  const int p = static_cast<int>(prob.constraints.size());
  const int m = SymMatrix::packed_size(d);
  const int pp = p == 0 ? 0 : std::max(p, k);
  const int bigd = 2 * pp + d;
  InequalityProblem out;
  out.cone = ConeSpec::psd(bigd, k, force_size);
  out.side = ProblemSide::PrimalCone;
  out.q.resize(m);
  out.P0 = SymMatrix(bigd);
  out.P.assign(m, SymMatrix(bigd));
  SymMatrix probe(d);
  for (int l = 0; l < pp; ++l) {
    const auto& [al, bl] = prob.constraints[l % p];
    out.P0.at(l, l) = -bl;
    out.P0.at(pp + l, pp + l) = bl;
  }
  int e = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++e) {
      const double kap = i == j ? 1.0 : 2.0;
      out.q[e] = kap * prob.A0(i, j);
      SymMatrix& pe = out.P[e];
      for (int l = 0; l < pp; ++l) {
        const double coef = kap * prob.constraints[l % p].first(i, j);
        pe.at(l, l) = coef;
        pe.at(pp + l, pp + l) = -coef;
      }
      pe.at(2 * pp + i, 2 * pp + j) = 1.0;
    }
  return out;
}

/// Inequality -> standard: block variable diag(diag(x+), diag(x-), Xbar)
/// with entry-matching and zero-pinning equalities. Free variables are
/// split as x = x+ - x-; n' = max(n, k) slots with the padding pinned to 0.
inline StandardProblem convert_inequality_to_standard(const InequalityProblem& prob,
                                                      bool force_size = false) {
  detail_solver::require_convertible(prob.cone, prob.side);
  const int d = prob.cone.d;
  const int k = prob.cone.k;
  const int n = static_cast<int>(prob.q.size());
  const int np = std::max(n, k);
  const int bigd = 2 * np + d;
  StandardProblem out;
  out.cone = ConeSpec::psd(bigd, k, force_size);
  out.side = ProblemSide::PrimalCone;
  out.A0 = SymMatrix(bigd);
  for (int l = 0; l < n; ++l) {
    out.A0.at(l, l) = prob.q[l];
    out.A0.at(np + l, np + l) = -prob.q[l];
  }
  // LMI entry matching: Xbar_ij - sum_l (P_l)_ij (x+_l - x-_l) = (P0)_ij
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      SymMatrix a(bigd);
      a.at(2 * np + i, 2 * np + j) = i == j ? 1.0 : 0.5;
      for (int l = 0; l < n; ++l) {
        a.at(l, l) = -prob.P[l](i, j);
        a.at(np + l, np + l) = prob.P[l](i, j);
      }
      out.constraints.emplace_back(std::move(a), prob.P0(i, j));
    }
  // pin everything outside the three diagonal carriers to zero
  for (int i = 0; i < bigd; ++i)
    for (int j = i + 1; j < bigd; ++j) {
      if (i >= 2 * np && j >= 2 * np) continue;  // Xbar block stays free
      SymMatrix a(bigd);
      a.at(i, j) = 0.5;
      out.constraints.emplace_back(std::move(a), 0.0);
    }
  // pin padded x slots to zero
  for (int l = n; l < np; ++l) {
    SymMatrix a1(bigd);
    a1.at(l, l) = 1.0;
    out.constraints.emplace_back(std::move(a1), 0.0);
    SymMatrix a2(bigd);
    a2.at(np + l, np + l) = 1.0;
    out.constraints.emplace_back(std::move(a2), 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SOCP -> SDD cast

/// min a'x s.t. ||A_i x + b_i|| <= c_i'x + d_i, Bx = e.
struct SocpProblem {
  std::vector<double> objective;
  struct Constraint {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    double d = 0;
  };
  std::vector<Constraint> constraints;
  Eigen::MatrixXd B;  // may be 0 x n
  Eigen::VectorXd e;
};

/// Casts the SOCP into an inequality-form program over (S+^M)_2: one arrow
/// (Schur-complement) block per SOC constraint plus paired diagonal blocks
/// for the equalities, stacked block-diagonally.
inline InequalityProblem socp_to_sdd(const SocpProblem& socp, bool force_size = false) {
  const int n = static_cast<int>(socp.objective.size());
  const int pe = static_cast<int>(socp.B.rows());
  if (pe > 0 && socp.B.cols() != n) throw InputError("socp_to_sdd: B has wrong width");
  const int pep = pe == 0 ? 0 : std::max(pe, 2);
  int bigd = 2 * pep;
  std::vector<int> arrow_base;
  for (const auto& con : socp.constraints) {
    if (con.A.rows() != con.b.size() || (con.A.size() > 0 && con.A.cols() != n) ||
        con.c.size() != n)
      throw InputError("socp_to_sdd: inconsistent SOC constraint shapes");
    arrow_base.push_back(bigd);
    bigd += static_cast<int>(con.b.size()) + 1;
  }
  InequalityProblem out;
  out.cone = ConeSpec::psd(bigd, 2, force_size);
  out.side = ProblemSide::PrimalCone;
  out.q = socp.objective;
  out.P0 = SymMatrix(bigd);
  out.P.assign(n, SymMatrix(bigd));
  for (int l = 0; l < pep; ++l) {
    const int r = l % std::max(pe, 1);
    out.P0.at(l, l) = -socp.e[r];
    out.P0.at(pep + l, pep + l) = socp.e[r];
    for (int j = 0; j < n; ++j) {
      out.P[j].at(l, l) = socp.B(r, j);
      out.P[j].at(pep + l, pep + l) = -socp.B(r, j);
    }
  }
  for (size_t ci = 0; ci < socp.constraints.size(); ++ci) {
    const auto& con = socp.constraints[ci];
    const int mb = static_cast<int>(con.b.size());
    const int base = arrow_base[ci];
    for (int r = 0; r < mb; ++r) {
      out.P0.at(base + r, base + r) = con.d;
      out.P0.at(base + r, base + mb) = con.b[r];
    }
    out.P0.at(base + mb, base + mb) = con.d;
    for (int j = 0; j < n; ++j) {
      for (int r = 0; r < mb; ++r) {
        out.P[j].at(base + r, base + r) = con.c[j];
        if (con.A.size() > 0) out.P[j].at(base + r, base + mb) = con.A(r, j);
      }
      out.P[j].at(base + mb, base + mb) = con.c[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// hierarchy scan

struct ScanEntry {
  int k = 0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

struct ScanReport {
  std::vector<ScanEntry> entries;
  bool monotone = true;        // nonincreasing objectives over solved orders
  double worst_violation = 0;  // beyond 1e-6 flags a solver fault
  bool chain_warning = false;  // custom chain failed the nesting condition
};

/// Solves the problem at each order k in [kmin, kmax] with the full index
/// map of its family (or a supplied custom chain, which is verified against
/// the nested-cones condition and flagged when it fails).
inline ScanReport hierarchy_scan(const StandardProblem& prob, int kmin, int kmax,
                                 const SolveOptions& opts = {},
                                 const std::vector<IndexFamily>& custom_chain = {}) {
  if (prob.side != ProblemSide::PrimalCone)
    throw InputError("hierarchy_scan: primal-cone problems only");
  if (kmin < 1 || kmax > prob.cone.d || kmin > kmax)
    throw InputError("hierarchy_scan: bad k range");
  ScanReport rep;
  if (!custom_chain.empty()) {
    if (static_cast<int>(custom_chain.size()) != kmax - kmin + 1)
      throw InputError("hierarchy_scan: chain length mismatch");
    for (size_t i = 0; i + 1 < custom_chain.size(); ++i)
      if (!nesting_chain_condition(custom_chain[i], custom_chain[i + 1]))
        rep.chain_warning = true;
  }
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int k = kmin; k <= kmax; ++k) {
    StandardProblem pk = prob;
    if (!custom_chain.empty()) {
      pk.cone = ConeSpec::psd_custom(prob.cone.d, k, custom_chain[k - kmin]);
    } else if (prob.cone.family == ConeFamily::Soc) {
      pk.cone = ConeSpec::soc(prob.cone.d, k, opts.force_size);
    } else {
      pk.cone = ConeSpec::psd(prob.cone.d, k, opts.force_size);
    }
    ScanEntry entry;
    entry.k = k;
    try {
      const Solution s = solve(pk, opts);
      entry.status = s.status;
      entry.objective = s.objective;
    } catch (const Error&) {
      entry.status = SolveStatus::NumericalFailure;
    }
    if (entry.status == SolveStatus::Optimal && !std::isnan(prev)) {
      const double viol = entry.objective - prev;
      if (viol > 1e-6 * std::max(1.0, std::abs(prev))) {
        rep.monotone = false;
        rep.worst_violation = std::max(rep.worst_violation, viol);
      }
    }
    if (entry.status == SolveStatus::Optimal) prev = entry.objective;
    rep.entries.push_back(entry);
  }
  return rep;
}

}  // namespace kocp
