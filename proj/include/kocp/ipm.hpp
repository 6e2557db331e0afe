#pragma once

// Equality-constrained path-following barrier method over products of
// PSD / second-order / nonnegative blocks, each an affine image of the
// decision vector. One engine serves every program this library builds:
// block-decomposition (primal) forms, truncation-intersection (dual)
// forms, phase-I slack programs and membership margins.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kocp/detail/block_barriers.hpp"
#include "kocp/errors.hpp"
#include "kocp/tolerances.hpp"

namespace kocp::ipm {

enum class BlockKind { PsdPacked, Soc, Nonneg };

/// One cone block, constrained as: offset + map * v[cols] in cone.
/// An empty map means the identity slice (block coords = v[cols]).
struct Block {
  BlockKind kind = BlockKind::PsdPacked;
  int dim = 0;  // matrix dim for PsdPacked, vector length otherwise
  std::vector<int> cols;
  Eigen::MatrixXd map;     // coord_count x cols.size() when present
  Eigen::VectorXd offset;  // coord_count when present

  int coord_count() const {
    return kind == BlockKind::PsdPacked ? detail::packed_size(dim) : dim;
  }
  double theta() const {
    switch (kind) {
      case BlockKind::PsdPacked: return dim;
      case BlockKind::Soc: return dim >= 2 ? 2.0 : 1.0;
      case BlockKind::Nonneg: return dim;
    }
    return 0;
  }
  bool is_slice() const { return map.size() == 0; }
};

struct Program {
  int nvars = 0;
  Eigen::VectorXd c;
  Eigen::MatrixXd G;  // p x nvars; p may be 0
  Eigen::VectorXd h;
  std::vector<Block> blocks;

  double barrier_parameter() const {
    double nu = 0;
    for (const auto& b : blocks) nu += b.theta();
    return nu;
  }
};

struct Options {
  double tol = 1e-8;          // duality-gap target, relative to 1 + |objective|
  int max_outer = 200;
  double mu_factor = 10.0;
  double center_tol = 1e-10;  // Newton decrement threshold per center
  int max_newton = 200;
  double reg = 1e-12;
  double feas_tol = 1e-8;
  // below this KKT dimension the full augmented system is factored directly
  // (better conditioned); above it, private block variables are eliminated
  int kkt_dense_threshold = 400;
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIter, NumericalFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::MaxIter: return "max-iter";
    case Status::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

struct Result {
  Status status = Status::NumericalFailure;
  Eigen::VectorXd v;
  Eigen::VectorXd y;  // multipliers for Gv = h
  double objective = std::numeric_limits<double>::quiet_NaN();
  int newton_iterations = 0;
  int outer_iterations = 0;
  double gap_estimate = std::numeric_limits<double>::quiet_NaN();
  double t_final = 0;  // last path parameter
  std::string message;
};

namespace detail_ipm {

using kocp::detail::BarrierEval;

inline Eigen::VectorXd block_input(const Block& b, const Eigen::VectorXd& v) {
  Eigen::VectorXd loc(b.cols.size());
  for (size_t i = 0; i < b.cols.size(); ++i) loc[static_cast<int>(i)] = v[b.cols[i]];
  if (b.is_slice()) {
    if (b.offset.size()) return b.offset + loc;
    return loc;
  }
  Eigen::VectorXd u = b.map * loc;
  if (b.offset.size()) u += b.offset;
  return u;
}

inline BarrierEval eval_block_from(const Block& b, const Eigen::VectorXd& u, bool want_hess) {
  switch (b.kind) {
    case BlockKind::PsdPacked: return kocp::detail::psd_packed_barrier(b.dim, u, want_hess);
    case BlockKind::Soc:
      return b.dim >= 2 ? kocp::detail::soc_barrier(u, want_hess)
                        : kocp::detail::nonneg_barrier(u, want_hess);
    case BlockKind::Nonneg: return kocp::detail::nonneg_barrier(u, want_hess);
  }
  return {};
}

inline BarrierEval eval_block(const Block& b, const Eigen::VectorXd& v, bool want_hess) {
  return eval_block_from(b, block_input(b, v), want_hess);
}

inline bool strictly_feasible(const Program& prog, const Eigen::VectorXd& v) {
  for (const auto& b : prog.blocks)
    if (!eval_block(b, v, false).interior) return false;
  return true;
}

/// KKT system [H G'; G 0] with H = reg*I + sum_j D_j' hess_j D_j, solved by
/// eliminating variables private to a single block, then factoring the
/// reduced (shared + multipliers) saddle system.
class KktContext {
 public:
  KktContext(const Program& prog, const Options& opts) : prog_(prog), opts_(opts) {
    const int n = prog.nvars;
    std::vector<int> touch(n, 0);
    for (const auto& b : prog.blocks)
      for (int c : b.cols) touch[c]++;
    owner_.assign(n, -1);
    const bool eliminate = n + prog.G.rows() > opts.kkt_dense_threshold;
    if (eliminate)
      for (size_t j = 0; j < prog.blocks.size(); ++j)
        for (int c : prog.blocks[j].cols)
          if (touch[c] == 1) owner_[c] = static_cast<int>(j);
    shared_index_.assign(n, -1);
    for (int c = 0; c < n; ++c)
      if (owner_[c] < 0) {
        shared_index_[c] = ns_;
        shared_cols_.push_back(c);
        ++ns_;
      }
    priv_.resize(prog.blocks.size());
    closed_.assign(prog.blocks.size(), false);
    for (size_t j = 0; j < prog.blocks.size(); ++j) {
      const Block& b = prog.blocks[j];
      for (size_t i = 0; i < b.cols.size(); ++i)
        if (owner_[b.cols[i]] == static_cast<int>(j))
          priv_[j].push_back(static_cast<int>(i));  // local position
      // closed-form elimination applies when the private columns map onto
      // the full block coordinate space as the identity
      const int cc = b.coord_count();
      if (static_cast<int>(priv_[j].size()) == cc) {
        bool ident = true;
        if (b.is_slice()) {
          for (int i = 0; i < cc && ident; ++i) ident = priv_[j][i] == i;
        } else {
          for (int i = 0; i < cc && ident; ++i) {
            Eigen::VectorXd col = b.map.col(priv_[j][i]);
            col[i] -= 1.0;
            ident = col.lpNorm<Eigen::Infinity>() == 0.0;
          }
        }
        closed_[j] = ident;
      }
    }
  }

  /// Applies the exact inverse block Hessian (log-det / SOC / nonneg all
  /// have stable closed forms) to each column of r.
  Eigen::MatrixXd inv_hess_apply(size_t j, const Eigen::MatrixXd& r) const {
    const Block& b = prog_.blocks[j];
    Eigen::MatrixXd out(r.rows(), r.cols());
    switch (b.kind) {
      case BlockKind::PsdPacked: {
        const Eigen::MatrixXd& m = inv_m_[j];
        const int k = b.dim;
        for (int c = 0; c < r.cols(); ++c) {
          Eigen::VectorXd x = r.col(c);
          int off = 0;
          for (int i = 0; i < k; ++i)
            for (int jj = i; jj < k; ++jj, ++off)
              if (i != jj) x[off] *= 0.5;
          out.col(c) = kocp::detail::pack_sym(m * kocp::detail::unpack_sym(k, x) * m);
        }
        break;
      }
      case BlockKind::Soc: {
        if (b.dim < 2) {
          out = inv_u_[j].cwiseProduct(inv_u_[j]).asDiagonal() * r;
          break;
        }
        const Eigen::VectorXd& u = inv_u_[j];
        const double rr = inv_r_[j];
        for (int c = 0; c < r.cols(); ++c) {
          Eigen::VectorXd x = r.col(c);
          Eigen::VectorXd jx = x;
          jx.tail(b.dim - 1) *= -1.0;
          out.col(c) = -(rr / 2.0) * jx + u * u.dot(x);
        }
        break;
      }
      case BlockKind::Nonneg:
        out = inv_u_[j].cwiseProduct(inv_u_[j]).asDiagonal() * r;
        break;
    }
    return out;
  }

  Eigen::MatrixXd app_solve(size_t j, const Eigen::MatrixXd& r) const {
    if (closed_[j]) return inv_hess_apply(j, r);
    return app_[j].solve(r);
  }

  /// Refactors from fresh block Hessians. Returns false on breakdown.
  bool factor(const std::vector<BarrierEval>& evals, const std::vector<Eigen::VectorXd>& inputs) {
    const int n = prog_.nvars;
    const int p = static_cast<int>(prog_.G.rows());
    hloc_.resize(prog_.blocks.size());
    app_.resize(prog_.blocks.size());
    u_.resize(prog_.blocks.size());
    inv_m_.resize(prog_.blocks.size());
    inv_u_.resize(prog_.blocks.size());
    inv_r_.assign(prog_.blocks.size(), 0.0);
    red_ = Eigen::MatrixXd::Zero(ns_ + p, ns_ + p);
    for (int i = 0; i < ns_; ++i) red_(i, i) = opts_.reg;
    for (int r = 0; r < p; ++r)
      for (int i = 0; i < ns_; ++i) {
        red_(ns_ + r, i) = prog_.G(r, shared_cols_[i]);
        red_(i, ns_ + r) = red_(ns_ + r, i);
      }

    for (size_t j = 0; j < prog_.blocks.size(); ++j) {
      const Block& b = prog_.blocks[j];
      const Eigen::MatrixXd& hu = evals[j].hess;
      Eigen::MatrixXd hl = b.is_slice() ? hu : Eigen::MatrixXd(b.map.transpose() * hu * b.map);
      hloc_[j] = hl;
      const auto& pv = priv_[j];
      const int np = static_cast<int>(pv.size());
      const int nl = static_cast<int>(b.cols.size());
      // shared (local) positions of this block
      std::vector<int> shl;
      for (int i = 0; i < nl; ++i)
        if (owner_[b.cols[i]] != static_cast<int>(j)) shl.push_back(i);
      // scatter shared x shared directly into the reduced matrix
      for (size_t a = 0; a < shl.size(); ++a) {
        const int ga = shared_index_[b.cols[shl[a]]];
        for (size_t c = 0; c < shl.size(); ++c)
          red_(ga, shared_index_[b.cols[shl[c]]]) += hl(shl[a], shl[c]);
      }
      if (np == 0) continue;
      if (closed_[j]) {
        switch (b.kind) {
          case BlockKind::PsdPacked:
            inv_m_[j] = kocp::detail::unpack_sym(b.dim, inputs[j]);
            break;
          case BlockKind::Soc:
            inv_u_[j] = inputs[j];
            if (b.dim >= 2)
              inv_r_[j] = inputs[j][0] * inputs[j][0] - inputs[j].tail(b.dim - 1).squaredNorm();
            break;
          case BlockKind::Nonneg: inv_u_[j] = inputs[j]; break;
        }
      } else {
        Eigen::MatrixXd app(np, np);
        for (int a = 0; a < np; ++a)
          for (int c = 0; c < np; ++c) app(a, c) = hl(pv[a], pv[c]);
        app.diagonal().array() += opts_.reg;
        app_[j].compute(app);
        if (app_[j].info() != Eigen::Success) return false;
      }
      // U = [H_sp ; G_p] over rows (shared of this block, all multipliers)
      Eigen::MatrixXd u(static_cast<int>(shl.size()) + p, np);
      for (size_t a = 0; a < shl.size(); ++a)
        for (int c = 0; c < np; ++c) u(static_cast<int>(a), c) = hl(shl[a], pv[c]);
      for (int r = 0; r < p; ++r)
        for (int c = 0; c < np; ++c)
          u(static_cast<int>(shl.size()) + r, c) = prog_.G(r, b.cols[pv[c]]);
      u_[j] = u;
      const Eigen::MatrixXd x = app_solve(j, u.transpose());  // np x rows
      const Eigen::MatrixXd schur = u * x;
      std::vector<int> rows(shl.size() + static_cast<size_t>(p));
      for (size_t a = 0; a < shl.size(); ++a) rows[a] = shared_index_[b.cols[shl[a]]];
      for (int r = 0; r < p; ++r) rows[shl.size() + static_cast<size_t>(r)] = ns_ + r;
      for (size_t a = 0; a < rows.size(); ++a)
        for (size_t c = 0; c < rows.size(); ++c)
          red_(rows[a], rows[c]) -= schur(static_cast<int>(a), static_cast<int>(c));
      shl_.resize(prog_.blocks.size());
      shl_[j] = shl;
    }
    if (shl_.size() != prog_.blocks.size()) shl_.resize(prog_.blocks.size());
    if (red_.rows() > 0) {
      // symmetric equilibration before the LU factorization
      scale_ = Eigen::VectorXd::Ones(red_.rows());
      for (int i = 0; i < red_.rows(); ++i) {
        const double m = red_.row(i).lpNorm<Eigen::Infinity>();
        if (m > 0) scale_[i] = 1.0 / std::sqrt(m);
      }
      lu_.compute(scale_.asDiagonal() * red_ * scale_.asDiagonal());
    }
    (void)n;
    return true;
  }

  /// Solves [H G'; G 0][dv; w] = [r1; r2].
  void solve(const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dv,
             Eigen::VectorXd& w) const {
    const int p = static_cast<int>(prog_.G.rows());
    Eigen::VectorXd rhs(ns_ + p);
    for (int i = 0; i < ns_; ++i) rhs[i] = r1[shared_cols_[i]];
    rhs.tail(p) = r2;
    // fold in the eliminated privates: rhs -= U App^{-1} r1_p
    std::vector<Eigen::VectorXd> xp(prog_.blocks.size());
    for (size_t j = 0; j < prog_.blocks.size(); ++j) {
      const auto& pv = priv_[j];
      if (pv.empty()) continue;
      const Block& b = prog_.blocks[j];
      Eigen::VectorXd rp(pv.size());
      for (size_t a = 0; a < pv.size(); ++a) rp[static_cast<int>(a)] = r1[b.cols[pv[a]]];
      xp[j] = app_solve(j, rp);
      const Eigen::VectorXd contrib = u_[j] * xp[j];
      const auto& shl = shl_[j];
      for (size_t a = 0; a < shl.size(); ++a)
        rhs[shared_index_[b.cols[shl[a]]]] -= contrib[static_cast<int>(a)];
      for (int r = 0; r < p; ++r) rhs[ns_ + r] -= contrib[static_cast<int>(shl.size()) + r];
    }
    Eigen::VectorXd sol(ns_ + p);
    if (red_.rows() > 0)
      sol = scale_.asDiagonal() * Eigen::VectorXd(lu_.solve(scale_.asDiagonal() * rhs));
    dv = Eigen::VectorXd::Zero(prog_.nvars);
    for (int i = 0; i < ns_; ++i) dv[shared_cols_[i]] = sol[i];
    w = sol.tail(p);
    // back-substitute privates: dp = App^{-1}(r1_p - H_ps ds - G_p' w)
    for (size_t j = 0; j < prog_.blocks.size(); ++j) {
      const auto& pv = priv_[j];
      if (pv.empty()) continue;
      const Block& b = prog_.blocks[j];
      const auto& shl = shl_[j];
      Eigen::VectorXd t(static_cast<int>(shl.size()) + p);
      for (size_t a = 0; a < shl.size(); ++a)
        t[static_cast<int>(a)] = dv[b.cols[shl[a]]];
      for (int r = 0; r < p; ++r) t[static_cast<int>(shl.size()) + r] = w[r];
      const Eigen::VectorXd dp = xp[j] - app_solve(j, u_[j].transpose() * t);
      for (size_t a = 0; a < pv.size(); ++a) dv[b.cols[pv[a]]] = dp[static_cast<int>(a)];
    }
  }

  /// H * x without forming H (for decrements and refinement residuals).
  Eigen::VectorXd hess_apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = opts_.reg * x;
    for (size_t j = 0; j < prog_.blocks.size(); ++j) {
      const Block& b = prog_.blocks[j];
      Eigen::VectorXd xl(b.cols.size());
      for (size_t i = 0; i < b.cols.size(); ++i) xl[static_cast<int>(i)] = x[b.cols[i]];
      const Eigen::VectorXd yl = hloc_[j] * xl;
      for (size_t i = 0; i < b.cols.size(); ++i) out[b.cols[i]] += yl[static_cast<int>(i)];
    }
    return out;
  }

 private:
  const Program& prog_;
  const Options& opts_;
  std::vector<int> owner_;         // block owning a private var, -1 if shared
  std::vector<int> shared_index_;  // var -> reduced row, -1 if private
  std::vector<int> shared_cols_;
  int ns_ = 0;
  std::vector<std::vector<int>> priv_;             // local positions per block
  std::vector<std::vector<int>> shl_;              // local shared positions per block
  std::vector<char> closed_;                       // closed-form elimination per block
  std::vector<Eigen::MatrixXd> hloc_;              // D' hess D per block
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> app_;  // private-private factors
  std::vector<Eigen::MatrixXd> inv_m_;             // psd block matrices
  std::vector<Eigen::VectorXd> inv_u_;             // soc/nonneg block inputs
  std::vector<double> inv_r_;                      // soc residuals t^2-|x|^2
  std::vector<Eigen::MatrixXd> u_;                 // [H_sp; G_p] per block
  Eigen::MatrixXd red_;
  Eigen::VectorXd scale_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct CenterOutcome {
  bool ok = false;
  bool diverged = false;  // iterate norm blew past the ceiling
  bool plunged = false;   // objective fell through the floor
  Eigen::VectorXd w;      // equality multipliers at the center
  int newton_steps = 0;
  double decrement = std::numeric_limits<double>::infinity();
  std::string message;
};

/// Damped Newton centering of t*c'v + Phi(v) subject to Gv = h, started from
/// a strictly feasible v (updated in place).
inline CenterOutcome center(const Program& prog, const Options& opts, double t,
                            Eigen::VectorXd& v, double norm_ceiling, double obj_floor) {
  CenterOutcome out;
  const double stall_accept = 0.1;
  KktContext kkt(prog, opts);
  const int p = static_cast<int>(prog.G.rows());
  double prev_lambda = std::numeric_limits<double>::infinity();
  int slow = 0;
  out.w = Eigen::VectorXd::Zero(p);
  for (int it = 0; it < opts.max_newton; ++it) {
    std::vector<BarrierEval> evals(prog.blocks.size());
    std::vector<Eigen::VectorXd> inputs(prog.blocks.size());
    Eigen::VectorXd g = t * prog.c;
    for (size_t j = 0; j < prog.blocks.size(); ++j) {
      inputs[j] = block_input(prog.blocks[j], v);
      evals[j] = eval_block_from(prog.blocks[j], inputs[j], true);
      if (!evals[j].interior) {
        out.message = "iterate left the cone interior";
        return out;
      }
      const Block& b = prog.blocks[j];
      const Eigen::VectorXd gl =
          b.is_slice() ? evals[j].grad : Eigen::VectorXd(b.map.transpose() * evals[j].grad);
      for (size_t i = 0; i < b.cols.size(); ++i) g[b.cols[i]] += gl[static_cast<int>(i)];
    }
    if (!kkt.factor(evals, inputs)) {
      out.message = "singular Newton system after regularization";
      return out;
    }
    Eigen::VectorXd r2 = p ? Eigen::VectorXd(prog.h - prog.G * v) : Eigen::VectorXd(0);
    Eigen::VectorXd dv, w;
    kkt.solve(-g, r2, dv, w);
    // one pass of iterative refinement
    {
      Eigen::VectorXd res1 = kkt.hess_apply(dv) + g;
      if (p) res1 += prog.G.transpose() * w;
      Eigen::VectorXd res2 = p ? Eigen::VectorXd(prog.G * dv - r2) : Eigen::VectorXd(0);
      Eigen::VectorXd ddv, dw;
      kkt.solve(-res1, -res2, ddv, dw);
      dv += ddv;
      w += dw;
    }
    out.w = w;
    const double lambda2 = dv.dot(kkt.hess_apply(dv));
    if (!std::isfinite(lambda2)) {
      out.message = "non-finite Newton decrement";
      return out;
    }
    const double lambda = std::sqrt(std::max(lambda2, 0.0));
    out.decrement = lambda;
    ++out.newton_steps;
    if (lambda < opts.center_tol) {
      out.ok = true;
      return out;
    }
    // numerical floor: accept a stalled but well-centered point (any
    // decrement below 1e-3 is deep inside the quadratic-convergence region)
    if (lambda < stall_accept && lambda > 0.5 * prev_lambda) {
      if (++slow >= 3) {
        out.ok = true;
        return out;
      }
    } else {
      slow = 0;
    }
    prev_lambda = lambda;
    double alpha = lambda <= 0.25 ? 1.0 : 1.0 / (1.0 + lambda);
    bool stepped = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd cand = v + alpha * dv;
      if (strictly_feasible(prog, cand)) {
        v = std::move(cand);
        stepped = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!stepped) {
      out.message = "line search failed to stay interior";
      return out;
    }
    if (v.lpNorm<Eigen::Infinity>() > norm_ceiling) {
      out.diverged = true;
      out.message = "iterates diverged";
      return out;
    }
    if (prog.c.dot(v) < obj_floor) {
      out.plunged = true;
      out.message = "objective unbounded below";
      return out;
    }
  }
  // ran out of iterations; accept only if essentially centered
  out.ok = out.decrement < stall_accept;
  if (!out.ok) out.message = "centering did not converge";
  return out;
}

}  // namespace detail_ipm

struct PathResult {
  Status status = Status::NumericalFailure;
  Eigen::VectorXd v;
  Eigen::VectorXd w;
  double t_final = 0;
  int newton_iterations = 0;
  int outer_iterations = 0;
  bool early_exit = false;
  bool diverged = false;
  std::string message;
};

/// Follows the central path from a strictly feasible v0. `gap_target` is an
/// absolute bound on nu/t; `early_stop`, when given, is checked after every
/// centering and ends the path (used by phase I).
inline PathResult follow_path(const Program& prog, const Options& opts,
                              const Eigen::VectorXd& v0, double gap_target,
                              const std::function<bool(const Eigen::VectorXd&)>& early_stop = {},
                              double t0 = -1.0) {
  PathResult out;
  out.v = v0;
  const double nu = std::max(prog.barrier_parameter(), 1.0);
  double t = t0 > 0 ? t0 : nu / std::max(1.0, std::abs(prog.c.dot(v0)));
  const double obj_floor = -1e14 * std::max(1.0, std::abs(prog.c.dot(v0)));
  const double norm_ceiling = 1e13 * (1.0 + v0.lpNorm<Eigen::Infinity>());
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const Eigen::VectorXd v_before = out.v;
    auto c = detail_ipm::center(prog, opts, t, out.v, norm_ceiling, obj_floor);
    out.newton_iterations += c.newton_steps;
    out.outer_iterations = outer + 1;
#ifdef KOCP_IPM_TRACE
    std::fprintf(stderr, "[ipm] outer=%d t=%.3e ok=%d steps=%d dec=%.3e obj=%.12f %s\n", outer,
                 t, c.ok ? 1 : 0, c.newton_steps, c.decrement, prog.c.dot(out.v),
                 c.message.c_str());
#endif
    if (c.plunged) {
      out.status = Status::Unbounded;
      return out;
    }
    if (c.diverged) {
      out.diverged = true;
      out.status = Status::NumericalFailure;
      out.message = c.message;
      return out;
    }
    if (!c.ok) {
      if (out.t_final > 0) {
        // keep the last good center; the caller sees the achieved gap
        out.v = v_before;
        out.status = Status::MaxIter;
        out.message = "path stalled at t = " + std::to_string(out.t_final);
        return out;
      }
      out.message = c.message;
      out.status = Status::NumericalFailure;
      return out;
    }
    out.w = c.w;
    out.t_final = t;
    if (early_stop && early_stop(out.v)) {
      out.early_exit = true;
      out.status = Status::Optimal;
      return out;
    }
    if (prog.c.dot(out.v) < obj_floor) {
      out.status = Status::Unbounded;
      return out;
    }
    if (nu / t <= gap_target) {
      out.status = Status::Optimal;
      return out;
    }
    t *= opts.mu_factor;
  }
  out.status = Status::MaxIter;
  return out;
}

namespace detail_ipm {

/// Appends a phase-I slack variable s: every block is shifted by s times its
/// canonical interior direction, the objective becomes min s. Blocks whose
/// columns are private slices absorb the shift by substitution (the shifted
/// coordinates become the variables, s moves into the equality rows), which
/// keeps their eliminated Hessians clean; other blocks get an s column.
struct Phase1 {
  Program prog;
  int s_col = 0;
  // blocks substituted as m~ = m + s * dir; undo with v[col] -= s * dir[i]
  std::vector<std::pair<std::vector<int>, Eigen::VectorXd>> substituted;

  void undo_substitution(Eigen::VectorXd& v) const {
    const double sv = v[s_col];
    for (const auto& [cols, dir] : substituted)
      for (size_t i = 0; i < cols.size(); ++i) v[cols[i]] -= sv * dir[static_cast<int>(i)];
  }
};

inline Phase1 make_phase1(const Program& orig, double s0) {
  Phase1 ph;
  ph.prog = orig;
  ph.s_col = orig.nvars;
  ph.prog.nvars = orig.nvars + 1;
  ph.prog.c = Eigen::VectorXd::Zero(ph.prog.nvars);
  ph.prog.c[ph.s_col] = 1.0;
  if (orig.G.rows() > 0) {
    ph.prog.G = Eigen::MatrixXd::Zero(orig.G.rows(), ph.prog.nvars);
    ph.prog.G.leftCols(orig.nvars) = orig.G;
  } else {
    ph.prog.G.resize(0, ph.prog.nvars);
  }
  std::vector<int> touch(orig.nvars, 0);
  for (const auto& b : orig.blocks)
    for (int c : b.cols) touch[c]++;
  for (auto& b : ph.prog.blocks) {
    Eigen::VectorXd dir;
    switch (b.kind) {
      case BlockKind::PsdPacked: dir = kocp::detail::packed_identity(b.dim); break;
      case BlockKind::Soc:
        dir = Eigen::VectorXd::Zero(b.dim);
        dir[0] = 1.0;
        break;
      case BlockKind::Nonneg: dir = Eigen::VectorXd::Ones(b.dim); break;
    }
    bool private_slice = b.is_slice();
    for (int c : b.cols)
      if (touch[c] != 1) private_slice = false;
    if (private_slice) {
      for (int r = 0; r < ph.prog.G.rows(); ++r) {
        double acc = 0;
        for (size_t i = 0; i < b.cols.size(); ++i)
          acc += ph.prog.G(r, b.cols[i]) * dir[static_cast<int>(i)];
        ph.prog.G(r, ph.s_col) -= acc;
      }
      ph.substituted.emplace_back(b.cols, dir);
      continue;
    }
    Eigen::MatrixXd m;
    if (b.is_slice()) {
      m = Eigen::MatrixXd::Identity(b.coord_count(), b.coord_count());
    } else {
      m = b.map;
    }
    Eigen::MatrixXd ext(m.rows(), m.cols() + 1);
    ext << m, dir;
    b.map = std::move(ext);
    b.cols.push_back(ph.s_col);
  }
  // bracket the slack in (-1, s0+1): keeps the phase-I centering problems
  // bounded and the slack direction curved
  Block hi;
  hi.kind = BlockKind::Nonneg;
  hi.dim = 1;
  hi.cols = {ph.s_col};
  hi.map = Eigen::MatrixXd::Constant(1, 1, -1.0);
  hi.offset = Eigen::VectorXd::Constant(1, s0 + 1.0);
  ph.prog.blocks.push_back(hi);
  Block lo = hi;
  lo.map = Eigen::MatrixXd::Constant(1, 1, 1.0);
  lo.offset = Eigen::VectorXd::Constant(1, 1.0);
  ph.prog.blocks.push_back(lo);
  return ph;
}

/// Appends a trust-region ball ||v[0:ncov]||_2 <= radius as a SOC block.
/// Keeps phase-I (and drifting phase-II instances) bounded; the radius is
/// far outside any sane iterate, so optima are unaffected.
inline Program with_ball(const Program& prog, int ncov, double radius) {
  Program out = prog;
  Block ball;
  ball.kind = BlockKind::Soc;
  ball.dim = ncov + 1;
  ball.cols.resize(ncov);
  for (int i = 0; i < ncov; ++i) ball.cols[i] = i;
  ball.map = Eigen::MatrixXd::Zero(ncov + 1, ncov);
  ball.map.bottomRows(ncov) = Eigen::MatrixXd::Identity(ncov, ncov);
  ball.offset = Eigen::VectorXd::Zero(ncov + 1);
  ball.offset[0] = radius;
  out.blocks.push_back(ball);
  return out;
}

/// Enlarges every cone block by eps along its canonical interior direction
/// (facial relaxation for feasible sets with empty interior).
inline Program relax_blocks(const Program& prog, double eps) {
  Program out = prog;
  for (auto& b : out.blocks) {
    Eigen::VectorXd dir;
    switch (b.kind) {
      case BlockKind::PsdPacked: dir = kocp::detail::packed_identity(b.dim); break;
      case BlockKind::Soc:
        dir = Eigen::VectorXd::Zero(b.dim);
        dir[0] = 1.0;
        break;
      case BlockKind::Nonneg: dir = Eigen::VectorXd::Ones(b.dim); break;
    }
    if (b.offset.size() == 0) b.offset = Eigen::VectorXd::Zero(b.coord_count());
    b.offset += eps * dir;
  }
  return out;
}

/// Smallest s making every block comfortably interior at v.
inline double phase1_start(const Program& orig, const Eigen::VectorXd& v) {
  double need = 0;
  for (const auto& b : orig.blocks) {
    const Eigen::VectorXd u = block_input(b, v);
    switch (b.kind) {
      case BlockKind::PsdPacked: {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            kocp::detail::unpack_sym(b.dim, u), Eigen::EigenvaluesOnly);
        need = std::max(need, -es.eigenvalues().minCoeff());
        break;
      }
      case BlockKind::Soc: {
        if (b.dim >= 2)
          need = std::max(need, u.tail(b.dim - 1).norm() - u[0]);
        else
          need = std::max(need, -u[0]);
        break;
      }
      case BlockKind::Nonneg: need = std::max(need, -u.minCoeff()); break;
    }
  }
  return 1.1 * need + 1.0;
}

}  // namespace detail_ipm

/// Solves min c'v s.t. Gv = h, blocks in cones. Rows of G must be linearly
/// independent (checked); all-zero rows must be filtered by the caller.
/// A strictly feasible `start` skips phase I.
inline Result solve(const Program& prog, const Options& opts = {},
                    const std::optional<Eigen::VectorXd>& start = {}) {
  Result res;
  const int n = prog.nvars;
  const int p = static_cast<int>(prog.G.rows());
  if (p > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(prog.G.transpose());
    qr.setThreshold(tol::rank_pivot);
    if (qr.rank() < p)
      throw InputError("equality constraints are linearly dependent (rank " +
                       std::to_string(qr.rank()) + " of " + std::to_string(p) + ")");
  }
  const bool pure_feasibility = prog.c.size() == 0 || prog.c.lpNorm<Eigen::Infinity>() == 0.0;

  // least-norm solution of the equalities as the starting shape
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  if (start && static_cast<int>(start->size()) == n) {
    v = *start;
  } else if (p > 0) {
    Eigen::LDLT<Eigen::MatrixXd> gram(prog.G * prog.G.transpose());
    v = prog.G.transpose() * gram.solve(prog.h);
  }

  auto finish_feasibility = [&](const Eigen::VectorXd& point) {
    res.status = Status::Optimal;
    res.v = point;
    res.y = Eigen::VectorXd::Zero(p);
    res.objective = 0.0;
    res.gap_estimate = 0.0;
    return res;
  };

  Program relaxed;  // set when the feasible set has an empty interior
  const Program* work = &prog;
  double eps_used = 0;
  if (!detail_ipm::strictly_feasible(prog, v)) {
    // phase I: min s with every block shifted by s, iterates kept in a ball
    const double s0 = detail_ipm::phase1_start(prog, v);
    double radius = 1e3 * (1.0 + v.norm() + s0);
    const double exit_level = -1e-3 * (1.0 + s0);
    bool settled = false;
    auto relax_from = [&](double s_at, const Eigen::VectorXd& point) {
      eps_used = std::max(1e-8, 2.0 * std::abs(s_at));
      relaxed = detail_ipm::relax_blocks(prog, eps_used);
      work = &relaxed;
      v = point;
      return detail_ipm::strictly_feasible(relaxed, v);
    };
    for (int attempt = 0; attempt < 3 && !settled; ++attempt, radius *= 100.0) {
      auto ph = detail_ipm::make_phase1(prog, s0);
      ph.prog = detail_ipm::with_ball(ph.prog, n, radius);
      Eigen::VectorXd v1(n + 1);
      v1.head(n) = v;
      v1[n] = s0;
      for (const auto& [cols, dir] : ph.substituted)
        for (size_t i = 0; i < cols.size(); ++i) v1[cols[i]] += s0 * dir[static_cast<int>(i)];
      Options ph_opts = opts;
      auto pr = follow_path(ph.prog, ph_opts, v1, /*gap_target=*/1e-9,
                            [&](const Eigen::VectorXd& cur) {
                              return cur[n] < exit_level || cur[n] < 1e-9;
                            });
      res.newton_iterations += pr.newton_iterations;
      if (pr.early_exit) {
        const double s_at = pr.v[n];
        ph.undo_substitution(pr.v);
        v = pr.v.head(n);
        if (!detail_ipm::strictly_feasible(prog, v)) {
          if (pure_feasibility) return finish_feasibility(v);
          if (!relax_from(s_at, v)) {
            res.status = Status::NumericalFailure;
            res.message = "phase I stalled at the boundary";
            return res;
          }
        }
        settled = true;
      } else if (pr.status == Status::Optimal || pr.status == Status::MaxIter) {
        const double s_star = pr.v[n];
        ph.undo_substitution(pr.v);
        const bool ball_active = pr.v.head(n).norm() > 0.5 * radius;
        if (s_star > tol::infeasible) {
          if (ball_active) continue;  // inconclusive, enlarge the ball
          res.status = Status::Infeasible;
          res.objective = std::numeric_limits<double>::quiet_NaN();
          res.message = "phase I slack " + std::to_string(s_star);
          return res;
        }
        v = pr.v.head(n);
        if (!detail_ipm::strictly_feasible(prog, v)) {
          if (pure_feasibility) return finish_feasibility(v);
          if (!relax_from(s_star, v)) {
            res.status = Status::NumericalFailure;
            res.message = "feasible set has empty interior (phase I slack " +
                          std::to_string(s_star) + ")";
            return res;
          }
        }
        settled = true;
      } else if (pr.t_final > 0 && pr.v.size() == n + 1 && pr.v[n] <= tol::infeasible) {
        // phase I stalled at the boundary: relax and continue
        const double s_at = pr.v[n];
        ph.undo_substitution(pr.v);
        if (pure_feasibility) return finish_feasibility(pr.v.head(n));
        if (!relax_from(s_at, pr.v.head(n))) {
          res.status = Status::NumericalFailure;
          res.message = "phase I stalled at the boundary";
          return res;
        }
        settled = true;
      } else {
        res.status = pr.status;
        res.message = "phase I: " + pr.message;
        return res;
      }
    }
    if (!settled) {
      res.status = Status::NumericalFailure;
      res.message = "phase I kept hitting the trust region";
      return res;
    }
  }
  if (pure_feasibility) return finish_feasibility(v);

  // phase II, retried inside a trust-region ball if the path drifts off
  auto run_path = [&](const Program& pg, const Eigen::VectorXd& vstart) {
    double gap_target = opts.tol * std::max(1.0, std::abs(pg.c.dot(vstart)));
    auto pr = follow_path(pg, opts, vstart, gap_target);
    if (pr.status == Status::Optimal) {
      const double tighter = opts.tol * std::max(1.0, std::abs(pg.c.dot(pr.v)));
      if (tighter < 0.5 * gap_target) {
        auto pr2 = follow_path(pg, opts, pr.v, tighter, {}, pr.t_final);
        pr2.newton_iterations += pr.newton_iterations;
        if (pr2.status == Status::Optimal) pr = pr2;
      }
    }
    return pr;
  };

  double nu = work->barrier_parameter();
  Program balled_first;
  if (eps_used > 0) {
    // relaxed programs usually come from conversions with objective-neutral
    // drift directions; bound them from the start
    balled_first = detail_ipm::with_ball(*work, n, 1e4 * (1.0 + v.norm()));
    work = &balled_first;
    nu = work->barrier_parameter();
  }
  auto pr = run_path(*work, v);
  const bool maybe_drift =
      pr.diverged ||
      (pr.status == Status::NumericalFailure && pr.message == "centering did not converge");
  if (maybe_drift) {
    double radius = 1e4 * (1.0 + v.norm());
    bool pinned = false;
    for (int attempt = 0; attempt < 2; ++attempt, radius *= 100.0) {
      Program balled = detail_ipm::with_ball(*work, n, radius);
      auto pr2 = run_path(balled, v);
      pr2.newton_iterations += pr.newton_iterations;
      pr = pr2;
      nu = balled.barrier_parameter();
      pinned = pr.status == Status::Optimal && pr.v.norm() > 0.5 * radius;
      if (pinned) continue;
      break;
    }
    // the optimum escapes every trust region: the objective is unbounded
    // below (or its infimum is unattained at infinity)
    if (pinned || (pr.status == Status::NumericalFailure &&
                   prog.c.dot(pr.v.size() ? pr.v : v) < -1e6 * std::max(1.0, std::abs(prog.c.dot(v))))) {
      res.status = Status::Unbounded;
      res.newton_iterations += pr.newton_iterations;
      res.message = "objective decreases along an unbounded feasible ray";
      return res;
    }
  }
  if (eps_used > 0 && res.message.empty())
    res.message = "solved a " + std::to_string(eps_used) + "-relaxed problem (empty interior)";
  res.newton_iterations += pr.newton_iterations;
  res.outer_iterations = pr.outer_iterations;
  res.status = pr.status;
  res.message = pr.message;
  if (pr.status != Status::Optimal && pr.status != Status::MaxIter) return res;
  res.v = pr.v;
  // stationarity: t c + grad Phi + G' w = 0, so the Lagrange multipliers of
  // min c'v s.t. Gv = h (dual slack c - G'y) are y = -w / t
  res.y = pr.t_final > 0 ? Eigen::VectorXd(-pr.w / pr.t_final) : Eigen::VectorXd::Zero(p);
  res.t_final = pr.t_final;
  res.objective = prog.c.dot(pr.v);
  res.gap_estimate = pr.t_final > 0 ? nu / pr.t_final : std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace kocp::ipm
