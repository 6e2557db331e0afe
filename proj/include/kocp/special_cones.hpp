#pragma once

// Copositive / completely positive membership and program reduction for
// orders up to 4, SOC-hierarchy membership under the I_SOC index map, and
// the norm-cone consistency/monotonicity machinery with the l1 collapse.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "kocp/norms.hpp"
#include "kocp/solver.hpp"

namespace kocp {

// ---------------------------------------------------------------------------
// copositive / completely positive cones, exact for dim <= 4

struct CpSplit {
  SymMatrix psd_part{1};
  SymMatrix nonneg_part{1};
};

struct CpResult {
  bool member = false;
  std::optional<CpSplit> split;
};

namespace detail_special {

/// Cheap falsifier: sample x on the nonnegative simplex; any x'Ax < 0
/// certifies non-copositivity.
inline bool copositivity_falsified(const SymMatrix& a, int samples, std::mt19937_64& rng) {
  const int d = a.dim();
  const double scale = psd_scale(a);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto quad = [&](const std::vector<double>& x) {
    double q = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) q += x[i] * a(i, j) * x[j];
    return q;
  };
  // axis points and pair midpoints first, then random simplex samples
  for (int i = 0; i < d; ++i) {
    std::vector<double> x(d, 0.0);
    x[i] = 1.0;
    if (quad(x) < -1e-9 * scale) return true;
    for (int j = i + 1; j < d; ++j) {
      for (double w = 0.1; w < 1.0; w += 0.1) {
        x.assign(d, 0.0);
        x[i] = w;
        x[j] = 1.0 - w;
        if (quad(x) < -1e-9 * scale) return true;
      }
    }
  }
  std::vector<double> x(d);
  for (int it = 0; it < samples; ++it) {
    double s = 0;
    for (int i = 0; i < d; ++i) s += x[i] = -std::log(1.0 - u(rng));
    for (int i = 0; i < d; ++i) x[i] /= s;
    if (quad(x) < -1e-9 * scale) return true;
  }
  return false;
}

}  // namespace detail_special

/// Exact copositivity test for dim <= 4 via the split A = S + N with S PSD
/// and N entrywise nonnegative.
inline CpResult cp_membership(const SymMatrix& a) {
  const int k = a.dim();
  if (k > 4) throw InputError("cp_membership: exact test requires dim <= 4");
  std::mt19937_64 rng(0x5eedULL);
  if (detail_special::copositivity_falsified(a, 2000, rng)) return {false, std::nullopt};

  const int pk = SymMatrix::packed_size(k);
  ipm::Program prog;
  prog.nvars = 2 * pk;  // S packed, N packed
  prog.c = Eigen::VectorXd::Zero(prog.nvars);
  prog.G = Eigen::MatrixXd::Zero(pk, prog.nvars);
  prog.h = Eigen::VectorXd::Zero(pk);
  for (int e = 0; e < pk; ++e) {
    prog.G(e, e) = 1.0;
    prog.G(e, pk + e) = 1.0;
    prog.h[e] = a.upper()[e];
  }
  ipm::Block sb;
  sb.kind = ipm::BlockKind::PsdPacked;
  sb.dim = k;
  sb.cols.resize(pk);
  for (int c = 0; c < pk; ++c) sb.cols[c] = c;
  prog.blocks.push_back(sb);
  ipm::Block nb;
  nb.kind = ipm::BlockKind::Nonneg;
  nb.dim = pk;
  nb.cols.resize(pk);
  for (int c = 0; c < pk; ++c) nb.cols[c] = pk + c;
  prog.blocks.push_back(nb);

  auto res = ipm::solve(prog);
  if (res.status == ipm::Status::Infeasible) return {false, std::nullopt};
  if (res.status != ipm::Status::Optimal)
    throw NumericalError("cp_membership: feasibility solve failed (" + res.message + ")");
  CpSplit split{SymMatrix(k), SymMatrix(k)};
  split.psd_part.upper().assign(res.v.data(), res.v.data() + pk);
  split.nonneg_part.upper().assign(res.v.data() + pk, res.v.data() + 2 * pk);
  return {true, std::move(split)};
}

/// A in CPP^k = PSD^k intersect NN^k, exact for k <= 4.
inline bool cpp_membership(const SymMatrix& a) {
  if (a.dim() > 4) throw InputError("cpp_membership: exact test requires dim <= 4");
  const double scale = psd_scale(a);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j)
      if (a(i, j) < -tol::psd * scale) return false;
  return psd_margin(a) >= -tol::psd * scale;
}

// ---------------------------------------------------------------------------
// CP / CPP program reduction to PSD-induced cones

/// The reduced problem plus the bookkeeping needed to map its solution back.
struct CpReduction {
  StandardProblem reduced;
  int original_d = 0;
  int order = 0;
  ConeFamily family = ConeFamily::Cp;
  IndexFamily original_J;
  // trailing diagonal slots hold the packed nonnegative parts, one group of
  // i(i+1)/2 per tuple; the CPP variant also prepends one i x i slot per
  // tuple carrying M_s itself
  int diag_base = 0;

  SymMatrix recover_x(const SymMatrix& xbig) const {
    SymMatrix x(original_d);
    const int i = order;
    const int pk = SymMatrix::packed_size(i);
    if (family == ConeFamily::Cp) {
      for (int a = 0; a < original_d; ++a)
        for (int b = a; b < original_d; ++b) x.at(a, b) = xbig(a, b);
      for (int s = 0; s < original_J.size(); ++s) {
        const IndexTuple& t = original_J.tuples[s];
        int c = 0;
        for (int p = 0; p < i; ++p)
          for (int q = p; q < i; ++q, ++c)
            x.at(t.zero_based(p), t.zero_based(q)) +=
                xbig(diag_base + s * pk + c, diag_base + s * pk + c);
      }
    } else {
      for (int s = 0; s < original_J.size(); ++s) {
        const IndexTuple& t = original_J.tuples[s];
        for (int p = 0; p < i; ++p)
          for (int q = p; q < i; ++q)
            x.at(t.zero_based(p), t.zero_based(q)) += xbig(s * i + p, s * i + q);
      }
    }
    return x;
  }
};

/// Casts a standard-form program over CP^d_i(J) or CPP^d_i(J) (i <= 4) into
/// one over a PSD-induced i-th order cone, using the per-tuple splits
/// CP = PSD + NN and CPP = PSD intersect NN, with the nonnegative parts
/// carried on extra diagonal slots (diag(x) in the cone iff x >= 0).
inline CpReduction reduce_cp_program(const StandardProblem& prob, bool force_size = false) {
  prob.cone.validate();
  const ConeFamily fam = prob.cone.family;
  if (fam != ConeFamily::Cp && fam != ConeFamily::Cpp)
    throw InputError("reduce_cp_program: expects a cp or cpp cone");
  if (prob.side != ProblemSide::PrimalCone)
    throw InputError("reduce_cp_program: primal-cone programs only");
  const int i = prob.cone.k;
  if (i > 4) throw InputError("reduce_cp_program: order must be <= 4");
  const int d = prob.cone.d;
  const int nt = prob.cone.J.size();
  const int pk = SymMatrix::packed_size(i);
  const int m = nt * pk;  // nonnegative slots

  CpReduction red;
  red.original_d = d;
  red.order = i;
  red.family = fam;
  red.original_J = prob.cone.J;

  const int slots = fam == ConeFamily::Cpp ? nt * i : d;
  red.diag_base = slots;
  const int bigd = slots + m;

  // index family: original tuples (CP, on the leading block) or disjoint
  // slot tuples (CPP), plus sliding windows over the diagonal slots
  std::vector<IndexTuple> tuples;
  if (fam == ConeFamily::Cp) {
    tuples = prob.cone.J.tuples;
  } else {
    for (int s = 0; s < nt; ++s) {
      std::vector<int> idx(i);
      for (int p = 0; p < i; ++p) idx[p] = s * i + p + 1;
      tuples.emplace_back(idx);
    }
  }
  for (int w = 0; w + i <= m; ++w) {
    std::vector<int> idx(i);
    for (int p = 0; p < i; ++p) idx[p] = slots + w + p + 1;
    tuples.emplace_back(idx);
  }
  red.reduced.cone = ConeSpec::psd_custom(bigd, i, IndexFamily(bigd, i, std::move(tuples)));
  if (red.reduced.cone.J.size() > tol::tuple_cap && !force_size)
    throw InputError("reduce_cp_program: reduced |J| exceeds the cap");
  red.reduced.side = ProblemSide::PrimalCone;

  // objective and constraints: tr(A X) with X = (S-part) + sum lift(N_s)
  auto transfer = [&](const SymMatrix& a) {
    SymMatrix big(bigd);
    if (fam == ConeFamily::Cp) {
      for (int r = 0; r < d; ++r)
        for (int c = r; c < d; ++c) big.at(r, c) = a(r, c);
    } else {
      for (int s = 0; s < nt; ++s) {
        const IndexTuple& t = prob.cone.J.tuples[s];
        for (int p = 0; p < i; ++p)
          for (int q = p; q < i; ++q) big.at(s * i + p, s * i + q) = a(t.zero_based(p), t.zero_based(q));
      }
    }
    for (int s = 0; s < nt; ++s) {
      const IndexTuple& t = prob.cone.J.tuples[s];
      int c = 0;
      for (int p = 0; p < i; ++p)
        for (int q = p; q < i; ++q, ++c) {
          const double kap = p == q ? 1.0 : 2.0;
          big.at(red.diag_base + s * pk + c, red.diag_base + s * pk + c) +=
              kap * a(t.zero_based(p), t.zero_based(q));
        }
    }
    return big;
  };
  red.reduced.A0 = transfer(prob.A0);
  for (const auto& [a, b] : prob.constraints)
    red.reduced.constraints.emplace_back(transfer(a), b);

  // pin off-diagonal entries inside the window tuples so the trailing part
  // stays diagonal
  std::vector<char> pinned(SymMatrix::packed_size(bigd), 0);
  SymMatrix probe(bigd);
  for (int w = 0; w + i <= m; ++w)
    for (int p = 0; p < i; ++p)
      for (int q = p + 1; q < i; ++q) {
        const int e = probe.index(slots + w + p, slots + w + q);
        if (pinned[e]) continue;
        pinned[e] = 1;
        SymMatrix pin(bigd);
        pin.at(slots + w + p, slots + w + q) = 0.5;
        red.reduced.constraints.emplace_back(std::move(pin), 0.0);
      }

  // CPP: tie each nonnegative slot to its block entry
  if (fam == ConeFamily::Cpp) {
    for (int s = 0; s < nt; ++s) {
      int c = 0;
      for (int p = 0; p < i; ++p)
        for (int q = p; q < i; ++q, ++c) {
          SymMatrix link(bigd);
          link.at(s * i + p, s * i + q) = p == q ? 1.0 : 0.5;
          link.at(red.diag_base + s * pk + c, red.diag_base + s * pk + c) = -1.0;
          red.reduced.constraints.emplace_back(std::move(link), 0.0);
        }
    }
  }
  return red;
}

// ---------------------------------------------------------------------------
// norm axioms: consistency and monotonicity under truncation/lift

struct NormAxiomReport {
  std::string norm;
  int d = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  int violations = 0;
  double worst_consistency_err = 0;
  double worst_monotonicity_gap = 0;  // positive means a violation
};

/// Generic engine over an arbitrary functional; the negative controls in the
/// test suite feed deliberately broken functionals through this.
inline NormAxiomReport check_norm_axioms(
    const std::function<double(const std::vector<double>&)>& func, const std::string& label,
    int d, int samples, std::uint64_t seed) {
  NormAxiomReport rep{label, d, samples, seed, 0, 0, 0};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> pick_k(1, d);
  for (int it = 0; it < samples; ++it) {
    std::vector<double> x(d);
    for (double& v : x) v = g(rng);
    const int k = pick_k(rng);
    // random increasing tuple
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<double> sub(k), lifted(d, 0.0);
    for (int i = 0; i < k; ++i) lifted[idx[i]] = sub[i] = x[idx[i]];
    const double nsub = func(sub);
    const double nlift = func(lifted);
    const double nfull = func(x);
    const double scale = 1e-9 * std::max(1.0, std::abs(nfull));
    const double cons = std::abs(nsub - nlift);
    const double mono = nsub - nfull;
    rep.worst_consistency_err = std::max(rep.worst_consistency_err, cons);
    rep.worst_monotonicity_gap = std::max(rep.worst_monotonicity_gap, mono);
    if (cons > scale || mono > scale) rep.violations++;
  }
  return rep;
}

inline NormAxiomReport check_norm_axioms(
    const std::function<double(const SymMatrix&)>& func, const std::string& label, int d,
    int samples, std::uint64_t seed) {
  NormAxiomReport rep{label, d, samples, seed, 0, 0, 0};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> pick_k(1, d);
  for (int it = 0; it < samples; ++it) {
    SymMatrix x(d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) x.at(i, j) = g(rng);
    const int k = pick_k(rng);
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i) idx[i] = i + 1;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    const IndexTuple t(idx);
    const SymMatrix sub = truncate(x, t);
    const SymMatrix lifted = lift(sub, t, d);
    const double nsub = func(sub);
    const double nlift = func(lifted);
    const double nfull = func(x);
    const double scale = 1e-9 * std::max(1.0, std::abs(nfull));
    const double cons = std::abs(nsub - nlift);
    const double mono = nsub - nfull;
    rep.worst_consistency_err = std::max(rep.worst_consistency_err, cons);
    rep.worst_monotonicity_gap = std::max(rep.worst_monotonicity_gap, mono);
    if (cons > scale || mono > scale) rep.violations++;
  }
  return rep;
}

inline NormAxiomReport check_norm_axioms(const NormDescriptor& n, int d, int samples,
                                         std::uint64_t seed) {
  if (n.domain == NormDomain::Vector)
    return check_norm_axioms([&](const std::vector<double>& x) { return norm_eval(n, x); },
                             n.to_string(), d, samples, seed);
  return check_norm_axioms([&](const SymMatrix& x) { return norm_eval(n, x); }, n.to_string(),
                           d, samples, seed);
}

// ---------------------------------------------------------------------------
// norm-cone hierarchy membership under I_SOC

/// A point (t, X) of a norm cone; exactly one of x / X is meaningful.
struct NormConePoint {
  double t = 0;
  std::vector<double> x;
  std::optional<SymMatrix> X;
};

enum class MembershipSide { Primal, Dual };

/// Dual-cone membership: every I_SOC truncation satisfies the dual-norm
/// bound ||sub||* <= t. Works for vector and matrix domains.
inline MembershipResult normcone_dual_membership(const NormConePoint& pt,
                                                 const NormDescriptor& n, int k) {
  const bool mat = n.domain == NormDomain::Matrix;
  const int d = mat ? pt.X->dim() : static_cast<int>(pt.x.size());
  if (k < 1 || k > d + 1) throw InputError("normcone membership: need 1 <= k <= d+1");
  double margin = std::numeric_limits<double>::infinity();
  if (k == 1) return {pt.t >= 0, pt.t};
  const IndexFamily fam = enumerate_tuples(d + 1, k, IndexMap::Soc);
  for (const auto& t : fam.tuples) {
    std::vector<int> rest(t.size() - 1);
    for (int p = 1; p < t.size(); ++p) rest[p - 1] = t[p] - 1;  // 1-based into X
    double dn;
    if (mat) {
      dn = dual_norm_eval(n, truncate(*pt.X, IndexTuple(rest)));
    } else {
      std::vector<double> sub(rest.size());
      for (size_t p = 0; p < rest.size(); ++p) sub[p] = pt.x[rest[p] - 1];
      dn = dual_norm_eval(n, sub);
    }
    margin = std::min(margin, pt.t - dn);
  }
  const double scale = std::max(1.0, std::abs(pt.t));
  return {margin >= -tol::psd * scale, margin};
}

/// Primal-cone membership: decomposition feasibility. l2 goes through the
/// SOC block solver; l1 collapses to ||x||_1 <= t from order 2 upward.
/// Other norms have no primal block solver and are rejected.
inline MembershipResult normcone_primal_membership(const NormConePoint& pt,
                                                   const NormDescriptor& n, int k,
                                                   const ipm::Options& opts = {}) {
  if (n.domain != NormDomain::Vector || n.kind != NormDescriptor::Kind::Lp ||
      (n.p != 1.0 && n.p != 2.0))
    throw InputError("normcone primal membership: supported norms are l1 and l2");
  const int d = static_cast<int>(pt.x.size());
  if (k < 1 || k > d + 1) throw InputError("normcone membership: need 1 <= k <= d+1");
  double linf = 0;
  for (double v : pt.x) linf = std::max(linf, std::abs(v));
  if (k == 1) {
    const double margin = std::min(pt.t, -linf);
    return {margin >= -tol::psd * std::max(1.0, std::abs(pt.t)), margin};
  }
  if (n.p == 1.0) {
    double l1 = 0;
    for (double v : pt.x) l1 += std::abs(v);
    const double margin = pt.t - l1;
    return {margin >= -tol::psd * std::max(1.0, pt.t), margin};
  }
  std::vector<double> diag(d + 1);
  diag[0] = pt.t;
  for (int i = 0; i < d; ++i) diag[i + 1] = pt.x[i];
  const auto res = primal_margin(SymMatrix::diag(diag), ConeSpec::soc(d + 1, k), opts);
  return {res.member, res.margin};
}

inline MembershipResult normcone_k_membership(const NormConePoint& pt, const NormDescriptor& n,
                                              int k, MembershipSide side,
                                              const ipm::Options& opts = {}) {
  return side == MembershipSide::Dual ? normcone_dual_membership(pt, n, k)
                                      : normcone_primal_membership(pt, n, k, opts);
}

}  // namespace kocp
