#pragma once

// The k-th order cone machinery: membership in K^d_k(J) and its dual,
// SDD/DD tests, constructive factor-width-2 decomposition, embedding
// audits, strict-nesting certificates and direct sums.

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "kocp/index_family.hpp"
#include "kocp/ipm.hpp"
#include "kocp/matrix_ops.hpp"
#include "kocp/norms.hpp"
#include "kocp/symmetric_matrix.hpp"
#include "kocp/tolerances.hpp"

namespace kocp {

enum class ConeFamily { Psd, Soc, Cp, Cpp, Norm };

inline const char* to_string(ConeFamily f) {
  switch (f) {
    case ConeFamily::Psd: return "psd";
    case ConeFamily::Soc: return "soc";
    case ConeFamily::Cp: return "cp";
    case ConeFamily::Cpp: return "cpp";
    case ConeFamily::Norm: return "norm";
  }
  return "?";
}

/// Identifies one cone in one hierarchy: base family, ambient dim d,
/// order k and the index family J.
struct ConeSpec {
  ConeFamily family = ConeFamily::Psd;
  int d = 0;
  int k = 0;
  IndexFamily J;
  std::optional<NormDescriptor> norm;

  static ConeSpec psd(int d, int k, bool force_size = false) {
    return {ConeFamily::Psd, d, k, enumerate_tuples(d, k, IndexMap::Full, force_size), {}};
  }
  static ConeSpec psd_custom(int d, int k, IndexFamily j) {
    ConeSpec s{ConeFamily::Psd, d, k, std::move(j), {}};
    s.validate();
    return s;
  }
  static ConeSpec soc(int d, int k, bool force_size = false) {
    return {ConeFamily::Soc, d, k, enumerate_tuples(d, k, IndexMap::Soc, force_size), {}};
  }
  static ConeSpec norm_cone(int d, int k, NormDescriptor n) {
    ConeSpec s{ConeFamily::Norm, d, k, enumerate_tuples(d, k, IndexMap::Soc), std::move(n)};
    return s;
  }

  void validate() const {
    if (k < 1 || k > d) throw InputError("ConeSpec: need 1 <= k <= d");
    if (J.d != d || J.k != k) throw InputError("ConeSpec: J inconsistent with (d,k)");
    if ((family == ConeFamily::Soc || family == ConeFamily::Norm) && !J.soc_shaped())
      throw InputError("ConeSpec: soc/norm families need J within I_SOC");
    if ((family == ConeFamily::Cp || family == ConeFamily::Cpp) && k > 4)
      throw InputError("ConeSpec: exact cp/cpp membership requires k <= 4");
  }

  bool full_J() const { return J.size() == detail::binomial(d, k); }
};

/// Primal certificate: X = sum over blocks of lift(M_s).
struct Decomposition {
  int d = 0;
  std::vector<std::pair<IndexTuple, SymMatrix>> blocks;

  SymMatrix assemble() const {
    SymMatrix x(d);
    for (const auto& [t, m] : blocks) add_lift(x, m, t);
    return x;
  }
};

struct MembershipResult {
  bool member = false;
  double margin = 0;
};

// ---------------------------------------------------------------------------
// dual membership: every truncation lands in the base dual cone

inline MembershipResult dual_membership(const SymMatrix& a, const ConeSpec& spec) {
  spec.validate();
  if (a.dim() != spec.d) throw InputError("dual_membership: matrix dim != spec.d");
  const double scale = psd_scale(a);
  double margin = std::numeric_limits<double>::infinity();
  switch (spec.family) {
    case ConeFamily::Psd:
      for (const auto& t : spec.J.tuples)
        margin = std::min(margin, psd_margin(truncate(a, t)));
      break;
    case ConeFamily::Soc: {
      if (a.max_offdiag_abs() > 1e-9 * scale)
        throw InputError("dual_membership: soc carrier must be a diagonal matrix");
      const auto diag = a.diagonal();
      for (const auto& t : spec.J.tuples) {
        std::vector<double> v(t.size());
        for (int p = 0; p < t.size(); ++p) v[p] = diag[t.zero_based(p)];
        margin = std::min(margin, soc_margin(v));
      }
      break;
    }
    case ConeFamily::Norm: {
      if (!spec.norm) throw InputError("dual_membership: missing norm descriptor");
      const NormDescriptor& n = *spec.norm;
      for (const auto& t : spec.J.tuples) {
        const SymMatrix sub = truncate(a, t);
        const double tt = sub(0, 0);
        if (t.size() == 1) {
          margin = std::min(margin, tt);
          continue;
        }
        for (int j = 1; j < sub.dim(); ++j)
          if (std::abs(sub(0, j)) > 1e-9 * scale)
            throw InputError("dual_membership: norm-cone carrier must be diag(t, X)");
        std::vector<int> rest(sub.dim() - 1);
        for (int j = 0; j < sub.dim() - 1; ++j) rest[j] = j + 2;
        const SymMatrix xsub = truncate(sub, IndexTuple(rest));
        double dn;
        if (n.domain == NormDomain::Vector) {
          if (xsub.max_offdiag_abs() > 1e-9 * scale)
            throw InputError("dual_membership: vector-norm carrier must be diagonal");
          dn = dual_norm_eval(n, xsub.diagonal());
        } else {
          dn = dual_norm_eval(n, xsub);
        }
        margin = std::min(margin, tt - dn);
      }
      break;
    }
    case ConeFamily::Cp:
    case ConeFamily::Cpp:
      throw InputError("dual_membership: unsupported family (copositive duals)");
  }
  return {margin >= -tol::psd * scale, margin};
}

// ---------------------------------------------------------------------------
// primal membership via the max-margin decomposition program

struct PrimalMembership {
  bool member = false;
  double margin = 0;
  std::optional<Decomposition> decomposition;
};

namespace detail_cones {

/// Pairs (i<=j, 0-based) covered by at least one tuple.
inline std::vector<char> covered_pairs(const ConeSpec& spec) {
  std::vector<char> cov(SymMatrix::packed_size(spec.d), 0);
  SymMatrix probe(spec.d);
  for (const auto& t : spec.J.tuples)
    for (int p = 0; p < t.size(); ++p)
      for (int q = p; q < t.size(); ++q)
        cov[probe.index(t.zero_based(p), t.zero_based(q))] = 1;
  return cov;
}

}  // namespace detail_cones

/// Solves max delta s.t. X = sum lift(M_s), M_s - delta*E in the base cone
/// (E = I for psd blocks, the order unit e1 for soc blocks). Membership iff
/// the optimum beats -tol::psd * scale.
inline PrimalMembership primal_margin(const SymMatrix& x, const ConeSpec& spec,
                                      const ipm::Options& opts = {}) {
  spec.validate();
  if (spec.family != ConeFamily::Psd && spec.family != ConeFamily::Soc)
    throw InputError("primal_margin: supported families are psd and soc");
  if (x.dim() != spec.d) throw InputError("primal_margin: matrix dim != spec.d");
  const double scale = psd_scale(x);
  const double inf = std::numeric_limits<double>::infinity();

  // entries outside the union of tuple supports must vanish
  const auto cov = detail_cones::covered_pairs(spec);
  for (int i = 0; i < spec.d; ++i)
    for (int j = i; j < spec.d; ++j)
      if (!cov[x.index(i, j)] && std::abs(x(i, j)) > 1e-12 * scale)
        return {false, -inf, std::nullopt};
  if (spec.family == ConeFamily::Soc && x.max_offdiag_abs() > 1e-9 * scale)
    return {false, -inf, std::nullopt};

  const int nt = spec.J.size();
  const int bk = spec.family == ConeFamily::Psd ? SymMatrix::packed_size(spec.k) : spec.k;
  const int nv = nt * bk + 1;  // + delta
  const int dcol = nv - 1;

  ipm::Program prog;
  prog.nvars = nv;
  prog.c = Eigen::VectorXd::Zero(nv);
  prog.c[dcol] = -1.0;  // max delta

  // rows: covered packed entries (psd) or diagonal entries (soc)
  std::vector<int> rows;
  if (spec.family == ConeFamily::Psd) {
    for (int e = 0; e < SymMatrix::packed_size(spec.d); ++e)
      if (cov[e]) rows.push_back(e);
  } else {
    SymMatrix probe(spec.d);
    for (int i = 0; i < spec.d; ++i)
      if (cov[probe.index(i, i)]) rows.push_back(i);
      else if (std::abs(x(i, i)) > 1e-12 * scale) return {false, -inf, std::nullopt};
  }
  const int p = static_cast<int>(rows.size());
  prog.G = Eigen::MatrixXd::Zero(p, nv);
  prog.h = Eigen::VectorXd::Zero(p);
  std::vector<int> row_of(SymMatrix::packed_size(spec.d), -1);
  if (spec.family == ConeFamily::Psd) {
    for (int r = 0; r < p; ++r) row_of[rows[r]] = r;
    for (int r = 0; r < p; ++r) prog.h[r] = x.upper()[rows[r]];
  } else {
    for (int r = 0; r < p; ++r) prog.h[r] = x(rows[r], rows[r]);
  }

  // variables are the shifted blocks N_s = M_s - delta * E; delta appears
  // only in the equality rows (keeps every block an eliminable pure slice)
  Eigen::VectorXd shift;  // E in block coordinates
  if (spec.family == ConeFamily::Psd) {
    shift = detail::packed_identity(spec.k);
  } else {
    shift = Eigen::VectorXd::Zero(spec.k);
    shift[0] = 1.0;
  }

  SymMatrix probe(spec.d);
  for (int s = 0; s < nt; ++s) {
    const IndexTuple& t = spec.J.tuples[s];
    ipm::Block b;
    b.kind = spec.family == ConeFamily::Psd ? ipm::BlockKind::PsdPacked : ipm::BlockKind::Soc;
    b.dim = spec.k;
    b.cols.resize(bk);
    for (int c = 0; c < bk; ++c) b.cols[c] = s * bk + c;
    prog.blocks.push_back(std::move(b));
    // equality coefficients: block coord -> ambient entry, delta via E
    if (spec.family == ConeFamily::Psd) {
      int c = 0;
      for (int pp = 0; pp < spec.k; ++pp)
        for (int qq = pp; qq < spec.k; ++qq, ++c) {
          const int r = row_of[probe.index(t.zero_based(pp), t.zero_based(qq))];
          prog.G(r, s * bk + c) += 1.0;
          prog.G(r, dcol) += shift[c];
        }
    } else {
      for (int c = 0; c < spec.k; ++c) {
        const int amb = t.zero_based(c);
        for (int r = 0; r < p; ++r)
          if (rows[r] == amb) {
            prog.G(r, s * bk + c) += 1.0;
            prog.G(r, dcol) += shift[c];
          }
      }
    }
  }

  // strictly feasible start: least-squares blocks at delta = 0, then shift
  Eigen::VectorXd v0(nv);
  {
    Eigen::MatrixXd gm = prog.G.leftCols(nv - 1);
    Eigen::VectorXd m = gm.transpose() *
                        Eigen::LDLT<Eigen::MatrixXd>(gm * gm.transpose()).solve(prog.h);
    const double resid = (gm * m - prog.h).norm();
    if (resid > 1e-8 * std::max(1.0, prog.h.norm())) return {false, -inf, std::nullopt};
    double low = 0;
    for (int s = 0; s < nt; ++s) {
      const Eigen::VectorXd u = m.segment(s * bk, bk);
      if (spec.family == ConeFamily::Psd) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::unpack_sym(spec.k, u),
                                                          Eigen::EigenvaluesOnly);
        low = std::min(low, es.eigenvalues().minCoeff());
      } else {
        low = std::min(low, spec.k >= 2 ? u[0] - u.tail(spec.k - 1).norm() : u[0]);
      }
    }
    const double d0 = low - 1.0 - 1e-3 * scale;
    v0.head(nv - 1) = m;
    for (int s = 0; s < nt; ++s) v0.segment(s * bk, bk) -= d0 * shift;
    v0[dcol] = d0;
  }

  auto res = ipm::solve(prog, opts, v0);
  if (res.status == ipm::Status::NumericalFailure || res.status == ipm::Status::MaxIter)
    throw NumericalError("primal_margin: solver failed (" + res.message + ")");
  if (res.status != ipm::Status::Optimal)
    return {false, -inf, std::nullopt};

  const double delta = -res.objective;
  Decomposition dec;
  dec.d = spec.d;
  for (int s = 0; s < nt; ++s) {
    const Eigen::VectorXd u = res.v.segment(s * bk, bk) + delta * shift;
    SymMatrix m(spec.k);
    if (spec.family == ConeFamily::Psd) {
      int c = 0;
      for (int pp = 0; pp < spec.k; ++pp)
        for (int qq = pp; qq < spec.k; ++qq, ++c) m.at(pp, qq) = u[c];
    } else {
      for (int c = 0; c < spec.k; ++c) m.at(c, c) = u[c];
    }
    dec.blocks.emplace_back(spec.J.tuples[s], std::move(m));
  }
  return {delta >= -tol::psd * scale, delta, std::move(dec)};
}

// ---------------------------------------------------------------------------
// SDD test with constructive witness

struct SddResult {
  bool sdd = false;
  double margin = 0;  // lambda_min of the comparison matrix
  std::optional<std::vector<double>> witness;
};

namespace detail_cones {

/// Connected components of the off-diagonal nonzero pattern (union-find).
inline std::vector<int> components(const SymMatrix& a) {
  const int d = a.dim();
  std::vector<int> parent(d);
  for (int i = 0; i < d; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (a(i, j) != 0.0) parent[find(i)] = find(j);
  std::vector<int> comp(d);
  for (int i = 0; i < d; ++i) comp[i] = find(i);
  return comp;
}

/// Perron vector of an irreducible nonnegative symmetric matrix by shifted
/// power iteration with an all-ones start.
inline Eigen::VectorXd perron_vector(const Eigen::MatrixXd& b) {
  const int m = static_cast<int>(b.rows());
  if (m == 1) return Eigen::VectorXd::Ones(1);
  const double sigma = b.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m) / std::sqrt(static_cast<double>(m));
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = b * v + sigma * v;
    w /= w.norm();
    if ((w - v).lpNorm<Eigen::Infinity>() < 1e-12) return w;
    v = w;
  }
  return v;
}

}  // namespace detail_cones

/// A is SDD iff its comparison matrix is PSD. When true, also returns a
/// positive scaling d with d_i a_ii >= sum_j d_j |a_ij| built from Perron
/// vectors of the irreducible blocks of lambda_max(M(A)) I - M(A).
inline SddResult is_sdd(const SymMatrix& a) {
  const SymMatrix m = comparison_matrix(a);
  const double margin = psd_margin(m);
  if (margin < -tol::psd * psd_scale(m)) return {false, margin, std::nullopt};

  const Eigen::VectorXd ev = sym_eigenvalues(m);
  const double s = ev.maxCoeff();
  const int d = a.dim();
  Eigen::MatrixXd b = s * Eigen::MatrixXd::Identity(d, d) - m.dense();
  const auto comp = detail_cones::components(a);
  std::vector<double> witness(d, 0.0);
  for (int root = 0; root < d; ++root) {
    std::vector<int> members;
    for (int i = 0; i < d; ++i)
      if (comp[i] == root) members.push_back(i);
    if (members.empty()) continue;
    Eigen::MatrixXd sub(members.size(), members.size());
    for (size_t i = 0; i < members.size(); ++i)
      for (size_t j = 0; j < members.size(); ++j)
        sub(static_cast<int>(i), static_cast<int>(j)) = b(members[i], members[j]);
    const Eigen::VectorXd v = detail_cones::perron_vector(sub);
    for (size_t i = 0; i < members.size(); ++i)
      witness[members[i]] = std::max(std::abs(v[static_cast<int>(i)]), 1e-300);
  }
  const double wmax = *std::max_element(witness.begin(), witness.end());
  for (double& w : witness) w /= wmax;
  return {true, margin, std::move(witness)};
}

// ---------------------------------------------------------------------------
// constructive factor-width-2 decomposition of an SDD matrix

inline Decomposition factor_width2_decompose(const SymMatrix& a) {
  const int d = a.dim();
  if (d == 1) {
    if (a(0, 0) < -tol::psd) throw InputError("factor_width2_decompose: matrix is not SDD");
    Decomposition dec;
    dec.d = 1;
    dec.blocks.emplace_back(IndexTuple{1}, a);
    return dec;
  }
  const auto sdd = is_sdd(a);
  if (!sdd.sdd) throw InputError("factor_width2_decompose: matrix is not SDD");
  const auto& w = *sdd.witness;

  std::map<std::pair<int, int>, SymMatrix> blocks;  // 0-based pairs
  auto block = [&](int i, int j) -> SymMatrix& {
    auto it = blocks.find({i, j});
    if (it == blocks.end()) it = blocks.emplace(std::make_pair(i, j), SymMatrix(2)).first;
    return it->second;
  };
  std::vector<double> offdiag_load(d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      if (a(i, j) == 0.0) continue;
      SymMatrix& m = block(i, j);
      m.at(0, 1) = a(i, j);
      m.at(0, 0) = (w[j] / w[i]) * std::abs(a(i, j));
      m.at(1, 1) = (w[i] / w[j]) * std::abs(a(i, j));
      offdiag_load[i] += m(0, 0);
      offdiag_load[j] += m(1, 1);
    }
  for (int i = 0; i < d; ++i) {
    const double surplus = a(i, i) - offdiag_load[i];
    const int host = i == 0 ? 1 : i;  // pair (0, i) or (0, 1) for i = 0
    SymMatrix& m = block(0, host);
    m.at(i == 0 ? 0 : 1, i == 0 ? 0 : 1) += surplus;
  }
  Decomposition dec;
  dec.d = d;
  for (auto& [ij, m] : blocks)
    dec.blocks.emplace_back(IndexTuple{ij.first + 1, ij.second + 1}, std::move(m));
  return dec;
}

// ---------------------------------------------------------------------------
// certificate checking

struct DecompositionCheck {
  bool valid = false;
  double recon_err = 0;
  double min_block_margin = 0;
};

inline DecompositionCheck verify_decomposition(const SymMatrix& x, const Decomposition& dec,
                                               const ConeSpec& spec) {
  if (dec.d != x.dim() || x.dim() != spec.d)
    throw InputError("verify_decomposition: dimension mismatch");
  DecompositionCheck out;
  SymMatrix recon(spec.d);
  bool blocks_ok = true;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& [t, m] : dec.blocks) {
    if (t.size() != m.dim() || t.max_index() > spec.d)
      throw InputError("verify_decomposition: block/tuple shape mismatch");
    if (!spec.J.contains(t)) blocks_ok = false;
    add_lift(recon, m, t);
    double bm;
    if (spec.family == ConeFamily::Soc) {
      bm = soc_margin(m.diagonal());
      if (m.max_offdiag_abs() > 1e-9 * psd_scale(m)) blocks_ok = false;
    } else {
      bm = psd_margin(m);
    }
    min_margin = std::min(min_margin, bm);
    if (bm < -tol::psd * psd_scale(m)) blocks_ok = false;
  }
  if (dec.blocks.empty()) min_margin = 0;
  out.recon_err = (x - recon).frobenius();
  out.min_block_margin = min_margin;
  out.valid = blocks_ok && out.recon_err <= tol::recon * psd_scale(x);
  return out;
}

// ---------------------------------------------------------------------------
// strict-nesting certificates

/// Bordered matrix [sqrt(k-1), 1'; 1, sqrt(k-1) I]: in ((S+^d)_k)* and
/// outside ((S+^d)_{k+1})*.
inline SymMatrix nesting_certificate_psd(int d, int k) {
  if (k < 1 || k >= d) throw InputError("nesting_certificate: need 1 <= k < d");
  const double r = std::sqrt(static_cast<double>(k - 1));
  SymMatrix a(d);
  a.at(0, 0) = r;
  for (int j = 1; j < d; ++j) {
    a.at(0, j) = 1.0;
    a.at(j, j) = r;
  }
  return a;
}

/// Vector (sqrt(k-1), 1, ..., 1): in (SOC^d_k)* and outside (SOC^d_{k+1})*.
inline std::vector<double> nesting_certificate_soc(int d, int k) {
  if (k < 1 || k >= d) throw InputError("nesting_certificate: need 1 <= k < d");
  std::vector<double> v(d, 1.0);
  v[0] = std::sqrt(static_cast<double>(k - 1));
  return v;
}

// ---------------------------------------------------------------------------
// embedding-property audits

/// A sampleable cone family with a membership margin, driving the
/// truncation/lift audits. Margins are accepted when >= -tol::psd * scale.
struct EmbeddingProbe {
  std::function<SymMatrix(int, std::mt19937_64&)> sample;
  std::function<double(const SymMatrix&)> margin;
  IndexMap map = IndexMap::Full;
};

struct EmbeddingReport {
  std::string family;
  int d = 0;
  int k = 0;
  int samples = 0;
  std::uint64_t seed = 0;
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

inline EmbeddingReport verify_embedding(const EmbeddingProbe& probe, const std::string& label,
                                        int d, int k, int samples, std::uint64_t seed) {
  if (k < 1 || k > d) throw InputError("verify_embedding: need 1 <= k <= d");
  EmbeddingReport rep{label, d, k, samples, seed, 0,
                      std::numeric_limits<double>::infinity()};
  std::mt19937_64 rng(seed);
  const IndexFamily fam = enumerate_tuples(d, k, probe.map);
  std::uniform_int_distribution<int> pick(0, fam.size() - 1);
  auto check = [&](const SymMatrix& m) {
    const double mg = probe.margin(m);
    rep.worst_margin = std::min(rep.worst_margin, mg);
    if (mg < -tol::psd * psd_scale(m)) rep.violations++;
  };
  for (int it = 0; it < samples; ++it) {
    const IndexTuple& t = fam.tuples[pick(rng)];
    check(truncate(probe.sample(d, rng), t));
    check(lift(probe.sample(k, rng), t, d));
  }
  return rep;
}

enum class EmbedFamily { Psd, Sdd, Dd, Soc, PsdOrder2 };

namespace detail_cones {

inline Eigen::MatrixXd random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

inline SymMatrix sample_psd(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd q = random_orthogonal(d, rng);
  Eigen::VectorXd lam(d);
  for (int i = 0; i < d; ++i) lam[i] = u(rng);
  return SymMatrix::from_dense(q * lam.asDiagonal() * q.transpose());
}

inline SymMatrix sample_dd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SymMatrix a(d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) a.at(i, j) = g(rng);
  for (int i = 0; i < d; ++i) {
    double off = 0;
    for (int j = 0; j < d; ++j)
      if (j != i) off += std::abs(a(i, j));
    a.at(i, i) = off + u(rng);
  }
  return a;
}

inline SymMatrix sample_sdd(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  SymMatrix b = sample_dd(d, rng);
  std::vector<double> scl(d);
  for (int i = 0; i < d; ++i) scl[i] = std::exp(u(rng));
  SymMatrix a(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) a.at(i, j) = scl[i] * b(i, j) * scl[j];
  return a;
}

inline SymMatrix sample_soc(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<double> v(d);
  double nrm = 0;
  for (int i = 1; i < d; ++i) {
    v[i] = g(rng);
    nrm += v[i] * v[i];
  }
  v[0] = std::sqrt(nrm) + std::abs(g(rng));
  return SymMatrix::diag(v);
}

}  // namespace detail_cones

inline EmbeddingProbe embedding_probe(EmbedFamily fam) {
  EmbeddingProbe p;
  switch (fam) {
    case EmbedFamily::Psd:
      p.sample = detail_cones::sample_psd;
      p.margin = [](const SymMatrix& m) { return psd_margin(m); };
      break;
    case EmbedFamily::Dd:
      p.sample = detail_cones::sample_dd;
      p.margin = [](const SymMatrix& m) { return dd_margin(m); };
      break;
    case EmbedFamily::Sdd:
    case EmbedFamily::PsdOrder2:
      p.sample = detail_cones::sample_sdd;
      p.margin = [](const SymMatrix& m) { return psd_margin(comparison_matrix(m)); };
      break;
    case EmbedFamily::Soc:
      p.sample = detail_cones::sample_soc;
      p.margin = [](const SymMatrix& m) { return soc_margin(m.diagonal()); };
      p.map = IndexMap::Soc;
      break;
  }
  return p;
}

inline const char* to_string(EmbedFamily f) {
  switch (f) {
    case EmbedFamily::Psd: return "psd";
    case EmbedFamily::Sdd: return "sdd";
    case EmbedFamily::Dd: return "dd";
    case EmbedFamily::Soc: return "soc";
    case EmbedFamily::PsdOrder2: return "psd-order-2";
  }
  return "?";
}

inline EmbeddingReport verify_embedding(EmbedFamily fam, int d, int k, int samples,
                                        std::uint64_t seed) {
  return verify_embedding(embedding_probe(fam), to_string(fam), d, k, samples, seed);
}

}  // namespace kocp
