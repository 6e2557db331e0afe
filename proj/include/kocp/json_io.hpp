#pragma once

// JSON (de)serialization for every external file format: matrices,
// decompositions, cone specs, problems, solutions, polynomials,
// certificates, norm-cone points and SOCP data.

#include <json.hpp>
#include <string>
#include <variant>
#include <vector>

#include "kocp/polynomial.hpp"
#include "kocp/solver.hpp"
#include "kocp/special_cones.hpp"

namespace kocp::io {

using nlohmann::json;

namespace detail_io {

inline const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing field \"") + key + "\"");
  return *it;
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

}  // namespace detail_io

// --- symmetric matrices -----------------------------------------------------

inline json to_json(const SymMatrix& a) {
  return json{{"dim", a.dim()}, {"upper", a.upper()}};
}

inline SymMatrix matrix_from_json(const json& j) {
  const int dim = detail_io::get<int>(j, "dim");
  auto upper = detail_io::get<std::vector<double>>(j, "upper");
  return SymMatrix(dim, std::move(upper));
}

// --- decompositions ----------------------------------------------------------

inline json to_json(const Decomposition& dec) {
  json blocks = json::array();
  for (const auto& [t, m] : dec.blocks)
    blocks.push_back(json{{"tuple", t.indices()}, {"upper", m.upper()}});
  return json{{"d", dec.d}, {"blocks", std::move(blocks)}};
}

inline Decomposition decomposition_from_json(const json& j) {
  Decomposition dec;
  dec.d = detail_io::get<int>(j, "d");
  for (const auto& bj : detail_io::field(j, "blocks")) {
    IndexTuple t(detail_io::get<std::vector<int>>(bj, "tuple"));
    auto upper = detail_io::get<std::vector<double>>(bj, "upper");
    dec.blocks.emplace_back(std::move(t), SymMatrix(t.size(), std::move(upper)));
  }
  return dec;
}

// --- cone specs ---------------------------------------------------------------

inline json to_json(const ConeSpec& spec) {
  json j{{"family", to_string(spec.family)}, {"d", spec.d}, {"k", spec.k}};
  if (spec.norm) j["norm"] = spec.norm->to_string();
  const bool full = spec.family == ConeFamily::Soc || spec.family == ConeFamily::Norm
                        ? spec.J.size() == detail::binomial(spec.d - 1, spec.k - 1)
                        : spec.full_J();
  if (full) {
    j["J"] = spec.family == ConeFamily::Soc || spec.family == ConeFamily::Norm ? "soc" : "full";
  } else {
    json tuples = json::array();
    for (const auto& t : spec.J.tuples) tuples.push_back(t.indices());
    j["J"] = std::move(tuples);
  }
  return j;
}

inline ConeSpec cone_from_json(const json& j, bool force_size = false) {
  const std::string fam = detail_io::get<std::string>(j, "family");
  const int d = detail_io::get<int>(j, "d");
  const int k = detail_io::get<int>(j, "k");
  ConeFamily family;
  if (fam == "psd") family = ConeFamily::Psd;
  else if (fam == "soc") family = ConeFamily::Soc;
  else if (fam == "cp") family = ConeFamily::Cp;
  else if (fam == "cpp") family = ConeFamily::Cpp;
  else if (fam == "norm") family = ConeFamily::Norm;
  else throw InputError("unknown cone family: " + fam);

  IndexFamily J;
  const json& jj = detail_io::field(j, "J");
  if (jj.is_string()) {
    const std::string s = jj.get<std::string>();
    if (s == "full") J = enumerate_tuples(d, k, IndexMap::Full, force_size);
    else if (s == "soc") J = enumerate_tuples(d, k, IndexMap::Soc, force_size);
    else throw InputError("J must be \"full\", \"soc\" or a tuple list");
  } else {
    std::vector<IndexTuple> tuples;
    for (const auto& tj : jj) tuples.emplace_back(tj.get<std::vector<int>>());
    J = IndexFamily(d, k, std::move(tuples));
    if (J.size() > tol::tuple_cap && !force_size)
      throw InputError("|J| exceeds the size cap; pass --force-size");
  }
  ConeSpec spec{family, d, k, std::move(J), {}};
  if (j.contains("norm")) spec.norm = NormDescriptor::parse(j["norm"].get<std::string>());
  spec.validate();
  return spec;
}

// --- problems ------------------------------------------------------------------

using ProblemVariant = std::variant<StandardProblem, InequalityProblem>;

inline json to_json(const StandardProblem& p) {
  json cons = json::array();
  for (const auto& [a, b] : p.constraints) cons.push_back(json{{"A", to_json(a)}, {"b", b}});
  return json{{"form", "standard"},
              {"side", to_string(p.side)},
              {"cone", to_json(p.cone)},
              {"A0", to_json(p.A0)},
              {"constraints", std::move(cons)}};
}

inline json to_json(const InequalityProblem& p) {
  json ps = json::array();
  for (const auto& m : p.P) ps.push_back(to_json(m));
  return json{{"form", "inequality"}, {"side", to_string(p.side)},
              {"cone", to_json(p.cone)}, {"q", p.q},
              {"P0", to_json(p.P0)},    {"P", std::move(ps)}};
}

inline ProblemVariant problem_from_json(const json& j, bool force_size = false) {
  const std::string form = detail_io::get<std::string>(j, "form");
  const std::string side_s = detail_io::get<std::string>(j, "side");
  ProblemSide side;
  if (side_s == "primal") side = ProblemSide::PrimalCone;
  else if (side_s == "dual") side = ProblemSide::DualCone;
  else throw InputError("side must be \"primal\" or \"dual\"");
  ConeSpec cone = cone_from_json(detail_io::field(j, "cone"), force_size);
  if (form == "standard") {
    StandardProblem p;
    p.cone = std::move(cone);
    p.side = side;
    p.A0 = matrix_from_json(detail_io::field(j, "A0"));
    for (const auto& cj : detail_io::field(j, "constraints"))
      p.constraints.emplace_back(matrix_from_json(detail_io::field(cj, "A")),
                                 detail_io::get<double>(cj, "b"));
    return p;
  }
  if (form == "inequality") {
    InequalityProblem p;
    p.cone = std::move(cone);
    p.side = side;
    p.q = detail_io::get<std::vector<double>>(j, "q");
    p.P0 = matrix_from_json(detail_io::field(j, "P0"));
    for (const auto& pj : detail_io::field(j, "P")) p.P.push_back(matrix_from_json(pj));
    return p;
  }
  throw InputError("form must be \"standard\" or \"inequality\"");
}

// --- solutions -------------------------------------------------------------------

inline json to_json(const KKTReport& r) {
  return json{{"primal_eq_res", r.primal_eq_res},
              {"primal_cone_margin", r.primal_cone_margin},
              {"dual_cone_margin", r.dual_cone_margin},
              {"complementarity", r.complementarity},
              {"dual_eq_res", r.dual_eq_res},
              {"gap", r.gap}};
}

inline json to_json(const Solution& s) {
  json j{{"status", to_string(s.status)},
         {"objective", s.objective},
         {"iterations", s.iterations},
         {"gap_estimate", s.gap_estimate}};
  if (s.X) j["X"] = to_json(*s.X);
  if (s.Z) j["Z"] = to_json(*s.Z);
  if (!s.y.empty()) j["y"] = s.y;
  if (s.decomposition) j["decomposition"] = to_json(*s.decomposition);
  if (!s.message.empty()) j["message"] = s.message;
  return j;
}

// --- polynomials -------------------------------------------------------------------

inline json to_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& [e, c] : p.terms()) terms.push_back(json{{"exp", e}, {"coef", c}});
  return json{{"nvars", p.nvars()}, {"terms", std::move(terms)}};
}

inline Polynomial polynomial_from_json(const json& j) {
  Polynomial p(detail_io::get<int>(j, "nvars"));
  for (const auto& tj : detail_io::field(j, "terms"))
    p.add_term(detail_io::get<std::vector<int>>(tj, "exp"), detail_io::get<double>(tj, "coef"));
  return p;
}

inline json to_json(const GramCertificate& cert) {
  json basis = json::array();
  for (const auto& e : cert.basis.monomials) basis.push_back(e);
  return json{{"nvars", cert.basis.nvars},
              {"half_degree", cert.basis.half_degree},
              {"basis", std::move(basis)},
              {"decomposition", to_json(cert.decomposition)}};
}

inline GramCertificate certificate_from_json(const json& j) {
  GramCertificate cert;
  cert.basis.nvars = detail_io::get<int>(j, "nvars");
  cert.basis.half_degree = detail_io::get<int>(j, "half_degree");
  for (const auto& ej : detail_io::field(j, "basis"))
    cert.basis.monomials.push_back(ej.get<Exponent>());
  cert.decomposition = decomposition_from_json(detail_io::field(j, "decomposition"));
  return cert;
}

// --- norm-cone points ----------------------------------------------------------------

inline json to_json(const NormConePoint& pt) {
  json j{{"t", pt.t}};
  if (pt.X) j["X"] = to_json(*pt.X);
  else j["x"] = pt.x;
  return j;
}

inline NormConePoint normcone_point_from_json(const json& j) {
  NormConePoint pt;
  pt.t = detail_io::get<double>(j, "t");
  if (j.contains("X")) pt.X = matrix_from_json(j["X"]);
  else if (j.contains("x")) pt.x = detail_io::get<std::vector<double>>(j, "x");
  else throw InputError("norm-cone point needs \"x\" or \"X\"");
  return pt;
}

// --- SOCP data ----------------------------------------------------------------------

inline SocpProblem socp_from_json(const json& j) {
  SocpProblem socp;
  socp.objective = detail_io::get<std::vector<double>>(j, "objective");
  const int n = static_cast<int>(socp.objective.size());
  for (const auto& cj : detail_io::field(j, "soc_constraints")) {
    SocpProblem::Constraint con;
    const auto b = detail_io::get<std::vector<double>>(cj, "b");
    const auto c = detail_io::get<std::vector<double>>(cj, "c");
    con.d = detail_io::get<double>(cj, "d");
    const int mrows = static_cast<int>(b.size());
    con.b = Eigen::Map<const Eigen::VectorXd>(b.data(), mrows);
    con.c = Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
    con.A = Eigen::MatrixXd::Zero(mrows, n);
    if (cj.contains("A")) {
      const auto& aj = cj["A"];
      if (static_cast<int>(aj.size()) != mrows) throw InputError("SOC constraint: A rows != |b|");
      for (int r = 0; r < mrows; ++r) {
        const auto row = aj[r].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != n) throw InputError("SOC constraint: A cols != |objective|");
        for (int cidx = 0; cidx < n; ++cidx) con.A(r, cidx) = row[cidx];
      }
    }
    socp.constraints.push_back(std::move(con));
  }
  socp.B.resize(0, n);
  if (j.contains("eq")) {
    const auto& ej = j["eq"];
    const auto e = detail_io::get<std::vector<double>>(ej, "e");
    const int pe = static_cast<int>(e.size());
    socp.e = Eigen::Map<const Eigen::VectorXd>(e.data(), pe);
    socp.B = Eigen::MatrixXd::Zero(pe, n);
    const auto& bj = detail_io::field(ej, "B");
    if (static_cast<int>(bj.size()) != pe) throw InputError("eq: B rows != |e|");
    for (int r = 0; r < pe; ++r) {
      const auto row = bj[r].get<std::vector<double>>();
      if (static_cast<int>(row.size()) != n) throw InputError("eq: B cols != |objective|");
      for (int cidx = 0; cidx < n; ++cidx) socp.B(r, cidx) = row[cidx];
    }
  }
  return socp;
}

}  // namespace kocp::io
