#include <catch2/catch_amalgamated.hpp>

#include "kocp/json_io.hpp"

using namespace kocp;
using kocp::io::json;

TEST_CASE("matrix json roundtrip and schema") {
  const auto a = SymMatrix::from_rows({{1, 2, 3}, {2, 4, 5}, {3, 5, 6}});
  const json j = io::to_json(a);
  CHECK(j["dim"] == 3);
  CHECK(j["upper"].size() == 6);
  CHECK(io::matrix_from_json(j) == a);

  CHECK_THROWS_AS(io::matrix_from_json(json{{"dim", 3}}), InputError);
  CHECK_THROWS_AS(io::matrix_from_json(json{{"dim", 3}, {"upper", {1.0, 2.0}}}), InputError);
}

TEST_CASE("decomposition json roundtrip") {
  const auto a = SymMatrix::from_rows({{4, 2, 0}, {2, 2, 1}, {0, 1, 2}});
  const auto dec = factor_width2_decompose(a);
  const auto back = io::decomposition_from_json(io::to_json(dec));
  CHECK(back.d == dec.d);
  REQUIRE(back.blocks.size() == dec.blocks.size());
  CHECK((back.assemble() - a).frobenius() < 1e-12);
}

TEST_CASE("cone spec json: named maps, custom tuples, norms") {
  const auto psd = io::cone_from_json(json{{"family", "psd"}, {"d", 4}, {"k", 2}, {"J", "full"}});
  CHECK(psd.J.size() == 6);
  const auto soc = io::cone_from_json(json{{"family", "soc"}, {"d", 4}, {"k", 2}, {"J", "soc"}});
  CHECK(soc.J.size() == 3);
  const auto custom = io::cone_from_json(
      json{{"family", "psd"}, {"d", 3}, {"k", 2}, {"J", {{1, 2}, {2, 3}}}});
  CHECK(custom.J.size() == 2);
  const auto norm = io::cone_from_json(
      json{{"family", "norm"}, {"d", 4}, {"k", 2}, {"J", "soc"}, {"norm", "nuclear"}});
  REQUIRE(norm.norm);
  CHECK(norm.norm->to_string() == "nuclear");

  for (const auto& spec : {psd, soc, custom}) {
    const auto back = io::cone_from_json(io::to_json(spec));
    CHECK(back.family == spec.family);
    CHECK(back.J.size() == spec.J.size());
  }
  CHECK_THROWS_AS(
      io::cone_from_json(json{{"family", "bad"}, {"d", 3}, {"k", 2}, {"J", "full"}}),
      InputError);
}

TEST_CASE("problem json roundtrips both forms") {
  StandardProblem sp;
  sp.cone = ConeSpec::psd(2, 2);
  sp.A0 = SymMatrix::diag({1, 2});
  sp.constraints.emplace_back(SymMatrix::identity(2), 1.0);
  const auto v1 = io::problem_from_json(io::to_json(sp));
  REQUIRE(std::holds_alternative<StandardProblem>(v1));
  CHECK(std::get<StandardProblem>(v1).constraints.size() == 1);

  InequalityProblem iq;
  iq.cone = ConeSpec::psd(2, 2);
  iq.q = {1.0};
  iq.P0 = -1.0 * SymMatrix::identity(2);
  iq.P = {SymMatrix::identity(2)};
  const auto v2 = io::problem_from_json(io::to_json(iq));
  REQUIRE(std::holds_alternative<InequalityProblem>(v2));
  CHECK(std::get<InequalityProblem>(v2).q == iq.q);

  CHECK_THROWS_AS(io::problem_from_json(json{{"form", "weird"}, {"side", "primal"}}), InputError);
}

TEST_CASE("polynomial and certificate json roundtrips") {
  Polynomial p(2);
  p.add_term({2, 0}, 1);
  p.add_term({1, 1}, 2);
  p.add_term({0, 2}, 1);
  const auto back = io::polynomial_from_json(io::to_json(p));
  CHECK(back.terms() == p.terms());

  const auto cert = certify_kddsos(p, 2).certificate;
  REQUIRE(cert);
  const auto cback = io::certificate_from_json(io::to_json(*cert));
  CHECK(cback.basis.monomials == cert->basis.monomials);
  CHECK(verify_certificate(p, cback).valid);
}

TEST_CASE("norm-cone point json carries either carrier") {
  const auto v = io::normcone_point_from_json(json{{"t", 2.0}, {"x", {1.0, -1.0}}});
  CHECK(v.t == 2.0);
  CHECK(v.x.size() == 2);
  const auto m = io::normcone_point_from_json(
      json{{"t", 1.0}, {"X", io::to_json(SymMatrix::identity(2))}});
  REQUIRE(m.X);
  CHECK(m.X->dim() == 2);
  CHECK_THROWS_AS(io::normcone_point_from_json(json{{"t", 1.0}}), InputError);
}

TEST_CASE("socp json parses constraints and equalities") {
  const json j{{"objective", {1.0}},
               {"soc_constraints",
                {{{"A", {{0.0}, {0.0}}}, {"b", {1.0, 1.0}}, {"c", {1.0}}, {"d", 0.0}}}},
               {"eq", {{"B", {{1.0}}}, {"e", {2.0}}}}};
  const auto socp = io::socp_from_json(j);
  CHECK(socp.objective.size() == 1);
  REQUIRE(socp.constraints.size() == 1);
  CHECK(socp.constraints[0].b.size() == 2);
  CHECK(socp.B.rows() == 1);
}

TEST_CASE("solution json reports status, kkt and witnesses") {
  StandardProblem sp;
  sp.cone = ConeSpec::psd(2, 2);
  sp.A0 = SymMatrix::diag({1, 2});
  sp.constraints.emplace_back(SymMatrix::identity(2), 1.0);
  const auto sol = solve(sp);
  const json j = io::to_json(sol);
  CHECK(j["status"] == "optimal");
  CHECK(j.contains("X"));
  CHECK(j.contains("decomposition"));
  const json k = io::to_json(kkt_residuals(sp, sol));
  CHECK(k.contains("complementarity"));
  CHECK(k.contains("gap"));
}
