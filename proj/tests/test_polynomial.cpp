#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "kocp/polynomial.hpp"

using namespace kocp;

namespace {

Polynomial motzkin() {
  Polynomial p(3);
  p.add_term({4, 2, 0}, 1);
  p.add_term({2, 4, 0}, 1);
  p.add_term({2, 2, 2}, -3);
  p.add_term({0, 0, 6}, 1);
  return p;
}

Polynomial binomial_square() {
  Polynomial p(2);
  p.add_term({2, 0}, 1);
  p.add_term({1, 1}, 2);
  p.add_term({0, 2}, 1);
  return p;
}

SymMatrix random_gram(int h, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd f(h, h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < h; ++j) f(i, j) = g(rng);
  return SymMatrix::from_dense(f.transpose() * f / h);
}

}  // namespace

TEST_CASE("monomial bases: sizes and graded-lex order") {
  const auto b21 = monomial_basis(2, 1);
  REQUIRE(b21.size() == 3);
  CHECK(b21.monomials[0] == Exponent{0, 0});
  CHECK(b21.monomials[1] == Exponent{1, 0});
  CHECK(b21.monomials[2] == Exponent{0, 1});

  const auto b12 = monomial_basis(1, 2);
  REQUIRE(b12.size() == 3);
  CHECK(b12.monomials[2] == Exponent{2});

  CHECK(monomial_basis(3, 2).size() == 10);
  CHECK_THROWS_AS(monomial_basis(12, 6), InputError);  // over the size cap
}

TEST_CASE("gram_to_poly expansion anchors and linearity") {
  MonomialBasis basis;
  basis.nvars = 2;
  basis.half_degree = 1;
  basis.monomials = {{1, 0}, {0, 1}};  // [x1, x2]
  const auto p = gram_to_poly(SymMatrix::from_rows({{1, 1}, {1, 1}}), basis);
  CHECK(p.terms().at({2, 0}) == 1);
  CHECK(p.terms().at({1, 1}) == 2);
  CHECK(p.terms().at({0, 2}) == 1);

  const auto full = monomial_basis(2, 1);
  const auto sq = gram_to_poly(SymMatrix::identity(3), full);
  CHECK(sq.terms().at({0, 0}) == 1);
  CHECK(sq.terms().at({2, 0}) == 1);
  CHECK(sq.terms().at({0, 2}) == 1);

  CHECK(gram_to_poly(SymMatrix(3), full).is_zero());

  std::mt19937_64 rng(3);
  const auto a = random_gram(3, rng);
  const auto b = random_gram(3, rng);
  const auto pa = gram_to_poly(a, full);
  const auto pb = gram_to_poly(b, full);
  const auto pab = gram_to_poly(a + b, full);
  for (const auto& [e, c] : pab.terms()) {
    double expect = 0;
    if (pa.terms().count(e)) expect += pa.terms().at(e);
    if (pb.terms().count(e)) expect += pb.terms().at(e);
    CHECK(c == Catch::Approx(expect).margin(1e-14));
  }
}

TEST_CASE("(x1+x2)^2 certifies at order 2 but not order 1") {
  const auto p = binomial_square();
  const auto r1 = certify_kddsos(p, 1);
  CHECK_FALSE(r1.feasible);

  const auto r2 = certify_kddsos(p, 2);
  REQUIRE(r2.feasible);
  REQUIRE(r2.certificate);
  // the Gram matrix on the homogeneous basis [x1,x2] is unique
  const auto gram = r2.certificate->gram();
  CHECK(gram(0, 0) == Catch::Approx(1.0).margin(1e-6));
  CHECK(gram(0, 1) == Catch::Approx(1.0).margin(1e-6));
  const auto chk = verify_certificate(p, *r2.certificate);
  CHECK(chk.valid);
}

TEST_CASE("x1^2 - x1 x2 + x2^2 is order-2 certifiable (its Gram is SDD)") {
  Polynomial p(2);
  p.add_term({2, 0}, 1);
  p.add_term({1, 1}, -1);
  p.add_term({0, 2}, 1);
  const auto r = certify_kddsos(p, 2);
  REQUIRE(r.feasible);
  CHECK(verify_certificate(p, *r.certificate).valid);
}

TEST_CASE("the Motzkin polynomial is not SOS: infeasible at the full order") {
  const auto mz = motzkin();
  const auto basis = certification_basis(mz);
  CHECK(basis.size() == 10);  // homogeneous degree-3 monomials in 3 vars
  const auto r = certify_kddsos(mz, basis.size());
  CHECK_FALSE(r.feasible);
  CHECK(certify_kddsos(mz, 1).feasible == false);
  CHECK(certify_kddsos(mz, 2).feasible == false);
}

TEST_CASE("feasibility is monotone in the order") {
  std::mt19937_64 rng(5);
  const auto basis = monomial_basis(2, 1);
  for (int it = 0; it < 6; ++it) {
    const auto p = gram_to_poly(random_gram(3, rng), basis);
    bool before = false;
    for (int k = 1; k <= 3; ++k) {
      const bool now = certify_kddsos(p, k).feasible;
      if (before) CHECK(now);
      before = now;
    }
    CHECK(before);  // SOS by construction, so k = h must accept
  }
}

TEST_CASE("returned certificates expand back to the target and are nonnegative") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int it = 0; it < 6; ++it) {
    const auto basis = monomial_basis(2, 1);
    const auto p = gram_to_poly(random_gram(3, rng), basis);
    const auto r = certify_kddsos(p, 2 + (it % 2));
    if (!r.feasible) continue;
    const auto chk = verify_certificate(p, *r.certificate);
    CHECK(chk.valid);
    CHECK(chk.max_coef_err <= 1e-7 * std::max(1.0, p.max_abs_coef()));
    for (int pt = 0; pt < 200; ++pt) {
      std::vector<double> x{u(rng), u(rng)};
      CHECK(p.eval(x) >= -1e-9 * (1.0 + p.max_abs_coef()));
    }
  }
}

TEST_CASE("a perturbed certificate fails verification with a matching error") {
  const auto p = binomial_square();
  auto r = certify_kddsos(p, 2);
  REQUIRE(r.feasible);
  auto cert = *r.certificate;
  cert.decomposition.blocks[0].second.at(0, 0) += 1e-3;
  const auto chk = verify_certificate(p, cert);
  CHECK_FALSE(chk.valid);
  CHECK(chk.max_coef_err == Catch::Approx(1e-3).epsilon(0.05));
}

TEST_CASE("the zero polynomial carries an empty certificate") {
  Polynomial z(2);
  const auto r = certify_kddsos(z, 2);
  REQUIRE(r.feasible);
  const auto chk = verify_certificate(z, *r.certificate);
  CHECK(chk.valid);
  CHECK(chk.max_coef_err == 0.0);
}

TEST_CASE("non-psd certificate blocks are rejected as errors") {
  const auto p = binomial_square();
  GramCertificate cert;
  cert.basis = certification_basis(p);
  cert.decomposition.d = cert.basis.size();
  cert.decomposition.blocks.emplace_back(IndexTuple{1, 2},
                                         SymMatrix::from_rows({{1, 2}, {2, 1}}));
  CHECK_THROWS_AS(verify_certificate(p, cert), InputError);
}

TEST_CASE("odd-degree targets are rejected") {
  Polynomial p(1);
  p.add_term({3}, 1.0);
  CHECK_THROWS_AS(certify_kddsos(p, 1), InputError);
}
