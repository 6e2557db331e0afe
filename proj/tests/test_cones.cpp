#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "kocp/cones.hpp"

using namespace kocp;

namespace {

SymMatrix random_sym(int d, std::mt19937_64& rng, double offdiag_scale = 1.0) {
  std::normal_distribution<double> g;
  SymMatrix a(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) a.at(i, j) = (i == j ? 1.0 : offdiag_scale) * g(rng);
  return a;
}

}  // namespace

TEST_CASE("dual membership of the bordered certificate") {
  const auto cert = nesting_certificate_psd(3, 2);
  CHECK(cert == SymMatrix::from_rows({{1, 1, 1}, {1, 1, 0}, {1, 0, 1}}));
  const auto at2 = dual_membership(cert, ConeSpec::psd(3, 2));
  CHECK(at2.member);
  CHECK(at2.margin == Catch::Approx(0.0).margin(1e-12));
  const auto at3 = dual_membership(cert, ConeSpec::psd(3, 3));
  CHECK_FALSE(at3.member);
  CHECK(at3.margin == Catch::Approx(1.0 - std::sqrt(2.0)));  // det = -1 route: lambda_min < 0

  const auto id = dual_membership(SymMatrix::identity(4), ConeSpec::psd(4, 2));
  CHECK(id.member);
  CHECK(id.margin == Catch::Approx(1.0));
}

TEST_CASE("dual nesting is reversed: acceptance at k+1 implies acceptance at k") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 25; ++it) {
    const int d = 4 + static_cast<int>(rng() % 3);
    const auto a = random_sym(d, rng);
    for (int k = 1; k + 1 <= d; ++k) {
      const auto hi = dual_membership(a, ConeSpec::psd(d, k + 1));
      const auto lo = dual_membership(a, ConeSpec::psd(d, k));
      if (hi.member) CHECK(lo.member);
      CHECK(lo.margin >= hi.margin - 1e-12);
    }
  }
}

TEST_CASE("primal membership: lifted identity, hollow onesically, SDD example") {
  const auto spec32 = ConeSpec::psd(3, 2);
  const auto lifted = lift(SymMatrix::identity(2), IndexTuple{1, 3}, 3);
  const auto r1 = primal_margin(lifted, spec32);
  CHECK(r1.member);
  REQUIRE(r1.decomposition);
  CHECK(verify_decomposition(lifted, *r1.decomposition, spec32).valid);

  // PSD but not factor-width-2: the all-ones matrix
  const auto ones = SymMatrix::from_rows({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  CHECK(psd_margin(ones) >= -1e-12);
  const auto r2 = primal_margin(ones, spec32);
  CHECK_FALSE(r2.member);
  CHECK(r2.margin < -1e-3);

  // SDD but not DD
  const auto a = SymMatrix::from_rows({{4, 2, 0}, {2, 2, 1}, {0, 1, 2}});
  CHECK(dd_margin(a) < 0);
  const auto r3 = primal_margin(a, spec32);
  CHECK(r3.member);
  CHECK(r3.margin > 0);
}

TEST_CASE("primal membership rejects support outside the index family") {
  IndexFamily j(3, 2, {IndexTuple{1, 2}});
  const auto spec = ConeSpec::psd_custom(3, 2, j);
  SymMatrix x(3);
  x.at(0, 0) = 1;
  x.at(2, 2) = 1;  // entry (3,3) is uncovered
  const auto r = primal_margin(x, spec);
  CHECK_FALSE(r.member);
}

TEST_CASE("is_sdd anchors and witness inequality") {
  const auto dd = is_sdd(SymMatrix::from_rows({{2, -1}, {-1, 2}}));
  CHECK(dd.sdd);
  REQUIRE(dd.witness);
  CHECK((*dd.witness)[0] == Catch::Approx((*dd.witness)[1]));

  CHECK_FALSE(is_sdd(SymMatrix::from_rows({{1, 2}, {2, 1}})).sdd);

  const auto a = SymMatrix::from_rows({{4, 2, 0}, {2, 2, 1}, {0, 1, 2}});
  const auto r = is_sdd(a);
  CHECK(r.sdd);
  CHECK(dd_margin(a) < 0);  // scaled but not plainly dominant
  REQUIRE(r.witness);
  for (int i = 0; i < 3; ++i) {
    double lhs = (*r.witness)[i] * a(i, i), rhs = 0;
    for (int j = 0; j < 3; ++j)
      if (j != i) rhs += (*r.witness)[j] * std::abs(a(i, j));
    CHECK(lhs >= rhs - 1e-9 * psd_scale(a));
  }
}

TEST_CASE("appendix equivalences: witness check <=> scaled dominance <=> comparison PSD") {
  std::mt19937_64 rng(23);
  int sdd_seen = 0;
  for (int it = 0; it < 120; ++it) {
    const int d = 2 + static_cast<int>(rng() % 5);
    SymMatrix a = it % 2 == 0 ? random_sym(d, rng) : detail_cones::sample_sdd(d, rng);
    const auto r = is_sdd(a);
    const bool via_comparison = psd_margin(comparison_matrix(a)) >= -tol::psd * psd_scale(a);
    CHECK(r.sdd == via_comparison);
    if (!r.sdd) continue;
    ++sdd_seen;
    REQUIRE(r.witness);
    const auto& w = *r.witness;
    // item (iii): D' A D diagonally dominant for D = diag(witness)
    SymMatrix scaled(d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) scaled.at(i, j) = w[i] * a(i, j) * w[j];
    CHECK(dd_margin(scaled) >= -1e-9 * psd_scale(scaled));
  }
  CHECK(sdd_seen > 20);
}

TEST_CASE("factor-width-2 decomposition: anchors and roundtrip") {
  const auto two_i = 2.0 * SymMatrix::identity(2);
  const auto dec1 = factor_width2_decompose(two_i);
  REQUIRE(dec1.blocks.size() == 1);
  CHECK(dec1.blocks[0].second == two_i);

  const auto a2 = SymMatrix::from_rows({{2, 1}, {1, 2}});
  const auto dec2 = factor_width2_decompose(a2);
  REQUIRE(dec2.blocks.size() == 1);
  CHECK(dec2.blocks[0].second == a2);

  const auto a = SymMatrix::from_rows({{4, 2, 0}, {2, 2, 1}, {0, 1, 2}});
  const auto dec = factor_width2_decompose(a);
  const auto chk = verify_decomposition(a, dec, ConeSpec::psd(3, 2));
  CHECK(chk.valid);
  CHECK(chk.recon_err <= 1e-12);
  for (const auto& [t, m] : dec.blocks) CHECK(psd_margin(m) >= -tol::psd * psd_scale(m));

  CHECK_THROWS_AS(factor_width2_decompose(SymMatrix::from_rows({{1, 2}, {2, 1}})), InputError);
}

TEST_CASE("factor-width-2 roundtrips on random SDD matrices") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 60; ++it) {
    const int d = 2 + static_cast<int>(rng() % 5);
    const auto a = detail_cones::sample_sdd(d, rng);
    const auto dec = factor_width2_decompose(a);
    const auto chk = verify_decomposition(a, dec, ConeSpec::psd(d, std::min(2, d)));
    CHECK(chk.valid);
  }
}

TEST_CASE("verify_decomposition flags bad certificates") {
  const auto a = SymMatrix::from_rows({{4, 2, 0}, {2, 2, 1}, {0, 1, 2}});
  auto dec = factor_width2_decompose(a);
  dec.blocks[0].second = -1.0 * SymMatrix::identity(2) + dec.blocks[0].second * 0.0;
  const auto chk = verify_decomposition(a, dec, ConeSpec::psd(3, 2));
  CHECK_FALSE(chk.valid);
  CHECK(chk.min_block_margin < 0);

  // empty decomposition of the zero matrix is valid with zero error
  const auto zero_chk = verify_decomposition(SymMatrix(3), Decomposition{3, {}}, ConeSpec::psd(3, 2));
  CHECK(zero_chk.valid);
  CHECK(zero_chk.recon_err == 0.0);

  CHECK_THROWS_AS(verify_decomposition(SymMatrix(2), Decomposition{3, {}}, ConeSpec::psd(3, 2)),
                  InputError);
}

TEST_CASE("nesting certificates separate consecutive orders for d up to 8") {
  for (int d = 2; d <= 8; ++d)
    for (int k = 1; k < d; ++k) {
      const auto cert = nesting_certificate_psd(d, k);
      const auto lo = dual_membership(cert, ConeSpec::psd(d, k));
      CHECK(lo.margin >= -1e-9);
      const auto hi = dual_membership(cert, ConeSpec::psd(d, k + 1));
      CHECK(hi.margin <= -1e-3);
    }
  for (int d = 3; d <= 8; ++d)
    for (int k = 2; k < d; ++k) {
      const auto v = nesting_certificate_soc(d, k);
      const auto lo = dual_membership(SymMatrix::diag(v), ConeSpec::soc(d, k));
      CHECK(lo.margin >= -1e-9);
      const auto hi = dual_membership(SymMatrix::diag(v), ConeSpec::soc(d, k + 1));
      CHECK(hi.margin <= -1e-3);
    }
}

TEST_CASE("soc dual membership needs a diagonal carrier") {
  CHECK_THROWS_AS(dual_membership(SymMatrix::from_rows({{1, 1}, {1, 1}}), ConeSpec::soc(2, 2)),
                  InputError);
}

TEST_CASE("membership is monotone in the order k") {
  std::mt19937_64 rng(41);
  for (int it = 0; it < 10; ++it) {
    const int d = 4;
    const auto x = detail_cones::sample_psd(d, rng);
    bool member_before = false;
    for (int k = 1; k <= d; ++k) {
      const auto r = primal_margin(x, ConeSpec::psd(d, k));
      if (member_before) CHECK(r.member);
      member_before = r.member;
    }
    CHECK(member_before);  // k = d accepts any PSD matrix
  }
}

TEST_CASE("order-2 membership coincides with the SDD test") {
  std::mt19937_64 rng(43);
  for (int it = 0; it < 40; ++it) {
    const int d = 2 + static_cast<int>(rng() % 4);
    const auto a = it % 2 == 0 ? random_sym(d, rng) : detail_cones::sample_sdd(d, rng);
    const bool sdd = is_sdd(a).sdd;
    const bool fw2 = primal_margin(a, ConeSpec::psd(d, std::min(2, d))).member;
    CHECK(sdd == fw2);
  }
}

TEST_CASE("diag(x) lies in the cone iff x is nonnegative") {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> g;
  for (int it = 0; it < 20; ++it) {
    const int d = 3 + static_cast<int>(rng() % 3);
    const int k = 1 + static_cast<int>(rng() % d);
    std::vector<double> x(d);
    for (double& v : x) v = g(rng);
    const bool nonneg = *std::min_element(x.begin(), x.end()) >= 0;
    const auto r = primal_margin(SymMatrix::diag(x), ConeSpec::psd(d, k));
    CHECK(r.member == nonneg);
  }
  // and a guaranteed-positive instance
  const auto r = primal_margin(SymMatrix::diag({0.5, 1.0, 2.0}), ConeSpec::psd(3, 2));
  CHECK(r.member);
}

TEST_CASE("direct-sum membership splits blockwise") {
  const auto spec42 = ConeSpec::psd(4, 2);
  const auto i2 = SymMatrix::identity(2);
  CHECK(primal_margin(direct_sum(i2, i2), spec42).member);

  const auto inside = SymMatrix::from_rows({{4, 2, 0}, {2, 2, 1}, {0, 1, 2}});
  const auto outside = SymMatrix::from_rows({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  const auto spec62 = ConeSpec::psd(6, 2);
  CHECK_FALSE(primal_margin(direct_sum(inside, outside), spec62).member);
  CHECK(primal_margin(direct_sum(inside, inside), spec62).member);

  const auto zero = primal_margin(direct_sum(SymMatrix(2), SymMatrix(2)), spec42);
  CHECK(zero.member);
  CHECK(zero.margin == Catch::Approx(0.0).margin(1e-8));
}

TEST_CASE("embedding audits: shipped families are clean, a broken family is caught") {
  CHECK(verify_embedding(EmbedFamily::Psd, 5, 3, 100, 42).violations == 0);
  CHECK(verify_embedding(EmbedFamily::Dd, 5, 2, 100, 42).violations == 0);
  CHECK(verify_embedding(EmbedFamily::Sdd, 5, 3, 100, 42).violations == 0);
  CHECK(verify_embedding(EmbedFamily::Soc, 5, 3, 100, 42).violations == 0);

  // inheritance: the order-2 family over growing ambient dims
  for (int l = 2; l <= 5; ++l)
    CHECK(verify_embedding(EmbedFamily::PsdOrder2, l, std::max(1, l - 1), 50, 42).violations == 0);

  // negative control: "members" are I + PSD, margin demands X - I PSD;
  // lifting pads zeros and must violate
  EmbeddingProbe broken;
  broken.sample = [](int d, std::mt19937_64& rng) {
    return detail_cones::sample_psd(d, rng) + SymMatrix::identity(d);
  };
  broken.margin = [](const SymMatrix& m) {
    return psd_margin(m - SymMatrix::identity(m.dim()));
  };
  const auto rep = verify_embedding(broken, "broken", 5, 3, 50, 42);
  CHECK(rep.violations > 0);
}

TEST_CASE("nesting chain condition recognizes full maps and gaps") {
  CHECK(nesting_chain_condition(enumerate_tuples(4, 2, IndexMap::Full),
                                enumerate_tuples(4, 3, IndexMap::Full)));
  IndexFamily lo(4, 2, {IndexTuple{1, 2}, IndexTuple{3, 4}});
  IndexFamily hi(4, 3, {IndexTuple{1, 2, 3}});
  CHECK_FALSE(nesting_chain_condition(lo, hi));  // (3,4) has no extension
}
