#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "kocp/matrix_ops.hpp"

using namespace kocp;

namespace {

SymMatrix random_sym(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SymMatrix a(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) a.at(i, j) = g(rng);
  return a;
}

IndexTuple random_tuple(int d, int k, std::mt19937_64& rng) {
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i + 1;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return IndexTuple(idx);
}

}  // namespace

TEST_CASE("packed symmetric storage reads the same value for (i,j) and (j,i)") {
  SymMatrix a(3);
  a.at(0, 2) = 7.5;
  CHECK(a(2, 0) == 7.5);
  CHECK(a(0, 2) == 7.5);
  CHECK_THROWS_AS(SymMatrix(0), InputError);
  CHECK_THROWS_AS(a(0, 3), InputError);
}

TEST_CASE("truncation projects principal submatrices") {
  const auto z = SymMatrix::from_rows({{1, 2, 3}, {2, 4, 5}, {3, 5, 6}});
  const auto t = truncate(z, IndexTuple{1, 3});
  CHECK(t.dim() == 2);
  CHECK(t(0, 0) == 1);
  CHECK(t(0, 1) == 3);
  CHECK(t(1, 1) == 6);

  CHECK(truncate(SymMatrix::identity(3), IndexTuple{2, 3}) == SymMatrix::identity(2));
  CHECK_THROWS_AS(truncate(SymMatrix::identity(2), IndexTuple{1, 3}), InputError);
}

TEST_CASE("lift pads with zeros and inverts truncation") {
  const auto x = SymMatrix::from_rows({{1, 3}, {3, 6}});
  const auto z = lift(x, IndexTuple{1, 3}, 3);
  CHECK(z == SymMatrix::from_rows({{1, 0, 3}, {0, 0, 0}, {3, 0, 6}}));

  CHECK(lift(SymMatrix(1), IndexTuple{2}, 4).frobenius() == 0.0);

  std::mt19937_64 rng(42);
  for (int it = 0; it < 50; ++it) {
    const int d = 2 + static_cast<int>(rng() % 5);
    const int k = 1 + static_cast<int>(rng() % d);
    const auto t = random_tuple(d, k, rng);
    const auto m = random_sym(k, rng);
    CHECK((truncate(lift(m, t, d), t) - m).frobenius() == 0.0);
  }
}

TEST_CASE("composed lifts follow the composed tuple") {
  // lift from S^k into S^l along (j_1..j_k), then into S^m along (i_1..i_l)
  // equals one lift along (i_{j_1}..i_{j_k})
  std::mt19937_64 rng(7);
  for (int it = 0; it < 50; ++it) {
    const int m = 4 + static_cast<int>(rng() % 4);
    const int l = 2 + static_cast<int>(rng() % (m - 1));
    const int k = 1 + static_cast<int>(rng() % l);
    const auto outer = random_tuple(m, l, rng);
    const auto inner = random_tuple(l, k, rng);
    const auto x = random_sym(k, rng);
    const auto two_step = lift(lift(x, inner, l), outer, m);
    std::vector<int> composed(k);
    for (int p = 0; p < k; ++p) composed[p] = outer[inner.zero_based(p)];
    const auto one_step = lift(x, IndexTuple(composed), m);
    CHECK((two_step - one_step).frobenius() == 0.0);
  }
}

TEST_CASE("lift is additive and positively homogeneous") {
  std::mt19937_64 rng(3);
  const auto t = IndexTuple{1, 3, 4};
  const auto x = random_sym(3, rng);
  const auto y = random_sym(3, rng);
  const auto lhs = lift(2.0 * x + 0.5 * y, t, 5);
  const auto rhs = 2.0 * lift(x, t, 5) + 0.5 * lift(y, t, 5);
  CHECK((lhs - rhs).frobenius() < 1e-14);
}

TEST_CASE("tuple enumeration: full and soc maps") {
  const auto full = enumerate_tuples(3, 2, IndexMap::Full);
  REQUIRE(full.size() == 3);
  CHECK(full.tuples[0] == IndexTuple{1, 2});
  CHECK(full.tuples[1] == IndexTuple{1, 3});
  CHECK(full.tuples[2] == IndexTuple{2, 3});

  const auto soc = enumerate_tuples(3, 2, IndexMap::Soc);
  REQUIRE(soc.size() == 2);
  CHECK(soc.tuples[0] == IndexTuple{1, 2});
  CHECK(soc.tuples[1] == IndexTuple{1, 3});

  const auto single = enumerate_tuples(4, 4, IndexMap::Full);
  REQUIRE(single.size() == 1);
  CHECK(single.tuples[0] == IndexTuple{1, 2, 3, 4});

  const auto soc1 = enumerate_tuples(5, 1, IndexMap::Soc);
  REQUIRE(soc1.size() == 1);
  CHECK(soc1.tuples[0] == IndexTuple{1});

  CHECK(enumerate_tuples(6, 3, IndexMap::Full).size() == 20);
  CHECK_THROWS_AS(enumerate_tuples(3, 4, IndexMap::Full), InputError);
}

TEST_CASE("index family validation") {
  CHECK_THROWS_AS(IndexTuple({2, 2}), InputError);
  CHECK_THROWS_AS(IndexTuple({3, 1}), InputError);
  CHECK_THROWS_AS(IndexFamily(3, 2, {IndexTuple{1, 2}, IndexTuple{1, 2}}), InputError);
  CHECK_THROWS_AS(IndexFamily(3, 2, {IndexTuple{1, 4}}), InputError);
}

TEST_CASE("psd_margin on the spec anchors") {
  CHECK(psd_margin(SymMatrix::identity(2)) == Catch::Approx(1.0));
  CHECK(psd_margin(SymMatrix::from_rows({{1, 1}, {1, 1}})) == Catch::Approx(0.0).margin(1e-12));
  // eigenvalues of [[1,2],[2,1]] are 3 and -1 (characteristic polynomial)
  CHECK(psd_margin(SymMatrix::from_rows({{1, 2}, {2, 1}})) == Catch::Approx(-1.0));
}

TEST_CASE("psd_margin is invariant under orthogonal conjugation") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int it = 0; it < 20; ++it) {
    const int d = 3 + static_cast<int>(rng() % 4);
    const auto a = random_sym(d, rng);
    Eigen::MatrixXd raw(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) raw(i, j) = g(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ();
    const auto rotated = SymMatrix::from_dense(q.transpose() * a.dense() * q);
    CHECK(psd_margin(rotated) == Catch::Approx(psd_margin(a)).margin(1e-8));
  }
}

TEST_CASE("comparison matrix and its idempotence") {
  CHECK(comparison_matrix(SymMatrix::from_rows({{1, 2}, {2, 1}})) ==
        SymMatrix::from_rows({{1, -2}, {-2, 1}}));
  const auto diag = SymMatrix::diag({3, -1, 2});
  CHECK(comparison_matrix(diag) == diag);
  CHECK(comparison_matrix(SymMatrix::from_rows({{4, -2, 0}, {-2, 2, 1}, {0, 1, 2}})) ==
        SymMatrix::from_rows({{4, -2, 0}, {-2, 2, -1}, {0, -1, 2}}));

  std::mt19937_64 rng(5);
  for (int it = 0; it < 20; ++it) {
    const auto a = random_sym(4, rng);
    const auto m = comparison_matrix(a);
    CHECK(comparison_matrix(m) == m);
  }
}

TEST_CASE("direct sums and splits") {
  const auto a = SymMatrix::from_rows({{1, 2}, {2, 5}});
  const auto b = SymMatrix::diag({3});
  const auto z = direct_sum(a, b);
  CHECK(z.dim() == 3);
  CHECK(z(0, 1) == 2);
  CHECK(z(2, 2) == 3);
  CHECK(z(0, 2) == 0);
  const auto [x1, x2] = split_direct_sum(z, 2);
  CHECK(x1 == a);
  CHECK(x2 == b);
}

TEST_CASE("trace inner product matches the dense computation") {
  std::mt19937_64 rng(9);
  const auto a = random_sym(4, rng);
  const auto b = random_sym(4, rng);
  CHECK(SymMatrix::inner(a, b) ==
        Catch::Approx((a.dense() * b.dense()).trace()).epsilon(1e-12));
}
