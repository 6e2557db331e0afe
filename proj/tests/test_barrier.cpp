#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "kocp/barrier.hpp"

using namespace kocp;

namespace {

// any positive definite matrix has all truncations positive definite
SymMatrix random_dual_interior(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd r(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r(i, j) = g(rng);
  return SymMatrix::from_dense(r * r.transpose() / d + 0.3 * Eigen::MatrixXd::Identity(d, d));
}

SymMatrix random_primal_interior(int d, std::mt19937_64& rng) {
  SymMatrix a = detail_cones::sample_sdd(d, rng);
  for (int i = 0; i < d; ++i) a.at(i, i) += 0.5;
  return a;
}

double fd_gradient_entry(const SymMatrix& y, const ConeSpec& spec, int i, int j) {
  const double h = 1e-6 * (1.0 + y.frobenius());
  SymMatrix up = y, dn = y;
  up.at(i, j) += h;
  dn.at(i, j) -= h;
  return (barrier_value(up, spec) - barrier_value(dn, spec)) / (2 * h);
}

}  // namespace

TEST_CASE("barrier value anchors at the identity") {
  const auto spec = ConeSpec::psd(3, 2);
  CHECK(barrier_value(SymMatrix::identity(3), spec) == Catch::Approx(0.0).margin(1e-14));
  CHECK(barrier_value(2.0 * SymMatrix::identity(3), spec) ==
        Catch::Approx(-6.0 * std::log(2.0)));
  CHECK(BarrierPoint(SymMatrix::identity(3), spec).theta() == 6.0);
  CHECK_THROWS_AS(barrier_value(SymMatrix::from_rows({{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}), spec),
                  NotInteriorError);
}

TEST_CASE("gradient at the identity counts tuple coverage") {
  const auto spec = ConeSpec::psd(3, 2);
  const auto g = barrier_grad(SymMatrix::identity(3), spec);
  CHECK((g + 2.0 * SymMatrix::identity(3)).frobenius() < 1e-12);
}

TEST_CASE("gradient and Hessian match central finite differences") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = 3 + static_cast<int>(rng() % 4);  // up to 6
    const int k = 1 + static_cast<int>(rng() % std::min(d, 3));
    const auto spec = ConeSpec::psd(d, k);
    const auto y = random_dual_interior(d, rng);
    const auto g = barrier_grad(y, spec);
    // stored-entry derivative of f: kappa * gradient matrix entry
    for (int count = 0; count < 4; ++count) {
      const int i = static_cast<int>(rng() % d);
      const int j = i + static_cast<int>(rng() % (d - i));
      const double fd = fd_gradient_entry(y, spec, i, j);
      const double an = (i == j ? 1.0 : 2.0) * g(i, j);
      CHECK(fd == Catch::Approx(an).epsilon(1e-5).margin(1e-7));
    }
    // Hessian quadratic form against a second difference along a random line
    SymMatrix h(d);
    std::normal_distribution<double> gd;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) h.at(i, j) = gd(rng);
    const double step = 1e-4 * (1.0 + y.frobenius()) / (1.0 + h.frobenius());
    const double f0 = barrier_value(y, spec);
    const double fp = barrier_value(y + step * h, spec);
    const double fm = barrier_value(y - step * h, spec);
    const double fd2 = (fp - 2 * f0 + fm) / (step * step);
    CHECK(fd2 == Catch::Approx(barrier_hess_quadform(y, h, spec)).epsilon(1e-5).margin(1e-6));
  }
}

TEST_CASE("quadratic form anchors, positivity and bilinearity") {
  const auto spec = ConeSpec::psd(3, 2);
  const auto id = SymMatrix::identity(3);
  CHECK(barrier_hess_quadform(id, id, spec) == Catch::Approx(6.0));
  CHECK(barrier_hess_quadform(id, SymMatrix(3), spec) == 0.0);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const auto y = random_dual_interior(3, rng);
  BarrierPoint bp(y, spec);
  SymMatrix h1(3), h2(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      h1.at(i, j) = g(rng);
      h2.at(i, j) = g(rng);
    }
  CHECK(bp.hess_quadform(h1) > 0);
  const double lhs = bp.hess_quadform(h1 + h2) + bp.hess_quadform(h1 - h2);
  const double rhs = 2 * bp.hess_quadform(h1) + 2 * bp.hess_quadform(h2);
  CHECK(lhs == Catch::Approx(rhs).epsilon(1e-8));
}

TEST_CASE("logarithmic homogeneity and the Euler identity") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3 + static_cast<int>(rng() % 3);
    const int k = 1 + static_cast<int>(rng() % std::min(d, 3));
    const auto spec = ConeSpec::psd(d, k);
    const double theta = static_cast<double>(k) * spec.J.size();
    const auto y = random_dual_interior(d, rng);
    for (double t : {0.5, 2.0, 10.0}) {
      const double lhs = barrier_value(t * y, spec);
      const double rhs = barrier_value(y, spec) - theta * std::log(t);
      CHECK(lhs == Catch::Approx(rhs).epsilon(1e-9));
    }
    CHECK(SymMatrix::inner(barrier_grad(y, spec), y) == Catch::Approx(-theta).epsilon(1e-10));
  }
}

TEST_CASE("the negated gradient lands inside the primal cone") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 3 + static_cast<int>(rng() % 2);
    const auto spec = ConeSpec::psd(d, 2);
    const auto y = random_dual_interior(d, rng);
    const SymMatrix neg_grad = -1.0 * barrier_grad(y, spec);
    const auto r = primal_margin(neg_grad, spec);
    CHECK(r.member);
    CHECK(r.margin > 0);
  }
}

TEST_CASE("legendre inversion: anchor, roundtrip, scaling") {
  const auto spec = ConeSpec::psd(3, 2);
  const auto y = legendre_invert(2.0 * SymMatrix::identity(3), spec);
  CHECK((y - SymMatrix::identity(3)).frobenius() < 1e-7);

  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 8; ++trial) {
    const int d = 3 + static_cast<int>(rng() % 3);
    const auto sp = ConeSpec::psd(d, 2);
    const auto x = random_primal_interior(d, rng);
    const auto yx = legendre_invert(x, sp);
    CHECK((barrier_grad(yx, sp) + x).frobenius() <= 1e-7 * std::max(1.0, x.frobenius()));
    const auto y2 = legendre_invert(2.0 * x, sp);
    CHECK((y2 - 0.5 * yx).frobenius() < 1e-6 * std::max(1.0, yx.frobenius()));
  }
}

TEST_CASE("primal barrier: anchor and log-homogeneity") {
  const auto spec = ConeSpec::psd(3, 2);
  CHECK(primal_barrier(2.0 * SymMatrix::identity(3), spec) == Catch::Approx(-6.0).margin(1e-6));

  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 3 + static_cast<int>(rng() % 2);
    const auto sp = ConeSpec::psd(d, 2);
    const double theta = 2.0 * sp.J.size();
    const auto x = random_primal_interior(d, rng);
    const double fx = primal_barrier(x, sp);
    for (double t : {0.5, 2.0, 10.0}) {
      const double ftx = primal_barrier(t * x, sp);
      CHECK(ftx == Catch::Approx(fx - theta * std::log(t)).epsilon(1e-6));
    }
  }
}

TEST_CASE("self-concordance along random lines by finite differences") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> g;
  const auto spec = ConeSpec::psd(4, 2);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto y = random_dual_interior(4, rng);
    SymMatrix h(4);
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) h.at(i, j) = g(rng);
    const double step = 1e-3 * (1.0 + y.frobenius()) / (1.0 + h.frobenius());
    auto phi = [&](double a) { return barrier_value(y + a * h, spec); };
    const double d2 = (phi(step) - 2 * phi(0) + phi(-step)) / (step * step);
    const double d3 =
        (-phi(-2 * step) + 2 * phi(-step) - 2 * phi(step) + phi(2 * step)) / (2 * step * step * step);
    if (d2 <= 0) continue;
    CHECK(std::abs(d3) <= 2.0 * std::pow(d2, 1.5) * (1.0 + 1e-3) + 1e-4);
    ++checked;
  }
  CHECK(checked >= 45);
}
