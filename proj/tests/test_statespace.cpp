#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "zics/statespace.hpp"

using namespace zics;
using zics::testing::make_box;

TEST_CASE("state space bounds and indexing") {
  auto space = make_box({50, 40});
  CHECK(space.size() == 51u * 41u);
  Eigen::VectorXi x(2);
  x << 3, 7;
  CHECK(space.state_at(space.flat_index(x)) == x);
  CHECK_THROWS_AS(StateSpace({{0, 0}}), Error);
  CHECK_THROWS_AS(StateSpace({{-1, 5}}), Error);
}

TEST_CASE("enumeration is row-major with the last species fastest") {
  auto space = make_box({1, 2});
  std::vector<std::pair<int, int>> seen;
  for_each_state(space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    CHECK(flat == seen.size());
    seen.emplace_back(x[0], x[1]);
  });
  CHECK(seen == std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}});
}

TEST_CASE("normalizer at lambda zero is log of the state count") {
  auto basis2 = build_basis(2, 2);
  CHECK(normalizer(make_box({50, 40}), basis2, Eigen::VectorXd::Zero(basis2.psi())) ==
        doctest::Approx(std::log(2091.0)).epsilon(1e-14));
  auto basis1 = build_basis(1, 1);
  CHECK(normalizer(make_box({9}), basis1, Eigen::VectorXd::Zero(1)) ==
        doctest::Approx(std::log(10.0)).epsilon(1e-14));
}

TEST_CASE("normalizer shifting keeps large exponents finite") {
  auto basis = build_basis(1, 1);
  Eigen::VectorXd lam(1);
  lam << -std::log(2.0);
  // weights 2^X over a big range would overflow a naive sum
  double l0 = normalizer(make_box({2000}), basis, lam);
  CHECK(std::isfinite(l0));
  // geometric series: log(2^2001 - 1) ~= 2001 log 2
  CHECK(l0 == doctest::Approx(2001.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("normalizer rejects non-finite lambda") {
  auto basis = build_basis(1, 1);
  Eigen::VectorXd lam(1);
  lam << std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(normalizer(make_box({5}), basis, lam),
                       doctest::Contains("NonFiniteExponent"), Error);
}

TEST_CASE("distribution at lambda zero is uniform") {
  auto basis = build_basis(2, 2);
  auto table = distribution(make_box({50, 40}), basis, Eigen::VectorXd::Zero(basis.psi()));
  CHECK(std::abs(table.p.sum() - 1.0) < 1e-12);
  CHECK(table.p.minCoeff() == doctest::Approx(1.0 / 2091.0).epsilon(1e-13));
  CHECK(table.p.maxCoeff() == doctest::Approx(1.0 / 2091.0).epsilon(1e-13));
}

TEST_CASE("geometric lambda gives a monotone distribution") {
  auto basis = build_basis(1, 1);
  Eigen::VectorXd lam(1);
  lam << 0.3;
  auto table = distribution(make_box({20}), basis, lam);
  for (Eigen::Index i = 1; i < table.p.size(); ++i) CHECK(table.p[i] < table.p[i - 1]);
  CHECK(table.p.minCoeff() > 0.0);  // maxent form never assigns exact zeros
}

TEST_CASE("moments of the uniform distribution on [0,9]") {
  auto basis = build_basis(1, 2);
  auto space = make_box({9});
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(2);
  auto mu = moments_of(space, basis, lam, {{1}, {2}, {0}});
  CHECK(mu[0] == doctest::Approx(4.5).epsilon(1e-14));   // mean of 0..9
  CHECK(mu[1] == doctest::Approx(24.0).epsilon(1e-14));  // sum x(x-1)/10
  CHECK(mu[2] == 1.0);                                   // zeroth moment
}

TEST_CASE("cross moments on the uniform distribution") {
  auto basis = build_basis(1, 1);
  auto space = make_box({9});
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(1);
  auto m = cross_moments(space, basis, lam, {{1}}, {{1}});
  CHECK(m(0, 0) == doctest::Approx(28.5).epsilon(1e-14));  // E[X^2] = sum x^2/10

  auto dist = distribution(space, basis, lam);
  auto zero_row = cross_moments(dist, {{0}}, {{1}, {1}});
  auto plain = moments_of(dist, {{1}});
  CHECK(zero_row(0, 0) == doctest::Approx(plain[0]).epsilon(1e-14));
}

TEST_CASE("cross moments are symmetric") {
  detail::SplitMix64 rng(11);
  auto basis = build_basis(2, 2);
  auto space = make_box({8, 8});
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd lam(basis.psi());
    for (int i = 0; i < lam.size(); ++i) lam[i] = 0.2 * (rng.next_open01() - 0.5);
    auto m = cross_moments(space, basis, lam, basis.lower, basis.lower);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-9 * m.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("jacobian identity: moment derivatives vs cross moments") {
  // d mu_i / d lambda_j from central differences must match
  // -mu_{i,j} + mu_i mu_j.
  detail::SplitMix64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 1 + static_cast<int>(rng.next() % 2);
    auto basis = build_basis(n, 2);
    auto space = make_box(std::vector<int>(static_cast<std::size_t>(n), 7));
    Eigen::VectorXd lam(basis.psi());
    for (int i = 0; i < lam.size(); ++i) lam[i] = 0.3 * (rng.next_open01() - 0.5);

    auto dist = distribution(space, basis, lam);
    Eigen::VectorXd mu = moments_of(dist, basis.lower);
    Eigen::MatrixXd cross = cross_moments(dist, basis.lower, basis.lower);

    const double h = 1e-5;
    for (int j = 0; j < basis.psi(); ++j) {
      Eigen::VectorXd hi = lam, lo = lam;
      hi[j] += h;
      lo[j] -= h;
      Eigen::VectorXd dmu = (moments_of(space, basis, hi, basis.lower) -
                             moments_of(space, basis, lo, basis.lower)) /
                            (2 * h);
      for (int i = 0; i < basis.psi(); ++i) {
        double analytic = -cross(i, j) + mu[i] * mu[j];
        CHECK(dmu[i] == doctest::Approx(analytic).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("marginals and boundary mass") {
  auto basis = build_basis(2, 1);
  auto space = make_box({3, 2});
  auto table = distribution(space, basis, Eigen::VectorXd::Zero(2));
  auto mx = table.marginal(0);
  CHECK(mx.size() == 4);
  CHECK(mx[0] == doctest::Approx(0.25));
  // 6 of 12 states touch a max bound
  CHECK(table.boundary_mass() == doctest::Approx(0.5));
}
