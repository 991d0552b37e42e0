#include <doctest.h>

#include "helpers.hpp"
#include "zics/moments.hpp"
#include "zics/oracle.hpp"

using namespace zics;
using zics::testing::load_network;
using zics::testing::make_box;

namespace {

MomentIndex idx(std::initializer_list<int> v) { return MomentIndex(v); }

}  // namespace

TEST_CASE("basis enumeration") {
  auto b = build_basis(2, 2);
  CHECK(b.psi() == 5);
  CHECK(b.lower == std::vector<MomentIndex>{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}});

  auto b1 = build_basis(1, 3);
  CHECK(b1.lower == std::vector<MomentIndex>{{1}, {2}, {3}});

  CHECK(build_basis(3, 2).psi() == 9);  // C(5,3) - 1
  CHECK_THROWS_AS(build_basis(1, 0), Error);
}

TEST_CASE("basis ordering is deterministic") {
  auto a = build_basis(3, 4), b = build_basis(3, 4);
  CHECK(a.lower == b.lower);
}

TEST_CASE("birth death equations at order 1") {
  auto net = load_network("birth_death.json");
  auto basis = build_basis(1, 1);
  auto eqs = generate_equations(net, basis);
  CHECK(eqs.A.rows() == 1);
  CHECK(eqs.A(0, 0) == -2.0);
  CHECK(eqs.A_prime.cols() == 0);
  CHECK(eqs.mu_c[0] == 4.0);
}

TEST_CASE("birth death equations at order 2") {
  auto net = load_network("birth_death.json");
  auto basis = build_basis(1, 2);
  auto eqs = generate_equations(net, basis);
  Eigen::MatrixXd expect(2, 2);
  expect << -2, 0, 8, -4;
  CHECK(eqs.A == expect);
  CHECK(eqs.mu_c[0] == 4.0);
  CHECK(eqs.mu_c[1] == 0.0);
  CHECK(basis.higher.empty());
}

TEST_CASE("first order networks close exactly") {
  detail::SplitMix64 rng(5);
  int checked = 0;
  while (checked < 30) {
    auto net = zics::testing::random_network(rng);
    if (net.reactants.rowwise().sum().maxCoeff() > 1) continue;
    auto basis = build_basis(net.species_count(), 1 + static_cast<int>(rng.next() % 3));
    auto eqs = generate_equations(net, basis);
    CHECK(basis.higher.empty());
    CHECK(eqs.A_prime.cols() == 0);
    ++checked;
  }
}

TEST_CASE("maximum higher order for bimolecular networks") {
  auto net = load_network("wilhelm.json");  // bimolecular
  for (int order = 2; order <= 4; ++order) {
    auto basis = build_basis(2, order);
    generate_equations(net, basis);
    int max_higher = 0;
    for (const auto& h : basis.higher) max_higher = std::max(max_higher, index_order(h));
    CHECK(max_higher == order + 1);
  }
}

TEST_CASE("generator-oracle equivalence") {
  // The key correctness property: on interior-supported distributions, the
  // moment-equation residual equals the CME generator pushed through the
  // moment functions.
  detail::SplitMix64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    auto net = zics::testing::random_network(rng);
    std::vector<int> maxes(static_cast<std::size_t>(net.species_count()),
                           net.species_count() == 1 ? 12 : (net.species_count() == 2 ? 9 : 6));
    auto space = make_box(maxes);
    auto basis = build_basis(net.species_count(), 2);
    auto eqs = generate_equations(net, basis);

    auto p = zics::testing::random_interior_distribution(net, space, rng);
    Eigen::VectorXd mu = moments_of(p, basis.lower);
    Eigen::VectorXd mu_p = basis.higher.empty() ? Eigen::VectorXd(0) : moments_of(p, basis.higher);
    Eigen::VectorXd lhs = generator_apply(net, space, p, basis.lower);
    Eigen::VectorXd rhs = eqs.A * mu + eqs.mu_c;
    if (mu_p.size() > 0) rhs += eqs.A_prime * mu_p;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("text export") {
  auto net = load_network("birth_death.json");
  auto basis = build_basis(1, 1);
  auto eqs = generate_equations(net, basis);
  CHECK(export_equations(eqs, basis, net.species, EquationFormat::text) ==
        "d<X>/dt = 4 - 2*<X>\n");
}

TEST_CASE("json export with empty A_prime") {
  auto net = load_network("birth_death.json");
  auto basis = build_basis(1, 2);
  auto eqs = generate_equations(net, basis);
  auto text = export_equations(eqs, basis, net.species, EquationFormat::json);
  CHECK(text.find("\"A_prime\": []") != std::string::npos);
  CHECK(text.find("\"labels_higher\": []") != std::string::npos);
}

TEST_CASE("csv export for wilhelm at order 2") {
  auto net = load_network("wilhelm.json");
  auto basis = build_basis(2, 2);
  auto eqs = generate_equations(net, basis);
  auto text = export_equations(eqs, basis, net.species, EquationFormat::csv);
  // 5 labeled equation rows plus header; higher-order columns of order 3
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  CHECK(text.find("X^2 Y") != std::string::npos);
  for (const auto& h : basis.higher) CHECK(index_order(h) == 3);
  CHECK(basis.psi_prime() > 0);
}

TEST_CASE("moment labels") {
  CHECK(moment_label(idx({2, 1}), {"X", "Y"}) == "X^2 Y");
  CHECK(moment_label(idx({0, 0}), {"X", "Y"}) == "1");
  CHECK(moment_label(idx({0, 3}), {"X", "Y"}) == "Y^3");
}
