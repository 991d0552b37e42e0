#include <doctest.h>

#include "helpers.hpp"
#include "zics/network.hpp"
#include "zics/oracle.hpp"

using namespace zics;
using zics::testing::load_network;
using zics::testing::make_box;

namespace {

Eigen::VectorXi coeffs(std::initializer_list<int> v) {
  Eigen::VectorXi x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (int c : v) x[i++] = c;
  return x;
}

bool has_law(const std::vector<ConservationLaw>& laws, const Eigen::VectorXi& expect) {
  for (const auto& l : laws)
    if (l.coefficients == expect) return true;
  return false;
}

}  // namespace

TEST_CASE("parse wilhelm json") {
  auto net = load_network("wilhelm.json");
  CHECK(net.species_count() == 2);
  CHECK(net.reaction_count() == 5);
  CHECK(net.species == std::vector<std::string>{"X", "Y"});
  CHECK(net.rates[0] == 35.0);
  CHECK(net.rates[3] == 9.74);
  CHECK(net.reactants(1, 0) == 2);
  CHECK(net.products(0, 0) == 2);
  CHECK(net.reaction_string(0) == "Y -> 2 X (k=35)");
}

TEST_CASE("parse single birth reaction") {
  auto net = parse_network(
      R"({"species":["X"],"reactions":[{"reactants":{},"products":{"X":1},"rate":1.0}]})",
      NetworkFormat::json);
  CHECK(net.species_count() == 1);
  CHECK(net.reaction_count() == 1);
  CHECK(net.reactants(0, 0) == 0);
  CHECK(net.products(0, 0) == 1);
}

TEST_CASE("matrix encoding shape mismatch") {
  std::string text = R"({
    "species": ["X", "Y"],
    "reactant_stoich": [[0,1],[2,0],[1,1],[1,0],[0,0]],
    "product_stoich": [[2,0],[1,1],[0,1],[0,0]],
    "rates": [35, 1, 1, 9.74, 30]
  })";
  CHECK_THROWS_WITH_AS(parse_network(text, NetworkFormat::json),
                       doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_network("{not json", NetworkFormat::json), Error);
  CHECK_THROWS_WITH_AS(
      parse_network(
          R"({"species":["X","X"],"reactions":[{"reactants":{},"products":{"X":1},"rate":1}]})",
          NetworkFormat::json),
      doctest::Contains("DuplicateSpecies"), Error);
  CHECK_THROWS_WITH_AS(
      parse_network(
          R"({"species":["X"],"reactions":[{"reactants":{"X":1.5},"products":{},"rate":1}]})",
          NetworkFormat::json),
      doctest::Contains("NonIntegerStoichiometry"), Error);
}

TEST_CASE("tsv parse") {
  std::string text =
      "species\nX\nY\n\nreactions\nY -> 2*X\t35\n2*X -> X + Y\t1\nX + Y -> Y\t1\nX -> 0\t9.74\n0 "
      "-> X\t30\n";
  auto net = parse_network(text, NetworkFormat::tsv);
  CHECK(net == load_network("wilhelm.json"));
}

TEST_CASE("round trip preserves decimals") {
  auto net = load_network("wilhelm.json");
  std::string json = save_network(net, NetworkFormat::json);
  CHECK(json.find("9.74") != std::string::npos);
  CHECK(parse_network(json, NetworkFormat::json) == net);
}

TEST_CASE("round trip property over random networks") {
  detail::SplitMix64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    auto net = zics::testing::random_network(rng);
    CHECK(parse_network(save_network(net, NetworkFormat::json), NetworkFormat::json) == net);
    CHECK(parse_network(save_network(net, NetworkFormat::tsv), NetworkFormat::tsv) == net);
  }
}

TEST_CASE("default species names") {
  Eigen::MatrixXi reac = Eigen::MatrixXi::Zero(1, 3);
  Eigen::MatrixXi prod = Eigen::MatrixXi::Ones(1, 3);
  auto net = ReactionNetwork::from_matrices(reac, prod, Eigen::VectorXd::Ones(1));
  CHECK(net.species == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("conservation laws of closed michaelis-menten") {
  auto net = load_network("michaelis_menten_closed.json");
  auto laws = conservation_laws(net);
  REQUIRE(laws.size() == 2);
  CHECK(has_law(laws, coeffs({0, 1, 1, 0})));   // E + S:E
  CHECK(has_law(laws, coeffs({1, 0, 1, 1})));   // S + S:E + P
}

TEST_CASE("conservation laws trivial cases") {
  CHECK(conservation_laws(load_network("birth_death.json")).empty());
  auto ab = parse_network(
      R"({"species":["A","B"],"reactions":[{"reactants":{"A":1},"products":{"B":1},"rate":1}]})",
      NetworkFormat::json);
  auto laws = conservation_laws(ab);
  REQUIRE(laws.size() == 1);
  CHECK(laws[0].coefficients == coeffs({1, 1}));
}

TEST_CASE("conservation laws annihilate the net matrix exactly") {
  detail::SplitMix64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto net = zics::testing::random_network(rng);
    Eigen::MatrixXi netmat = net.products - net.reactants;
    for (const auto& law : conservation_laws(net)) {
      CHECK(!law.coefficients.isZero());
      CHECK((netmat * law.coefficients).isZero(0));
    }
  }
}

TEST_CASE("to_open_form reproduces the open michaelis-menten system") {
  auto closed = load_network("michaelis_menten_closed.json");
  auto laws = conservation_laws(closed);
  REQUIRE(laws.size() == 2);
  // assign totals: E law gets E_T, S law gets S_T
  for (auto& law : laws)
    law.total = law.coefficients == coeffs({0, 1, 1, 0}) ? 10.0 : 20.0;
  auto open = to_open_form(closed, laws, {"S:E", "P"});

  const double k1 = 1.0, k2 = 1.0, k3 = 0.1, et = 10.0;
  REQUIRE(open.species == std::vector<std::string>{"S", "E"});
  REQUIRE(open.reaction_count() == 5);
  // S + E -> 0, k1
  CHECK(open.reactants.row(0) == coeffs({1, 1}).transpose());
  CHECK(open.products.row(0).isZero());
  CHECK(open.rates[0] == k1);
  // 0 -> S + E, E_T k2
  CHECK(open.reactants.row(1).isZero());
  CHECK(open.products.row(1) == coeffs({1, 1}).transpose());
  CHECK(open.rates[1] == et * k2);
  // E -> S + 2E, -k2
  CHECK(open.reactants.row(2) == coeffs({0, 1}).transpose());
  CHECK(open.products.row(2) == coeffs({1, 2}).transpose());
  CHECK(open.rates[2] == -k2);
  // 0 -> E, E_T k3
  CHECK(open.reactants.row(3).isZero());
  CHECK(open.products.row(3) == coeffs({0, 1}).transpose());
  CHECK(open.rates[3] == et * k3);
  // E -> 2E, -k3
  CHECK(open.reactants.row(4) == coeffs({0, 1}).transpose());
  CHECK(open.products.row(4) == coeffs({0, 2}).transpose());
  CHECK(open.rates[4] == -k3);
}

TEST_CASE("to_open_form identity and errors") {
  auto net = load_network("birth_death.json");
  CHECK(to_open_form(net, {}, {}) == net);

  auto closed = parse_network(
      R"({"species":["C","P"],"reactions":[{"reactants":{"C":2},"products":{"P":1,"C":2},"rate":1}]})",
      NetworkFormat::json);
  ConservationLaw law{coeffs({1, 0}), 5.0};
  CHECK_THROWS_WITH_AS(to_open_form(closed, {law}, {"C"}),
                       doctest::Contains("NonlinearDependence"), Error);

  ConservationLaw no_total{coeffs({1, 0}), std::nullopt};
  CHECK_THROWS_WITH_AS(to_open_form(closed, {no_total}, {"P"}),
                       doctest::Contains("TotalMissing"), Error);
}

TEST_CASE("validate_over open michaelis-menten") {
  auto closed = load_network("michaelis_menten_closed.json");
  auto laws = conservation_laws(closed);
  for (auto& law : laws)
    law.total = law.coefficients == coeffs({0, 1, 1, 0}) ? 10.0 : 20.0;
  auto open = to_open_form(closed, laws, {"S:E", "P"});
  auto report = validate_over(open, make_box({20, 10}));
  CHECK(report.valid);
  for (const auto& g : report.groups) CHECK(g.min_propensity >= -1e-12);
}

TEST_CASE("validate_over rejects a lone negative rate") {
  auto net = parse_network(
      R"({"species":["E"],"reactions":[{"reactants":{"E":1},"products":{"E":2},"rate":-1}]})",
      NetworkFormat::json);
  auto report = validate_over(net, make_box({10}));
  CHECK(!report.valid);
  REQUIRE(report.groups.size() == 1);
  CHECK(report.groups[0].min_propensity == doctest::Approx(-10.0));
  CHECK(report.groups[0].argmin_state[0] == 10);
}

TEST_CASE("validate_over birth death all minima zero") {
  auto report = validate_over(load_network("birth_death.json"), make_box({30}));
  CHECK(report.valid);
  double least = std::numeric_limits<double>::infinity();
  for (const auto& g : report.groups) {
    CHECK(g.min_propensity >= 0.0);
    least = std::min(least, g.min_propensity);
  }
  CHECK(least == 0.0);  // the death channel vanishes at X = 0
}

TEST_CASE("validate_over dimension mismatch") {
  CHECK_THROWS_WITH_AS(validate_over(load_network("birth_death.json"), make_box({10, 10})),
                       doctest::Contains("DimensionMismatch"), Error);
}

// Transforming a closed system must not change the stationary law of the
// independent species: compare the truncated-CME solution of the closed
// network restricted to its conserved manifold against the CME solution of
// the transformed open network.
TEST_CASE("to_open_form preserves stationary dynamics") {
  detail::SplitMix64 rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    // reversible Michaelis-Menten with random rates: ergodic on the manifold
    double k1 = 0.2 + rng.next_open01(), k2 = 0.2 + rng.next_open01();
    double k3 = 0.2 + rng.next_open01(), k4 = 0.2 + rng.next_open01();
    std::ostringstream os;
    os << R"({"species":["S","E","C","P"],"reactions":[)"
       << R"({"reactants":{"S":1,"E":1},"products":{"C":1},"rate":)" << k1 << "},"
       << R"({"reactants":{"C":1},"products":{"S":1,"E":1},"rate":)" << k2 << "},"
       << R"({"reactants":{"C":1},"products":{"P":1,"E":1},"rate":)" << k3 << "},"
       << R"({"reactants":{"P":1,"E":1},"products":{"C":1},"rate":)" << k4 << "}]}";
    auto closed = parse_network(os.str(), NetworkFormat::json);

    const int et = 3, st = 6;
    auto laws = conservation_laws(closed);
    REQUIRE(laws.size() == 2);
    for (auto& law : laws) law.total = law.coefficients[0] == 1 ? double(st) : double(et);
    auto open = to_open_form(closed, laws, {"C", "P"});

    // implied P = S_T - E_T - S + E stays nonnegative on this box
    StateSpace indep = make_box({st - et, et});
    auto open_p = cme_stationary(open, indep);

    // closed-chain generator on the manifold, indexed by (S, E)
    const auto n = static_cast<Eigen::Index>(indep.size());
    Eigen::MatrixXd qt = Eigen::MatrixXd::Zero(n, n);
    for_each_state(indep, [&](const Eigen::VectorXi& se, std::size_t flat) {
      Eigen::VectorXi full(4);
      full << se[0], se[1], et - se[1], st - se[0] - (et - se[1]);
      if (full.minCoeff() < 0) return;
      for (int r = 0; r < closed.reaction_count(); ++r) {
        double a = closed.propensity(r, full);
        if (a <= 0.0) continue;
        Eigen::VectorXi next_full = full + closed.net_change(r);
        Eigen::VectorXi next_se(2);
        next_se << next_full[0], next_full[1];
        if (!indep.contains(next_se)) continue;
        auto to = static_cast<Eigen::Index>(indep.flat_index(next_se));
        qt(to, static_cast<Eigen::Index>(flat)) += a;
        qt(static_cast<Eigen::Index>(flat), static_cast<Eigen::Index>(flat)) -= a;
      }
    });
    qt.row(0).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs[0] = 1.0;
    Eigen::VectorXd closed_p = qt.fullPivLu().solve(rhs);

    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(closed_p[i] - open_p.p[i]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("grouped propensities of a transformed network stay nonnegative") {
  auto closed = load_network("michaelis_menten_closed.json");
  auto laws = conservation_laws(closed);
  for (auto& law : laws)
    law.total = law.coefficients == coeffs({0, 1, 1, 0}) ? 7.0 : 15.0;
  auto open = to_open_form(closed, laws, {"S:E", "P"});
  auto report = validate_over(open, make_box({15, 7}));
  CHECK(report.valid);
}
