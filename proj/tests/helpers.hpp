#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "zics/network.hpp"
#include "zics/oracle.hpp"
#include "zics/statespace.hpp"

namespace zics::testing {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline ReactionNetwork load_network(const std::string& name) {
  return parse_network(read_file(std::string(ZICS_DATA_DIR) + "/networks/" + name),
                       NetworkFormat::json);
}

/// Small random mass-action network: up to 3 species, up to bimolecular
/// reactants, positive rates.
inline ReactionNetwork random_network(detail::SplitMix64& rng, int max_species = 3,
                                      int max_reactions = 4) {
  int n = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_species));
  int r = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_reactions));
  Eigen::MatrixXi reac = Eigen::MatrixXi::Zero(r, n);
  Eigen::MatrixXi prod = Eigen::MatrixXi::Zero(r, n);
  Eigen::VectorXd rates(r);
  for (int i = 0; i < r; ++i) {
    while (true) {
      reac.row(i).setZero();
      prod.row(i).setZero();
      int reac_total = static_cast<int>(rng.next() % 3);  // at most bimolecular
      for (int t = 0; t < reac_total; ++t) reac(i, static_cast<int>(rng.next() % static_cast<std::uint64_t>(n)))++;
      int prod_total = static_cast<int>(rng.next() % 3);
      for (int t = 0; t < prod_total; ++t) prod(i, static_cast<int>(rng.next() % static_cast<std::uint64_t>(n)))++;
      if (!(reac.row(i).isZero() && prod.row(i).isZero()) && reac.row(i) != prod.row(i)) break;
    }
    rates[i] = 0.2 + 2.8 * rng.next_open01();
  }
  return ReactionNetwork::from_matrices(reac, prod, rates);
}

inline StateSpace make_box(const std::vector<int>& maxes) {
  std::vector<StateSpace::Bound> b;
  for (int m : maxes) b.push_back({0, m});
  return StateSpace(b);
}

/// Random probability vector supported on the interior states of the space
/// (no outgoing jump leaves Omega), normalized.
inline DistributionTable random_interior_distribution(const ReactionNetwork& net,
                                                      const StateSpace& space,
                                                      detail::SplitMix64& rng) {
  auto mask = interior_mask(net, space);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!mask[i]) continue;
    double v = rng.next_open01();
    p[static_cast<Eigen::Index>(i)] = v;
    sum += v;
  }
  REQUIRE(sum > 0.0);
  p /= sum;
  return DistributionTable{space, std::move(p)};
}

}  // namespace zics::testing
