#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "zics/error.hpp"

namespace zics {

struct StateSpace;

/// A mass-action reaction network: R irreversible reactions over N named
/// species. Negative rate constants are representable (they arise from the
/// closed-to-open transformation) and are only rejected when a state space
/// is available to check grouped propensities, see validate_over().
struct ReactionNetwork {
  std::vector<std::string> species;
  Eigen::MatrixXi reactants;  // R x N, molecules consumed
  Eigen::MatrixXi products;   // R x N, molecules produced
  Eigen::VectorXd rates;

  int species_count() const { return static_cast<int>(species.size()); }
  int reaction_count() const { return static_cast<int>(rates.size()); }

  Eigen::VectorXi net_change(int reaction) const {
    return (products.row(reaction) - reactants.row(reaction)).transpose();
  }

  /// Mass-action propensity of one reaction at state x: rate times the
  /// product of falling factorials of the reactant counts.
  double propensity(int reaction, const Eigen::VectorXi& x) const;

  /// Human-readable arrow form, e.g. "Y -> 2 X (k=35)".
  std::string reaction_string(int reaction) const;

  /// Validates shapes and builds the network. Empty `names` yields default
  /// names A, B, ..., Z, AA, AB, ...
  static ReactionNetwork from_matrices(Eigen::MatrixXi reactants, Eigen::MatrixXi products,
                                       Eigen::VectorXd rates,
                                       std::vector<std::string> names = {});
};

bool operator==(const ReactionNetwork& a, const ReactionNetwork& b);

/// An integer left null vector of the net stoichiometry matrix, optionally
/// carrying the user-supplied conserved total (e.g. E_T).
struct ConservationLaw {
  Eigen::VectorXi coefficients;  // length N, nonnegative, not all zero
  std::optional<double> total;
};

enum class NetworkFormat { json, tsv };

ReactionNetwork parse_network(const std::string& text, NetworkFormat format);
std::string save_network(const ReactionNetwork& net, NetworkFormat format = NetworkFormat::json);

/// Reactions with the same net change vector, whose propensities only make
/// sense summed (negative constants from the open-form transformation).
struct PropensityGroup {
  Eigen::VectorXi net_change;
  std::vector<int> reactions;
  double min_propensity = 0.0;
  Eigen::VectorXi argmin_state;
};

struct ValidationReport {
  std::vector<PropensityGroup> groups;
  bool valid = true;
};

/// Checks that every grouped propensity is nonnegative on every state of
/// the given space. A network failing this cannot be solved or simulated.
ValidationReport validate_over(const ReactionNetwork& net, const StateSpace& space);

/// Basis of the integer left null space of (products - reactants), each
/// vector reduced to smallest nonnegative integers. Exact integer
/// arithmetic throughout. Totals are left unset.
std::vector<ConservationLaw> conservation_laws(const ReactionNetwork& net);

/// Eliminates the named dependent species using the given conservation laws
/// (one total per law), producing an open network over the remaining
/// species. Dependent products are dropped; a dependent reactant of
/// coefficient one is replaced by its affine substitution, split into one
/// reaction per affine term (the linear terms carry negative rates with the
/// species added to both sides).
ReactionNetwork to_open_form(const ReactionNetwork& net, const std::vector<ConservationLaw>& laws,
                             const std::vector<std::string>& dependent);

}  // namespace zics
