#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "zics/network.hpp"

namespace zics {

/// Multi-index (m_1 ... m_N) of a factorial moment. The moment function is
/// the product of falling factorials f(X) = prod_j X_j (X_j-1) ... (X_j-m_j+1);
/// the all-zero index denotes the zeroth moment, f == 1.
using MomentIndex = std::vector<int>;

int index_order(const MomentIndex& idx);

/// Label like "X", "X^2 Y" for display and export headers.
std::string moment_label(const MomentIndex& idx, const std::vector<std::string>& species);

/// Lower-order indices (1 <= order <= M) in graded order: ascending total
/// order, then lexicographic with earlier species varying slowest. `higher`
/// holds the indices of order > M that the moment equations reference; it is
/// filled by generate_equations().
struct MomentBasis {
  int n_species = 0;
  int closure_order = 0;
  std::vector<MomentIndex> lower;
  std::vector<MomentIndex> higher;

  int psi() const { return static_cast<int>(lower.size()); }
  int psi_prime() const { return static_cast<int>(higher.size()); }
};

/// Stationary moment equations: row i encodes
///   d mu_i / dt = (A mu + A' mu' + mu_c)_i.
struct MomentEquations {
  Eigen::MatrixXd A;        // Psi x Psi
  Eigen::MatrixXd A_prime;  // Psi x Psi'
  Eigen::VectorXd mu_c;     // Psi
};

/// Lower indices only; count is C(N+M, N) - 1.
MomentBasis build_basis(int n_species, int closure_order);

/// Expands d E[f_i]/dt under the mass-action generator in the
/// falling-factorial basis, exactly (integer coefficients times rates).
/// Populates basis.higher with the indices receiving nonzero A' columns.
MomentEquations generate_equations(const ReactionNetwork& net, MomentBasis& basis);

enum class EquationFormat { json, csv, text };

std::string export_equations(const MomentEquations& eqs, const MomentBasis& basis,
                             const std::vector<std::string>& species, EquationFormat format);

}  // namespace zics
