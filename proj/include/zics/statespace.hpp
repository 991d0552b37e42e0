#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "zics/moments.hpp"

namespace zics {

/// Truncated N-dimensional lattice of molecule counts, one [min, max] pair
/// per species. Enumeration is row-major with the last species varying
/// fastest; this order is fixed for reproducibility.
struct StateSpace {
  struct Bound {
    int min = 0;
    int max = 0;
  };
  std::vector<Bound> bounds;

  StateSpace() = default;
  explicit StateSpace(std::vector<Bound> b);

  int dim() const { return static_cast<int>(bounds.size()); }
  std::size_t size() const;

  std::size_t flat_index(const Eigen::VectorXi& state) const;
  Eigen::VectorXi state_at(std::size_t flat) const;
  bool contains(const Eigen::VectorXi& state) const;
  /// True if any coordinate sits on its max bound (truncation boundary).
  bool on_max_boundary(const Eigen::VectorXi& state) const;
};

/// Visits all states in the fixed row-major order.
void for_each_state(const StateSpace& space,
                    const std::function<void(const Eigen::VectorXi&, std::size_t)>& fn);

/// Probabilities over a StateSpace in its enumeration order.
struct DistributionTable {
  StateSpace space;
  Eigen::VectorXd p;

  double at(const Eigen::VectorXi& state) const { return p[static_cast<Eigen::Index>(space.flat_index(state))]; }
  /// Marginal over one species, indexed from that species' min bound.
  Eigen::VectorXd marginal(int species) const;
  double boundary_mass() const;
};

/// sum |a - b| over the shared space; requires identical spaces.
double l1_distance(const DistributionTable& a, const DistributionTable& b);
inline double total_variation(const DistributionTable& a, const DistributionTable& b) {
  return 0.5 * l1_distance(a, b);
}

/// Lagrange multipliers lambda_1..lambda_Psi aligned with basis.lower;
/// lambda0 is always derived from them over a state space, never free.
struct LagrangeVector {
  Eigen::VectorXd lambdas;
  double lambda0 = 0.0;
};

/// log sum_Omega exp(-sum_i lambda_i f_i(X)), max-shifted so intermediate
/// exponentials cannot overflow.
double normalizer(const StateSpace& space, const MomentBasis& basis, const Eigen::VectorXd& lambdas);

/// P(X) = exp(-lambda0 - sum_i lambda_i f_i(X)); sums to 1.
DistributionTable distribution(const StateSpace& space, const MomentBasis& basis,
                               const Eigen::VectorXd& lambdas);

/// mu_t = sum_Omega f_t(X) P(X) for each target index (lower or higher).
Eigen::VectorXd moments_of(const DistributionTable& dist, const std::vector<MomentIndex>& targets);
Eigen::VectorXd moments_of(const StateSpace& space, const MomentBasis& basis,
                           const Eigen::VectorXd& lambdas, const std::vector<MomentIndex>& targets);

/// Entry (i, j) = sum_Omega f_rows[i](X) f_cols[j](X) P(X).
Eigen::MatrixXd cross_moments(const DistributionTable& dist, const std::vector<MomentIndex>& rows,
                              const std::vector<MomentIndex>& cols);
Eigen::MatrixXd cross_moments(const StateSpace& space, const MomentBasis& basis,
                              const Eigen::VectorXd& lambdas, const std::vector<MomentIndex>& rows,
                              const std::vector<MomentIndex>& cols);

namespace detail {

/// Neumaier compensated accumulator; Omega reductions can run to 1e6+ terms.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

/// Per-species falling-factorial lookup: table(species)[x - min][m].
class FallingFactorialTable {
 public:
  FallingFactorialTable(const StateSpace& space, int max_order);

  double value(int species, int x, int m) const { return tables_[species][static_cast<std::size_t>(x - mins_[species]) * stride_ + m]; }

  /// f_idx(X) as a product of per-species falling factorials.
  double moment_function(const MomentIndex& idx, const Eigen::VectorXi& state) const;

 private:
  std::vector<std::vector<double>> tables_;
  std::vector<int> mins_;
  std::size_t stride_ = 0;
};

}  // namespace detail

}  // namespace zics
