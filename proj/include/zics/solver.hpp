#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zics/moments.hpp"
#include "zics/network.hpp"
#include "zics/statespace.hpp"

namespace zics {

struct SolverConfig {
  int max_order = 8;
  int initial_order = 2;
  /// Convergence threshold on the scaled residual norm, see residual_norm().
  double residual_tol = 1e-9;
  int max_newton_iters = 200;
  int max_backtracks = 30;
  /// L1 distance between successive orders' distributions below which
  /// adaptive escalation stops.
  double order_escalation_tol = 1e-4;
  bool adaptive = true;
  std::optional<Eigen::VectorXd> initial_lambdas;
};

struct OrderTrace {
  int order = 0;
  double residual_norm = 0.0;
  double l1_step = 0.0;  // L1 distance to the previous order's distribution
  int iterations = 0;
};

struct ClosureSolution {
  int order_used = 0;
  MomentBasis basis;
  LagrangeVector lambdas;
  Eigen::VectorXd moments_lower;
  Eigen::VectorXd moments_higher;
  DistributionTable distribution;
  double residual_norm = 0.0;
  int iterations = 0;
  double boundary_mass = 0.0;
  std::vector<OrderTrace> per_order_history;
  /// Set when escalation failed at a higher order (previous order returned)
  /// or when boundary mass exceeds 1e-3 (truncation suspect).
  std::optional<std::string> warning;
};

/// R = A mu + A' mu' + mu_c.
Eigen::VectorXd residual(const MomentEquations& eqs, const Eigen::VectorXd& mu,
                         const Eigen::VectorXd& mu_prime);

/// Componentwise backward-relative infinity norm of the residual:
/// max_i |R_i| / max(1, (|A||mu| + |A'||mu'| + |mu_c|)_i). High-order moment
/// rows scale like mean^order, so an absolute norm would demand impossible
/// precision; this norm is what residual_tol is compared against.
double residual_norm(const MomentEquations& eqs, const Eigen::VectorXd& mu,
                     const Eigen::VectorXd& mu_prime);

/// J_R = A J_low + A' J_high with (J_*)_{ij} = -mu_{i,j} + mu_i mu_j.
Eigen::MatrixXd jacobian(const StateSpace& space, const MomentBasis& basis,
                         const Eigen::VectorXd& lambdas, const MomentEquations& eqs);

ClosureSolution solve_at_order(const ReactionNetwork& net, const StateSpace& space, int order,
                               const SolverConfig& config,
                               const std::optional<Eigen::VectorXd>& warm = std::nullopt);

/// Solves at initial_order, then escalates order by order (warm-starting
/// with the previous lambdas, new entries zero) until the distribution
/// stops moving, max_order is reached, or adaptive is off.
ClosureSolution solve_adaptive(const ReactionNetwork& net, const StateSpace& space,
                               const SolverConfig& config);

/// Warm-start persistence: {"order": m, "labels": [...], "lambdas": [...]}.
std::string save_lambdas(const ClosureSolution& sol, const std::vector<std::string>& species);
std::pair<int, Eigen::VectorXd> load_lambdas(const std::string& text);

}  // namespace zics
