#include "zics/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

namespace zics {

namespace {

Eigen::VectorXd pad_warm_start(const Eigen::VectorXd& warm, int psi) {
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(psi);
  lam.head(std::min<Eigen::Index>(warm.size(), psi)) = warm.head(std::min<Eigen::Index>(warm.size(), psi));
  return lam;
}

struct Evaluation {
  DistributionTable dist;
  Eigen::VectorXd mu;        // lower moments
  Eigen::VectorXd mu_prime;  // higher moments
  Eigen::VectorXd R;
  double norm = 0.0;
};

Evaluation evaluate(const StateSpace& space, const MomentBasis& basis,
                    const MomentEquations& eqs, const Eigen::VectorXd& lam) {
  Evaluation ev{distribution(space, basis, lam), {}, {}, {}, 0.0};
  ev.mu = moments_of(ev.dist, basis.lower);
  ev.mu_prime = basis.higher.empty() ? Eigen::VectorXd(0) : moments_of(ev.dist, basis.higher);
  ev.R = residual(eqs, ev.mu, ev.mu_prime);
  ev.norm = residual_norm(eqs, ev.mu, ev.mu_prime);
  return ev;
}

}  // namespace

Eigen::VectorXd residual(const MomentEquations& eqs, const Eigen::VectorXd& mu,
                         const Eigen::VectorXd& mu_prime) {
  if (mu.size() != eqs.A.cols() || mu_prime.size() != eqs.A_prime.cols())
    throw Error(Errc::dimension_mismatch, "moment vector lengths do not match the equations");
  Eigen::VectorXd r = eqs.A * mu + eqs.mu_c;
  if (mu_prime.size() > 0) r += eqs.A_prime * mu_prime;
  return r;
}

double residual_norm(const MomentEquations& eqs, const Eigen::VectorXd& mu,
                     const Eigen::VectorXd& mu_prime) {
  Eigen::VectorXd r = residual(eqs, mu, mu_prime);
  Eigen::VectorXd scale = eqs.A.cwiseAbs() * mu.cwiseAbs() + eqs.mu_c.cwiseAbs();
  if (mu_prime.size() > 0) scale += eqs.A_prime.cwiseAbs() * mu_prime.cwiseAbs();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i)
    worst = std::max(worst, std::abs(r[i]) / std::max(1.0, scale[i]));
  return worst;
}

Eigen::MatrixXd jacobian(const StateSpace& space, const MomentBasis& basis,
                         const Eigen::VectorXd& lambdas, const MomentEquations& eqs) {
  DistributionTable dist = distribution(space, basis, lambdas);
  Eigen::VectorXd mu = moments_of(dist, basis.lower);

  std::vector<MomentIndex> all = basis.lower;
  all.insert(all.end(), basis.higher.begin(), basis.higher.end());
  Eigen::MatrixXd cross = cross_moments(dist, all, basis.lower);
  Eigen::VectorXd mu_all = moments_of(dist, all);

  const int psi = basis.psi();
  Eigen::MatrixXd j_low(psi, psi);
  for (int i = 0; i < psi; ++i)
    for (int j = 0; j < psi; ++j) j_low(i, j) = -cross(i, j) + mu_all[i] * mu[j];
  Eigen::MatrixXd jr = eqs.A * j_low;
  if (basis.psi_prime() > 0) {
    Eigen::MatrixXd j_high(basis.psi_prime(), psi);
    for (int i = 0; i < basis.psi_prime(); ++i)
      for (int j = 0; j < psi; ++j)
        j_high(i, j) = -cross(psi + i, j) + mu_all[psi + i] * mu[j];
    jr += eqs.A_prime * j_high;
  }
  return jr;
}

ClosureSolution solve_at_order(const ReactionNetwork& net, const StateSpace& space, int order,
                               const SolverConfig& config,
                               const std::optional<Eigen::VectorXd>& warm) {
  if (order < 1) throw Error(Errc::malformed_input, "closure order must be >= 1");
  {
    ValidationReport report = validate_over(net, space);
    if (!report.valid)
      throw Error(Errc::invalid_network,
                  "grouped propensities become negative on the state space");
  }

  MomentBasis basis = build_basis(net.species_count(), order);
  MomentEquations eqs = generate_equations(net, basis);
  const int psi = basis.psi();

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(psi);
  if (warm)
    lam = pad_warm_start(*warm, psi);
  else if (config.initial_lambdas)
    lam = pad_warm_start(*config.initial_lambdas, psi);

  Evaluation ev = evaluate(space, basis, eqs, lam);
  int iters = 0;
  while (ev.norm > config.residual_tol) {
    if (iters >= config.max_newton_iters)
      throw Error(Errc::iter_limit, "Newton iteration limit reached at order " +
                                        std::to_string(order));
    Eigen::MatrixXd jr = jacobian(space, basis, lam, eqs);
    // Rows and columns span many orders of magnitude (moment rows scale
    // like mean^order); equilibrate before factoring so the rank test and
    // the step are meaningful.
    Eigen::VectorXd d1 = jr.cwiseAbs().rowwise().maxCoeff().cwiseMax(1e-300).cwiseInverse();
    Eigen::MatrixXd scaled = d1.asDiagonal() * jr;
    Eigen::VectorXd d2 = scaled.cwiseAbs().colwise().maxCoeff().transpose().cwiseMax(1e-300).cwiseInverse();
    scaled = scaled * d2.asDiagonal();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
    lu.setThreshold(1e-12);
    if (lu.rank() < psi)
      throw Error(Errc::singular_jacobian,
                  "Jacobian is rank deficient at order " + std::to_string(order));
    Eigen::VectorXd scaled_rhs = -(d1.cwiseProduct(ev.R));
    Eigen::VectorXd step = d2.cwiseProduct(lu.solve(scaled_rhs));

    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= config.max_backtracks; ++bt) {
      Eigen::VectorXd trial = lam + alpha * step;
      try {
        Evaluation trial_ev = evaluate(space, basis, eqs, trial);
        if (std::isfinite(trial_ev.norm) && trial_ev.norm < ev.norm) {
          lam = std::move(trial);
          ev = std::move(trial_ev);
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != Errc::non_finite_exponent) throw;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      throw Error(Errc::no_descent,
                  "backtracking could not reduce the residual at order " + std::to_string(order));
    ++iters;
  }

  ClosureSolution sol;
  sol.order_used = order;
  sol.basis = std::move(basis);
  sol.lambdas.lambdas = lam;
  sol.lambdas.lambda0 = normalizer(space, sol.basis, lam);
  sol.moments_lower = ev.mu;
  sol.moments_higher = ev.mu_prime;
  sol.distribution = std::move(ev.dist);
  sol.residual_norm = ev.norm;
  sol.iterations = iters;
  sol.boundary_mass = sol.distribution.boundary_mass();
  sol.per_order_history.push_back(OrderTrace{order, sol.residual_norm, 0.0, iters});
  if (sol.boundary_mass > 1e-3)
    sol.warning = "boundary mass " + std::to_string(sol.boundary_mass) +
                  " exceeds 1e-3; the state space may be truncating the distribution";
  return sol;
}

ClosureSolution solve_adaptive(const ReactionNetwork& net, const StateSpace& space,
                               const SolverConfig& config) {
  if (config.initial_order > config.max_order)
    throw Error(Errc::malformed_input, "initial_order must not exceed max_order");

  ClosureSolution sol = solve_at_order(net, space, config.initial_order, config);
  for (int order = config.initial_order + 1; order <= config.max_order; ++order) {
    ClosureSolution next;
    try {
      next = solve_at_order(net, space, order, config, sol.lambdas.lambdas);
    } catch (const Error&) {
      sol.warning = "escalation to order " + std::to_string(order) +
                    " failed; returning the order-" + std::to_string(order - 1) + " solution";
      return sol;
    }
    double l1 = l1_distance(next.distribution, sol.distribution);
    next.per_order_history = sol.per_order_history;
    next.per_order_history.push_back(OrderTrace{order, next.residual_norm, l1, next.iterations});
    sol = std::move(next);
    if (config.adaptive && l1 < config.order_escalation_tol) break;
  }
  return sol;
}

std::string save_lambdas(const ClosureSolution& sol, const std::vector<std::string>& species) {
  nlohmann::ordered_json doc;
  doc["order"] = sol.order_used;
  std::vector<std::string> labels;
  for (const auto& idx : sol.basis.lower) labels.push_back(moment_label(idx, species));
  doc["labels"] = labels;
  doc["lambdas"] = std::vector<double>(sol.lambdas.lambdas.begin(), sol.lambdas.lambdas.end());
  return doc.dump(2) + "\n";
}

std::pair<int, Eigen::VectorXd> load_lambdas(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_input, e.what());
  }
  if (!doc.contains("order") || !doc.contains("lambdas"))
    throw Error(Errc::malformed_input, "warm-start file needs 'order' and 'lambdas'");
  auto values = doc.at("lambdas").get<std::vector<double>>();
  Eigen::VectorXd lam = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return {doc.at("order").get<int>(), std::move(lam)};
}

}  // namespace zics
