#include "zics/statespace.hpp"

#include <algorithm>
#include <limits>

namespace zics {

namespace detail {

FallingFactorialTable::FallingFactorialTable(const StateSpace& space, int max_order) {
  stride_ = static_cast<std::size_t>(max_order) + 1;
  tables_.resize(static_cast<std::size_t>(space.dim()));
  mins_.resize(static_cast<std::size_t>(space.dim()));
  for (int j = 0; j < space.dim(); ++j) {
    mins_[static_cast<std::size_t>(j)] = space.bounds[static_cast<std::size_t>(j)].min;
    int span = space.bounds[static_cast<std::size_t>(j)].max - space.bounds[static_cast<std::size_t>(j)].min + 1;
    auto& t = tables_[static_cast<std::size_t>(j)];
    t.resize(static_cast<std::size_t>(span) * stride_);
    for (int x = 0; x < span; ++x) {
      double v = static_cast<double>(x + mins_[static_cast<std::size_t>(j)]);
      double acc = 1.0;
      for (int m = 0; m <= max_order; ++m) {
        t[static_cast<std::size_t>(x) * stride_ + static_cast<std::size_t>(m)] = acc;
        acc *= v - static_cast<double>(m);
      }
    }
  }
}

double FallingFactorialTable::moment_function(const MomentIndex& idx,
                                              const Eigen::VectorXi& state) const {
  double f = 1.0;
  for (int j = 0; j < state.size(); ++j)
    if (idx[static_cast<std::size_t>(j)] != 0) f *= value(j, state[j], idx[static_cast<std::size_t>(j)]);
  return f;
}

}  // namespace detail

StateSpace::StateSpace(std::vector<Bound> b) : bounds(std::move(b)) {
  if (bounds.empty()) throw Error(Errc::malformed_input, "state space needs at least one species");
  std::size_t total = 1;
  for (const auto& bd : bounds) {
    if (bd.min < 0 || bd.max <= bd.min)
      throw Error(Errc::malformed_input, "state space bounds need 0 <= min < max");
    std::size_t span = static_cast<std::size_t>(bd.max - bd.min) + 1;
    if (total > std::numeric_limits<std::size_t>::max() / span)
      throw Error(Errc::cap_exceeded, "state space size overflows the addressable range");
    total *= span;
  }
  if (total < 2) throw Error(Errc::malformed_input, "state space must contain at least 2 states");
}

std::size_t StateSpace::size() const {
  std::size_t total = 1;
  for (const auto& b : bounds) total *= static_cast<std::size_t>(b.max - b.min) + 1;
  return total;
}

std::size_t StateSpace::flat_index(const Eigen::VectorXi& state) const {
  std::size_t idx = 0;
  for (int j = 0; j < dim(); ++j) {
    const auto& b = bounds[static_cast<std::size_t>(j)];
    idx = idx * (static_cast<std::size_t>(b.max - b.min) + 1) +
          static_cast<std::size_t>(state[j] - b.min);
  }
  return idx;
}

Eigen::VectorXi StateSpace::state_at(std::size_t flat) const {
  Eigen::VectorXi state(dim());
  for (int j = dim() - 1; j >= 0; --j) {
    const auto& b = bounds[static_cast<std::size_t>(j)];
    std::size_t span = static_cast<std::size_t>(b.max - b.min) + 1;
    state[j] = static_cast<int>(flat % span) + b.min;
    flat /= span;
  }
  return state;
}

bool StateSpace::contains(const Eigen::VectorXi& state) const {
  for (int j = 0; j < dim(); ++j)
    if (state[j] < bounds[static_cast<std::size_t>(j)].min || state[j] > bounds[static_cast<std::size_t>(j)].max)
      return false;
  return true;
}

bool StateSpace::on_max_boundary(const Eigen::VectorXi& state) const {
  for (int j = 0; j < dim(); ++j)
    if (state[j] == bounds[static_cast<std::size_t>(j)].max) return true;
  return false;
}

void for_each_state(const StateSpace& space,
                    const std::function<void(const Eigen::VectorXi&, std::size_t)>& fn) {
  const int n = space.dim();
  Eigen::VectorXi state(n);
  for (int j = 0; j < n; ++j) state[j] = space.bounds[static_cast<std::size_t>(j)].min;
  const std::size_t total = space.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    fn(state, flat);
    for (int j = n - 1; j >= 0; --j) {
      if (state[j] < space.bounds[static_cast<std::size_t>(j)].max) {
        ++state[j];
        break;
      }
      state[j] = space.bounds[static_cast<std::size_t>(j)].min;
    }
  }
}

Eigen::VectorXd DistributionTable::marginal(int species) const {
  const auto& b = space.bounds[static_cast<std::size_t>(species)];
  Eigen::VectorXd m = Eigen::VectorXd::Zero(b.max - b.min + 1);
  for_each_state(space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    m[x[species] - b.min] += p[static_cast<Eigen::Index>(flat)];
  });
  return m;
}

double DistributionTable::boundary_mass() const {
  detail::CompensatedSum s;
  for_each_state(space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    if (space.on_max_boundary(x)) s.add(p[static_cast<Eigen::Index>(flat)]);
  });
  return s.value();
}

double l1_distance(const DistributionTable& a, const DistributionTable& b) {
  if (a.p.size() != b.p.size())
    throw Error(Errc::dimension_mismatch, "distributions live on different spaces");
  detail::CompensatedSum s;
  for (Eigen::Index i = 0; i < a.p.size(); ++i) s.add(std::abs(a.p[i] - b.p[i]));
  return s.value();
}

namespace {

int max_index_order(const MomentBasis& basis) {
  int m = basis.closure_order;
  for (const auto& idx : basis.higher) m = std::max(m, index_order(idx));
  return m;
}

/// Exponents -sum_i lambda_i f_i(X) for all states, plus their max.
std::pair<Eigen::VectorXd, double> exponents(const StateSpace& space, const MomentBasis& basis,
                                             const Eigen::VectorXd& lambdas) {
  if (lambdas.size() != basis.psi())
    throw Error(Errc::dimension_mismatch, "lambda length does not match basis size");
  detail::FallingFactorialTable ff(space, max_index_order(basis));
  Eigen::VectorXd e(static_cast<Eigen::Index>(space.size()));
  double emax = -std::numeric_limits<double>::infinity();
  for_each_state(space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    double s = 0.0;
    for (int i = 0; i < basis.psi(); ++i)
      s -= lambdas[i] * ff.moment_function(basis.lower[static_cast<std::size_t>(i)], x);
    if (!std::isfinite(s)) throw Error(Errc::non_finite_exponent, "lambda * f is not finite");
    e[static_cast<Eigen::Index>(flat)] = s;
    emax = std::max(emax, s);
  });
  return {std::move(e), emax};
}

}  // namespace

double normalizer(const StateSpace& space, const MomentBasis& basis,
                  const Eigen::VectorXd& lambdas) {
  auto [e, emax] = exponents(space, basis, lambdas);
  detail::CompensatedSum s;
  for (Eigen::Index i = 0; i < e.size(); ++i) s.add(std::exp(e[i] - emax));
  return emax + std::log(s.value());
}

DistributionTable distribution(const StateSpace& space, const MomentBasis& basis,
                               const Eigen::VectorXd& lambdas) {
  auto [e, emax] = exponents(space, basis, lambdas);
  detail::CompensatedSum s;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    e[i] = std::exp(e[i] - emax);
    s.add(e[i]);
  }
  DistributionTable table{space, std::move(e)};
  table.p /= s.value();
  return table;
}

Eigen::VectorXd moments_of(const DistributionTable& dist, const std::vector<MomentIndex>& targets) {
  int maxo = 1;
  for (const auto& idx : targets) maxo = std::max(maxo, index_order(idx));
  detail::FallingFactorialTable ff(dist.space, maxo);
  std::vector<detail::CompensatedSum> sums(targets.size());
  for_each_state(dist.space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    double pv = dist.p[static_cast<Eigen::Index>(flat)];
    for (std::size_t t = 0; t < targets.size(); ++t)
      sums[t].add(ff.moment_function(targets[t], x) * pv);
  });
  Eigen::VectorXd mu(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t t = 0; t < targets.size(); ++t) mu[static_cast<Eigen::Index>(t)] = sums[t].value();
  return mu;
}

Eigen::VectorXd moments_of(const StateSpace& space, const MomentBasis& basis,
                           const Eigen::VectorXd& lambdas,
                           const std::vector<MomentIndex>& targets) {
  return moments_of(distribution(space, basis, lambdas), targets);
}

Eigen::MatrixXd cross_moments(const DistributionTable& dist, const std::vector<MomentIndex>& rows,
                              const std::vector<MomentIndex>& cols) {
  int maxo = 1;
  for (const auto& idx : rows) maxo = std::max(maxo, index_order(idx));
  for (const auto& idx : cols) maxo = std::max(maxo, index_order(idx));
  detail::FallingFactorialTable ff(dist.space, maxo);
  std::vector<detail::CompensatedSum> sums(rows.size() * cols.size());
  std::vector<double> fr(rows.size()), fc(cols.size());
  for_each_state(dist.space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    double pv = dist.p[static_cast<Eigen::Index>(flat)];
    for (std::size_t i = 0; i < rows.size(); ++i) fr[i] = ff.moment_function(rows[i], x);
    for (std::size_t j = 0; j < cols.size(); ++j) fc[j] = ff.moment_function(cols[j], x);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) sums[i * cols.size() + j].add(fr[i] * fc[j] * pv);
  });
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sums[i * cols.size() + j].value();
  return m;
}

Eigen::MatrixXd cross_moments(const StateSpace& space, const MomentBasis& basis,
                              const Eigen::VectorXd& lambdas, const std::vector<MomentIndex>& rows,
                              const std::vector<MomentIndex>& cols) {
  return cross_moments(distribution(space, basis, lambdas), rows, cols);
}

}  // namespace zics
