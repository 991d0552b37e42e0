#include "zics/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <Eigen/SparseLU>

namespace zics {

namespace {

struct Channel {
  Eigen::VectorXi net_change;
  std::vector<int> reactions;
};

/// Reactions grouped by net change vector; the open-form transformation
/// produces paired positive/negative constants whose propensities are only
/// nonnegative summed per group.
std::vector<Channel> grouped_channels(const ReactionNetwork& net) {
  std::map<std::vector<int>, std::vector<int>> by_change;
  for (int r = 0; r < net.reaction_count(); ++r) {
    Eigen::VectorXi nu = net.net_change(r);
    by_change[std::vector<int>(nu.data(), nu.data() + nu.size())].push_back(r);
  }
  std::vector<Channel> channels;
  for (const auto& [nu, members] : by_change) {
    if (std::all_of(nu.begin(), nu.end(), [](int v) { return v == 0; })) continue;
    channels.push_back(Channel{
        Eigen::Map<const Eigen::VectorXi>(nu.data(), static_cast<Eigen::Index>(nu.size())),
        members});
  }
  return channels;
}

double channel_propensity(const ReactionNetwork& net, const Channel& ch,
                          const Eigen::VectorXi& x) {
  double a = 0.0;
  for (int r : ch.reactions) a += net.propensity(r, x);
  return a;
}

struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b9;
      h *= 1099511628211ULL;
    }
    return h;
  }
};

/// Number of closed communicating classes (terminal strongly connected
/// components) of the jump graph. The truncated chain has a unique
/// stationary distribution exactly when this is one; the LU solve alone can
/// miss reducibility by returning one valid mixture of class-stationary
/// distributions.
int count_closed_classes(const Eigen::SparseMatrix<double>& q) {
  const int n = static_cast<int>(q.rows());
  // adjacency in CSR form from the off-diagonal pattern of Q
  std::vector<int> head(static_cast<std::size_t>(n) + 1, 0), adj;
  for (int col = 0; col < q.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(q, col); it; ++it)
      if (it.row() != it.col()) ++head[static_cast<std::size_t>(it.row()) + 1];
  for (int i = 0; i < n; ++i) head[static_cast<std::size_t>(i) + 1] += head[static_cast<std::size_t>(i)];
  adj.resize(static_cast<std::size_t>(head[static_cast<std::size_t>(n)]));
  {
    std::vector<int> fill(head.begin(), head.end() - 1);
    for (int col = 0; col < q.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(q, col); it; ++it)
        if (it.row() != it.col()) adj[static_cast<std::size_t>(fill[it.row()]++)] = col;
  }

  // iterative Tarjan
  constexpr int kUnvisited = -1;
  std::vector<int> index(static_cast<std::size_t>(n), kUnvisited),
      lowlink(static_cast<std::size_t>(n)), comp(static_cast<std::size_t>(n), kUnvisited);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  int next_index = 0, n_comps = 0;

  struct Frame {
    int v;
    int edge;  // next adjacency slot to explore
  };
  std::vector<Frame> call;
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != kUnvisited) continue;
    call.push_back({root, head[static_cast<std::size_t>(root)]});
    index[static_cast<std::size_t>(root)] = lowlink[static_cast<std::size_t>(root)] = next_index++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < head[static_cast<std::size_t>(f.v) + 1]) {
        int w = adj[static_cast<std::size_t>(f.edge++)];
        if (index[static_cast<std::size_t>(w)] == kUnvisited) {
          index[static_cast<std::size_t>(w)] = lowlink[static_cast<std::size_t>(w)] = next_index++;
          stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = true;
          call.push_back({w, head[static_cast<std::size_t>(w)]});
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          lowlink[static_cast<std::size_t>(f.v)] =
              std::min(lowlink[static_cast<std::size_t>(f.v)], index[static_cast<std::size_t>(w)]);
        }
      } else {
        int v = f.v;
        if (lowlink[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = false;
            comp[static_cast<std::size_t>(w)] = n_comps;
          } while (w != v);
          ++n_comps;
        }
        call.pop_back();
        if (!call.empty()) {
          int u = call.back().v;
          lowlink[static_cast<std::size_t>(u)] =
              std::min(lowlink[static_cast<std::size_t>(u)], lowlink[static_cast<std::size_t>(v)]);
        }
      }
    }
  }

  std::vector<bool> closed(static_cast<std::size_t>(n_comps), true);
  for (int v = 0; v < n; ++v)
    for (int e = head[static_cast<std::size_t>(v)]; e < head[static_cast<std::size_t>(v) + 1]; ++e)
      if (comp[static_cast<std::size_t>(v)] != comp[static_cast<std::size_t>(adj[static_cast<std::size_t>(e)])])
        closed[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] = false;
  int count = 0;
  for (bool c : closed) count += c ? 1 : 0;
  return count;
}

}  // namespace

Eigen::SparseMatrix<double> generator_matrix(const ReactionNetwork& net, const StateSpace& space) {
  if (space.dim() != net.species_count())
    throw Error(Errc::dimension_mismatch, "state space dimension does not match species count");
  auto channels = grouped_channels(net);
  const auto n = static_cast<Eigen::Index>(space.size());

  std::vector<Eigen::Triplet<double>> triplets;
  for_each_state(space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    double outflow = 0.0;
    for (const auto& ch : channels) {
      Eigen::VectorXi y = x + ch.net_change;
      if (!space.contains(y)) continue;  // jumps out of Omega are deleted
      double a = channel_propensity(net, ch, x);
      if (a == 0.0) continue;
      triplets.emplace_back(static_cast<int>(flat), static_cast<int>(space.flat_index(y)), a);
      outflow += a;
    }
    if (outflow != 0.0)
      triplets.emplace_back(static_cast<int>(flat), static_cast<int>(flat), -outflow);
  });

  Eigen::SparseMatrix<double> q(n, n);
  q.setFromTriplets(triplets.begin(), triplets.end());
  return q;
}

DistributionTable cme_stationary(const ReactionNetwork& net, const StateSpace& space,
                                 std::size_t max_states) {
  if (space.size() > max_states)
    throw Error(Errc::cap_exceeded, "state space has " + std::to_string(space.size()) +
                                        " states, cap is " + std::to_string(max_states));
  {
    ValidationReport report = validate_over(net, space);
    if (!report.valid)
      throw Error(Errc::invalid_network, "grouped propensities negative on the state space");
  }

  Eigen::SparseMatrix<double> q = generator_matrix(net, space);
  const auto n = static_cast<Eigen::Index>(space.size());
  if (int classes = count_closed_classes(q); classes != 1)
    throw Error(Errc::reducible_chain,
                "truncated chain has " + std::to_string(classes) +
                    " closed communicating classes; stationary distribution is not unique");

  // Q^T p = 0 with the first equation replaced by sum p = 1
  Eigen::SparseMatrix<double> qt = q.transpose();
  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < qt.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(qt, col); it; ++it)
      if (it.row() != 0) triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
  for (Eigen::Index j = 0; j < n; ++j) triplets.emplace_back(0, static_cast<int>(j), 1.0);
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success)
    throw Error(Errc::reducible_chain, "stationary system is singular; the truncated chain has "
                                       "no unique stationary distribution");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[0] = 1.0;
  Eigen::VectorXd p = lu.solve(rhs);
  if (lu.info() != Eigen::Success)
    throw Error(Errc::reducible_chain, "stationary solve failed");

  double neg = p.minCoeff();
  if (neg < -1e-8)
    throw Error(Errc::reducible_chain, "stationary solve produced negative probabilities");
  p = p.cwiseMax(0.0);
  p /= p.sum();
  double res = (q.transpose() * p).cwiseAbs().maxCoeff();
  if (res > 1e-8)
    throw Error(Errc::reducible_chain,
                "stationary residual " + std::to_string(res) + " too large");
  return DistributionTable{space, std::move(p)};
}

std::vector<bool> interior_mask(const ReactionNetwork& net, const StateSpace& space) {
  auto channels = grouped_channels(net);
  std::vector<bool> mask(space.size(), true);
  for_each_state(space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    for (const auto& ch : channels)
      if (!space.contains((x + ch.net_change).eval())) {
        mask[flat] = false;
        break;
      }
  });
  return mask;
}

Eigen::VectorXd generator_apply(const ReactionNetwork& net, const StateSpace& space,
                                const DistributionTable& p,
                                const std::vector<MomentIndex>& targets) {
  if (p.space.dim() != net.species_count() || p.p.size() != static_cast<Eigen::Index>(space.size()))
    throw Error(Errc::dimension_mismatch, "distribution does not match the state space");
  Eigen::SparseMatrix<double> q = generator_matrix(net, space);
  Eigen::VectorXd dp = q.transpose() * p.p;

  int maxo = 1;
  for (const auto& idx : targets) maxo = std::max(maxo, index_order(idx));
  detail::FallingFactorialTable ff(space, maxo);
  std::vector<detail::CompensatedSum> sums(targets.size());
  for_each_state(space, [&](const Eigen::VectorXi& x, std::size_t flat) {
    double v = dp[static_cast<Eigen::Index>(flat)];
    if (v == 0.0) return;
    for (std::size_t t = 0; t < targets.size(); ++t)
      sums[t].add(ff.moment_function(targets[t], x) * v);
  });
  Eigen::VectorXd out(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t t = 0; t < targets.size(); ++t) out[static_cast<Eigen::Index>(t)] = sums[t].value();
  return out;
}

SsaResult ssa_sample(const ReactionNetwork& net, const StateSpace& space, const SsaConfig& cfg) {
  if (cfg.total_time <= 0.0 || cfg.burn_in_time < 0.0 || cfg.burn_in_time >= cfg.total_time)
    throw Error(Errc::malformed_input, "need 0 <= burn_in_time < total_time");
  if (cfg.n_trajectories < 1) throw Error(Errc::malformed_input, "need at least one trajectory");
  Eigen::VectorXi init = cfg.initial_state;
  if (init.size() == 0) {
    init.resize(space.dim());
    for (int j = 0; j < space.dim(); ++j) init[j] = space.bounds[static_cast<std::size_t>(j)].min;
  }
  if (init.size() != space.dim())
    throw Error(Errc::dimension_mismatch, "initial state dimension does not match the space");

  auto channels = grouped_channels(net);
  const double window = cfg.total_time - cfg.burn_in_time;

  std::unordered_map<std::vector<int>, double, VecHash> occupancy;
  double outside_time = 0.0;
  SsaResult result;
  result.moment_indices = build_basis(net.species_count(), 2).lower;
  // per-trajectory factorial moment time averages, orders 1 and 2
  const auto n_mom = static_cast<Eigen::Index>(result.moment_indices.size());
  Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(cfg.n_trajectories, n_mom);

  for (int traj = 0; traj < cfg.n_trajectories; ++traj) {
    detail::SplitMix64 rng(detail::SplitMix64(cfg.seed).next() + static_cast<std::uint64_t>(traj));
    Eigen::VectorXi x = init;
    double t = 0.0;
    bool frozen = false;
    while (t < cfg.total_time) {
      std::vector<double> a(channels.size());
      double a0 = 0.0;
      for (std::size_t c = 0; c < channels.size(); ++c) {
        a[c] = channel_propensity(net, channels[c], x);
        if (a[c] < -1e-9) {
          std::string state;
          for (int j = 0; j < x.size(); ++j) state += (j ? "," : "") + std::to_string(x[j]);
          throw Error(Errc::negative_propensity,
                      "grouped propensity negative at state (" + state + ")");
        }
        a0 += std::max(a[c], 0.0);
      }
      double dwell;
      if (a0 <= 0.0) {
        frozen = true;
        dwell = cfg.total_time - t;
      } else {
        dwell = -std::log(rng.next_open01()) / a0;
        dwell = std::min(dwell, cfg.total_time - t);
      }
      double lo = std::max(t, cfg.burn_in_time), hi = t + dwell;
      if (hi > lo) {
        double w = hi - lo;
        if (space.contains(x))
          occupancy[std::vector<int>(x.data(), x.data() + x.size())] += w;
        else
          outside_time += w;
        for (Eigen::Index i = 0; i < n_mom; ++i) {
          double f = 1.0;
          const MomentIndex& idx = result.moment_indices[static_cast<std::size_t>(i)];
          for (int j = 0; j < x.size(); ++j)
            for (int u = 0; u < idx[static_cast<std::size_t>(j)]; ++u) f *= x[j] - u;
          batch(traj, i) += w * f;
        }
      }
      t += dwell;
      if (frozen) break;
      double target = rng.next_open01() * a0;
      double acc = 0.0;
      std::size_t chosen = channels.size() - 1;
      for (std::size_t c = 0; c < channels.size(); ++c) {
        acc += std::max(a[c], 0.0);
        if (target <= acc) {
          chosen = c;
          break;
        }
      }
      x += channels[chosen].net_change;
      ++result.events;
    }
    if (frozen) ++result.frozen_trajectories;
  }

  batch /= window;
  result.moment_means = batch.colwise().mean();
  result.moment_stderr = Eigen::VectorXd::Zero(n_mom);
  if (cfg.n_trajectories > 1) {
    for (Eigen::Index i = 0; i < n_mom; ++i) {
      double var = (batch.col(i).array() - result.moment_means[i]).square().sum() /
                   (cfg.n_trajectories - 1);
      result.moment_stderr[i] = std::sqrt(var / cfg.n_trajectories);
    }
  }

  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  double total = cfg.n_trajectories * window;
  for (const auto& [state, w] : occupancy) {
    Eigen::VectorXi x = Eigen::Map<const Eigen::VectorXi>(state.data(), static_cast<Eigen::Index>(state.size()));
    p[static_cast<Eigen::Index>(space.flat_index(x))] = w / total;
  }
  result.occupancy = DistributionTable{space, std::move(p)};
  result.outside_mass = outside_time / total;
  return result;
}

}  // namespace zics
