#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "zics/moments.hpp"
#include "zics/network.hpp"
#include "zics/statespace.hpp"

namespace zics {

/// CME generator over a truncated space: entry (x, y) is the summed grouped
/// propensity of reactions jumping x -> y; diagonal is minus the row sum.
/// Jumps leaving Omega are deleted, so rows sum to zero and probability is
/// conserved on the truncation.
Eigen::SparseMatrix<double> generator_matrix(const ReactionNetwork& net, const StateSpace& space);

/// Direct stationary solve of the truncated CME: Q^T p = 0, sum p = 1.
/// Errors with ReducibleChain when the null space is not one-dimensional
/// and CapExceeded when |Omega| exceeds max_states.
DistributionTable cme_stationary(const ReactionNetwork& net, const StateSpace& space,
                                 std::size_t max_states = 200000);

/// States all of whose outgoing jumps stay inside Omega. Distributions
/// supported here see no truncation effects from the generator.
std::vector<bool> interior_mask(const ReactionNetwork& net, const StateSpace& space);

/// d/dt E[f_i] under the truncated CME started from p:
/// sum_X f_i(X) (Q^T p)(X) for each basis function.
Eigen::VectorXd generator_apply(const ReactionNetwork& net, const StateSpace& space,
                                const DistributionTable& p,
                                const std::vector<MomentIndex>& targets);

struct SsaConfig {
  std::uint64_t seed = 1;
  int n_trajectories = 8;
  double burn_in_time = 100.0;
  double sample_interval = 1.0;
  double total_time = 10000.0;
  Eigen::VectorXi initial_state;
};

struct SsaResult {
  DistributionTable occupancy;  // time-averaged, over the supplied space
  /// Fraction of post-burn-in time spent outside the supplied space.
  double outside_mass = 0.0;
  /// Factorial moments of order <= 2 with batch (per-trajectory) errors.
  std::vector<MomentIndex> moment_indices;
  Eigen::VectorXd moment_means;
  Eigen::VectorXd moment_stderr;
  /// Trajectories that froze (zero total propensity) before total_time.
  int frozen_trajectories = 0;
  std::uint64_t events = 0;
};

/// Gillespie direct method over grouped reaction channels; time-averaged
/// occupancy after burn-in. Deterministic per seed (SplitMix64 streams, one
/// per trajectory).
SsaResult ssa_sample(const ReactionNetwork& net, const StateSpace& space, const SsaConfig& cfg);

namespace detail {

/// SplitMix64: counter-based generator, used so the suite's statistical
/// checks are reproducible from the seed alone.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1]; never 0 so log() is safe.
  double next_open01() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }
};

}  // namespace detail

}  // namespace zics
