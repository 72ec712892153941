#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ragnar/errors.hpp"
#include "ragnar/graph.hpp"
#include "ragnar/parallel.hpp"
#include "ragnar/rng.hpp"

namespace ragnar {

/// Deepest stage served by the analytic distributions. Beyond it use
/// empirical_neighbour_pmf.
inline constexpr int kMaxExactStage = 3;

inline double binomial_pmf(int n, double q, int k) {
  if (k < 0 || k > n) return 0.0;
  if (q <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (q >= 1.0) return k == n ? 1.0 : 0.0;
  const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_choose + k * std::log(q) + (n - k) * std::log1p(-q));
}

namespace detail {

inline void check_distribution_args(int n_nodes, double edge_prob, int stage) {
  if (n_nodes < 1) throw DomainError("n_nodes must be at least 1");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw DomainError("edge probability must lie in [0,1], got " + std::to_string(edge_prob));
  if (stage < 1) throw DomainError("stage must be at least 1");
  if (stage > kMaxExactStage)
    throw UnsupportedStageError("exact neighbour-set distribution is implemented up to stage " +
                                std::to_string(kMaxExactStage) + " (requested " + std::to_string(stage) +
                                "); use empirical_neighbour_pmf for deeper stages");
}

// 1 - (1 - pi)^n without cancellation.
inline double reach_probability(double edge_prob, int n) {
  if (n == 0 || edge_prob <= 0.0) return 0.0;
  if (edge_prob >= 1.0) return 1.0;
  return -std::expm1(n * std::log1p(-edge_prob));
}

}  // namespace detail

/// Full distribution of |N_i^(r)| over sizes 0..n_nodes-1 under G(n, pi).
///
/// Conditional on the sizes n_1..n_{s-1} of the earlier stages, the stage-s
/// size is Binomial(N - 1 - n_1 - ... - n_{s-1}, 1 - (1-pi)^{n_{s-1}}): every
/// unseen node joins independently when it has an edge to at least one node of
/// the previous stage. The nested sum over earlier sizes is evaluated forward
/// over the state (nodes seen so far, size of the last stage).
inline std::vector<double> neighbour_size_distribution(int n_nodes, double edge_prob, int stage) {
  detail::check_distribution_args(n_nodes, edge_prob, stage);
  const int n = n_nodes;
  // state[seen][last]; seen counts the root.
  std::vector<std::vector<double>> state(n + 1, std::vector<double>(n + 1, 0.0));
  state[1][1] = 1.0;
  for (int s = 1; s <= stage; ++s) {
    std::vector<std::vector<double>> next(n + 1, std::vector<double>(n + 1, 0.0));
    for (int seen = 1; seen <= n; ++seen)
      for (int last = 0; last <= n; ++last) {
        const double mass = state[seen][last];
        if (mass == 0.0) continue;
        const int remaining = n - seen;
        const double q = detail::reach_probability(edge_prob, last);
        for (int k = 0; k <= remaining; ++k) {
          const double pk = binomial_pmf(remaining, q, k);
          if (pk != 0.0) next[seen + k][k] += mass * pk;
        }
      }
    state = std::move(next);
  }
  std::vector<double> out(n, 0.0);
  for (int seen = 1; seen <= n; ++seen)
    for (int last = 0; last < n; ++last) out[last] += state[seen][last];
  return out;
}

/// P(|N_i^(r)| = size).
inline double neighbour_size_pmf(int n_nodes, double edge_prob, int stage, int size) {
  detail::check_distribution_args(n_nodes, edge_prob, stage);
  if (size < 0) throw DomainError("size must be non-negative");
  if (size > n_nodes - stage) return 0.0;
  return neighbour_size_distribution(n_nodes, edge_prob, stage)[size];
}

/// pi_r = P(j in N_i^(r)) for distinct i, j. All j != i are exchangeable, so
/// pi_r = E|N_i^(r)| / (N - 1).
inline double membership_prob(int n_nodes, double edge_prob, int stage) {
  detail::check_distribution_args(n_nodes, edge_prob, stage);
  if (n_nodes < 2) throw DomainError("membership probability needs at least two nodes");
  if (stage == 1) return edge_prob;
  const auto dist = neighbour_size_distribution(n_nodes, edge_prob, stage);
  double mean = 0.0;
  for (std::size_t k = 0; k < dist.size(); ++k) mean += static_cast<double>(k) * dist[k];
  return mean / static_cast<double>(n_nodes - 1);
}

/// Closed form for stage 2: (1 - pi) * (1 - (1 - pi^2)^(N-2)).
inline double membership_prob_stage2_closed_form(int n_nodes, double edge_prob) {
  return (1.0 - edge_prob) * (1.0 - std::pow(1.0 - edge_prob * edge_prob, n_nodes - 2));
}

/// Monte-Carlo estimate of the stage-r size distribution at node 0 over
/// `n_samples` graphs seeded from `seed`. Any stage depth is allowed.
inline std::map<int, double> empirical_neighbour_pmf(int n_nodes, double edge_prob, int stage,
                                                     std::size_t n_samples, std::uint64_t seed,
                                                     unsigned threads = 1) {
  if (n_samples < 1) throw DomainError("n_samples must be at least 1");
  if (stage < 1) throw DomainError("stage must be at least 1");
  std::vector<int> sizes(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t k) {
    const Graph g = generate_graph(n_nodes, edge_prob, derive_seed(seed, k));
    sizes[k] = static_cast<int>(neighbour_sets(g, 0, stage).stage(stage).size());
  });
  std::map<int, std::size_t> counts;
  for (int s : sizes) ++counts[s];
  std::map<int, double> out;
  for (const auto& [s, c] : counts) out[s] = static_cast<double>(c) / static_cast<double>(n_samples);
  return out;
}

}  // namespace ragnar
