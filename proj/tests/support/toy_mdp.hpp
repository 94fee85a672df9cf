#pragma once

// A toy execution problem small enough to solve exactly: the price is a
// two-state Markov chain {lo, hi} observed every second, and every episode
// starts at lo. Used as an independent reference for the learner.

#include <array>
#include <cstdint>
#include <vector>

#include "execq/market_data.hpp"

namespace execq::testing {

struct ToyMdp {
  double lo = 9.9;
  double hi = 10.1;
  double switch_prob = 0.2;
  double penalty_a = 0.5;
  double gamma = 0.99;
  int periods = 3;
  int seconds = 2;
  int q0 = 4;

  double price(int c) const { return c == 0 ? lo : hi; }
};

/// Q[k][q][c][x]; entries with x > q (or x != q at the final period) unused.
using QTable = std::vector<std::vector<std::array<std::vector<double>, 2>>>;

QTable make_table(const ToyMdp& mdp, double fill);
std::vector<int> toy_actions(const ToyMdp& mdp, int k, int q);

/// Backward induction over all price paths.
QTable solve_exact(const ToyMdp& mdp);

/// Online tabular Q-learning on its own simulation of the chain with
/// uniformly random behaviour and 1/n step sizes.
QTable tabular_q_learning(const ToyMdp& mdp, std::size_t episodes, std::uint64_t seed);

/// Episode windows of the chain: a flat lead period at lo, then the
/// simulated path, then one trailing second.
std::vector<EpisodeWindow> toy_windows(const ToyMdp& mdp, std::size_t count, std::uint64_t seed);

}  // namespace execq::testing
