#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "ogrl/error.hpp"

namespace ogrl::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw EmptyInput("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Mid-ranks (1-based) of the pooled sample, doubled so ties stay integral.
inline std::vector<int> doubled_midranks(std::span<const double> pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  std::vector<int> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    // positions i..j share rank ((i+1) + (j+1)) / 2
    const int doubled = static_cast<int>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    i = j + 1;
  }
  return ranks;
}

// Exact one-sided Wilcoxon rank-sum (Mann-Whitney) test of "x tends to be
// larger than y". Returns P(rank sum of x >= observed) under random
// relabelling of the pooled sample; ties use mid-ranks, conditioned on the
// observed tie pattern.
inline double rank_sum_p_greater(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw EmptyInput("rank test needs two non-empty samples");
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const std::vector<int> ranks = doubled_midranks(pooled);

  const std::size_t n = x.size();
  int observed = 0;
  for (std::size_t i = 0; i < n; ++i) observed += ranks[i];
  const int total = std::accumulate(ranks.begin(), ranks.end(), 0);

  // ways[k][s]: subsets of size k with doubled rank sum s.
  std::vector<std::vector<double>> ways(n + 1, std::vector<double>(total + 1, 0.0));
  ways[0][0] = 1.0;
  for (int r : ranks) {
    for (std::size_t k = n; k >= 1; --k) {
      for (int s = total; s >= r; --s) ways[k][s] += ways[k - 1][s - r];
    }
  }
  double all = 0.0, tail = 0.0;
  for (int s = 0; s <= total; ++s) {
    all += ways[n][s];
    if (s >= observed) tail += ways[n][s];
  }
  return tail / all;
}

}  // namespace ogrl::stats
