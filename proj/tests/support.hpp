#pragma once

#include <cmath>

#include "ogrl/ogrl.hpp"

namespace testing {

// Random valid opinion: mass drawn uniformly from the simplex.
inline ogrl::Opinion random_opinion(ogrl::SplitMix64& rng) {
  double x = rng.uniform(), y = rng.uniform();
  if (x > y) std::swap(x, y);
  return ogrl::make_opinion(x, y - x, 1.0 - y, rng.uniform());
}

// Random stochastic policy; some rows get near-zero or zero entries.
inline ogrl::PolicyProb random_policy(int rows, int cols, ogrl::SplitMix64& rng) {
  std::vector<ogrl::ActionRow> table(static_cast<std::size_t>(rows * cols));
  for (auto& row : table) {
    double sum = 0.0;
    for (auto& p : row) {
      p = rng.uniform() + 0.01;
      sum += p;
    }
    for (auto& p : row) p /= sum;
  }
  return ogrl::PolicyProb(rows, cols, std::move(table));
}

inline bool near(double x, double y, double tol) { return std::abs(x - y) <= tol; }

}  // namespace testing
