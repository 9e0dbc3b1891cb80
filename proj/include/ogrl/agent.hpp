#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "ogrl/error.hpp"
#include "ogrl/grid.hpp"
#include "ogrl/rng.hpp"
#include "ogrl/shaping.hpp"

namespace ogrl {

// Numerical action preferences h(s, a); the policy is their row-wise softmax.
class Preferences : public StateActionTable<double> {
 public:
  Preferences(int rows, int cols, std::vector<ActionRow> table)
      : StateActionTable(rows, cols, std::move(table)) {
    for (const auto& row : table_) {
      for (double h : row) {
        if (!std::isfinite(h)) throw OutOfRange("non-finite preference");
      }
    }
  }

  static Preferences zeros(int rows, int cols) {
    return Preferences(rows, cols,
                       std::vector<ActionRow>(static_cast<std::size_t>(rows) *
                                                  static_cast<std::size_t>(cols),
                                              ActionRow{}));
  }

  void add(std::size_t state, Action a, double delta) { mutable_row(state)[index(a)] += delta; }
};

// Max-shifted softmax of one preference row.
inline ActionRow softmax(const ActionRow& h) {
  const double top = *std::max_element(h.begin(), h.end());
  ActionRow p;
  double sum = 0.0;
  for (std::size_t i = 0; i < kActionCount; ++i) {
    p[i] = std::exp(h[i] - top);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

inline PolicyProb softmax_policy(const Preferences& prefs) {
  std::vector<ActionRow> table;
  table.reserve(prefs.states());
  for (const auto& row : prefs.table()) table.push_back(softmax(row));
  return PolicyProb(prefs.rows(), prefs.cols(), std::move(table));
}

inline constexpr double kMinInvertibleProbability = 1e-300;

// h = ln p - mean(ln p) per row, the zero-mean preimage under softmax.
inline Preferences inverse_softmax(const PolicyProb& policy) {
  std::vector<ActionRow> table;
  table.reserve(policy.states());
  for (std::size_t s = 0; s < policy.states(); ++s) {
    ActionRow h;
    double mean = 0.0;
    for (std::size_t i = 0; i < kActionCount; ++i) {
      const double p = policy.row(s)[i];
      if (p <= kMinInvertibleProbability) {
        throw ZeroProbability("state " + std::to_string(s) + " action " +
                              std::string(action_name(kActions[i])) + " has probability " +
                              std::to_string(p));
      }
      h[i] = std::log(p);
      mean += h[i];
    }
    mean /= static_cast<double>(kActionCount);
    for (double& x : h) x -= mean;
    table.push_back(h);
  }
  return Preferences(policy.rows(), policy.cols(), std::move(table));
}

// Samples an index from a probability row with one uniform draw.
inline Action sample_action(const ActionRow& p, SplitMix64& rng) {
  const double x = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < kActionCount; ++i) {
    acc += p[i];
    if (x < acc) return kActions[i];
  }
  return kActions.back();
}

struct TrajectoryStep {
  Cell state;
  Action action;
  double reward = 0.0;  // reward received after taking `action`
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  bool terminal = false;

  double total_reward() const {
    double r = 0.0;
    for (const auto& s : steps) r += s.reward;
    return r;
  }
};

// Default episode cap: 4 |S|.
inline std::size_t default_max_steps(const GridMap& map) { return 4 * map.cell_count(); }

template <typename ActionSampler>
Trajectory rollout(const GridMap& map, SplitMix64& rng, std::size_t max_steps,
                   ActionSampler&& choose) {
  if (max_steps < 1) throw OutOfRange("max_steps must be >= 1");
  Trajectory traj;
  Cell s = map.start();
  while (traj.steps.size() < max_steps) {
    const Action a = choose(s, rng);
    const StepOutcome out = step(map, s, a);
    traj.steps.push_back({s, a, out.reward});
    if (out.terminal) {
      traj.terminal = true;
      break;
    }
    s = out.next;
  }
  return traj;
}

// One episode from the start cell under softmax(prefs).
inline Trajectory run_episode(const GridMap& map, const Preferences& prefs, SplitMix64& rng,
                              std::size_t max_steps) {
  if (!prefs.matches(map)) throw OutOfRange("preferences do not match the map");
  return rollout(map, rng, max_steps, [&](Cell s, SplitMix64& g) {
    return sample_action(softmax(prefs.row(map.state_of(s))), g);
  });
}

// One episode with actions drawn uniformly.
inline Trajectory run_random_episode(const GridMap& map, SplitMix64& rng,
                                     std::size_t max_steps) {
  return rollout(map, rng, max_steps, [](Cell, SplitMix64& g) {
    return kActions[static_cast<std::size_t>(g.below(kActionCount))];
  });
}

// Episodic REINFORCE without baseline, applied step by step in time order so
// that pi(. | s_t) reflects the updates already made for earlier visits:
//   h(s_t, b) += lr * G_t * (1{b = a_t} - pi(b | s_t)),
//   G_t = sum_{k > t} discount^{k - t - 1} R_k.
inline Preferences reinforce_update(const Preferences& prefs, const GridMap& map,
                                    const Trajectory& traj, double lr, double discount) {
  if (!(lr > 0.0)) throw OutOfRange("learning rate must be positive");
  if (!(discount >= 0.0 && discount <= 1.0)) throw OutOfRange("discount must lie in [0, 1]");
  const std::size_t n = traj.steps.size();
  std::vector<double> returns(n);
  double ret = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    ret = traj.steps[t].reward + discount * ret;
    returns[t] = ret;
  }
  Preferences out = prefs;
  for (std::size_t t = 0; t < n; ++t) {
    if (returns[t] == 0.0) continue;
    const std::size_t s = map.state_of(traj.steps[t].state);
    const ActionRow pi = softmax(out.row(s));
    for (std::size_t b = 0; b < kActionCount; ++b) {
      const double indicator = kActions[b] == traj.steps[t].action ? 1.0 : 0.0;
      out.add(s, kActions[b], lr * returns[t] * (indicator - pi[b]));
    }
  }
  return out;
}

struct TrainOptions {
  std::size_t episodes = 10'000;
  double lr = 0.9;
  double discount = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_steps = 0;  // 0: default_max_steps(map)
};

struct TrainResult {
  Preferences preferences;
  std::vector<double> rewards;  // one total per episode
};

// Shaped policies may put exactly zero mass on an action (u = 0 advice against
// a hole); the agent's logits need a finite floor before inversion.
inline constexpr double kInitialProbabilityFloor = 1e-8;

inline PolicyProb floor_probabilities(const PolicyProb& policy, double floor) {
  std::vector<ActionRow> table;
  table.reserve(policy.states());
  for (const auto& row : policy.table()) {
    ActionRow r;
    double sum = 0.0;
    for (std::size_t i = 0; i < kActionCount; ++i) {
      r[i] = std::max(row[i], floor);
      sum += r[i];
    }
    for (double& x : r) x /= sum;
    table.push_back(r);
  }
  return PolicyProb(policy.rows(), policy.cols(), std::move(table));
}

// Policy-gradient training from `initial` (uniform for unadvised agents,
// the shaped policy for advised ones).
inline TrainResult train(const GridMap& map, const PolicyProb& initial,
                         const TrainOptions& opts) {
  if (opts.episodes < 1) throw OutOfRange("episodes must be >= 1");
  if (!initial.matches(map)) throw OutOfRange("initial policy does not match the map");
  const std::size_t cap = opts.max_steps ? opts.max_steps : default_max_steps(map);
  Preferences prefs = inverse_softmax(floor_probabilities(initial, kInitialProbabilityFloor));
  SplitMix64 rng(opts.seed);
  std::vector<double> rewards;
  rewards.reserve(opts.episodes);
  for (std::size_t e = 0; e < opts.episodes; ++e) {
    const Trajectory traj = run_episode(map, prefs, rng, cap);
    const double r = traj.total_reward();
    rewards.push_back(r);
    if (r != 0.0) prefs = reinforce_update(prefs, map, traj, opts.lr, opts.discount);
  }
  return {std::move(prefs), std::move(rewards)};
}

// Uniform random behaviour with no learning.
inline std::vector<double> run_random_agent(const GridMap& map, std::size_t episodes,
                                            std::uint64_t seed, std::size_t max_steps = 0) {
  if (episodes < 1) throw OutOfRange("episodes must be >= 1");
  const std::size_t cap = max_steps ? max_steps : default_max_steps(map);
  SplitMix64 rng(seed);
  std::vector<double> rewards;
  rewards.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    rewards.push_back(run_random_episode(map, rng, cap).total_reward());
  }
  return rewards;
}

}  // namespace ogrl
