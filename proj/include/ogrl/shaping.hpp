#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ogrl/advice.hpp"
#include "ogrl/error.hpp"
#include "ogrl/grid.hpp"
#include "ogrl/opinion.hpp"

namespace ogrl {

using ActionRow = std::array<double, kActionCount>;

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kDegenerateRowSum = 1e-12;

// Base rate of an action opinion: 1/|A|.
inline constexpr double kActionBaseRate = 1.0 / static_cast<double>(kActionCount);

// Per-state action table over a rows x cols grid, states in row-major order.
template <typename Entry>
class StateActionTable {
 public:
  using Row = std::array<Entry, kActionCount>;

  StateActionTable(int rows, int cols, std::vector<Row> table)
      : rows_(rows), cols_(cols), table_(std::move(table)) {
    if (rows_ < 1 || cols_ < 1 ||
        table_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_)) {
      throw OutOfRange("table does not match a " + std::to_string(rows_) + "x" +
                       std::to_string(cols_) + " grid");
    }
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t states() const noexcept { return table_.size(); }

  const Row& row(std::size_t state) const { return table_.at(state); }
  const Entry& at(std::size_t state, Action a) const { return table_.at(state)[index(a)]; }
  const std::vector<Row>& table() const noexcept { return table_; }

  bool matches(const GridMap& map) const noexcept {
    return map.rows() == rows_ && map.cols() == cols_;
  }

  friend bool operator==(const StateActionTable&, const StateActionTable&) = default;

 protected:
  Row& mutable_row(std::size_t state) { return table_.at(state); }

  int rows_;
  int cols_;
  std::vector<Row> table_;
};

// Probability-domain table without the row-sum invariant.
using RawPolicy = StateActionTable<double>;

// Probability-domain policy: entries in [0, 1], rows summing to 1.
class PolicyProb : public StateActionTable<double> {
 public:
  PolicyProb(int rows, int cols, std::vector<ActionRow> table)
      : StateActionTable(rows, cols, std::move(table)) {
    for (std::size_t s = 0; s < table_.size(); ++s) {
      double sum = 0.0;
      for (double p : table_[s]) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw OutOfRange("probability " + std::to_string(p) + " in state " +
                           std::to_string(s) + " outside [0, 1]");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw OutOfRange("row " + std::to_string(s) + " sums to " + std::to_string(sum));
      }
    }
  }

  double operator()(Cell c, Action a) const {
    return at(static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) +
                  static_cast<std::size_t>(c.col),
              a);
  }
};

// Certainty-domain policy: one opinion per (state, action).
class PolicyCert : public StateActionTable<Opinion> {
 public:
  using StateActionTable::StateActionTable;

  // Copy with entry (state, a) replaced.
  PolicyCert with(std::size_t state, Action a, const Opinion& w) const {
    PolicyCert out = *this;
    out.mutable_row(state)[index(a)] = w;
    return out;
  }

  void set(std::size_t state, Action a, const Opinion& w) { mutable_row(state)[index(a)] = w; }
};

inline PolicyProb uniform_policy(int rows, int cols) {
  ActionRow row;
  row.fill(kActionBaseRate);
  return PolicyProb(rows, cols,
                    std::vector<ActionRow>(static_cast<std::size_t>(rows) *
                                               static_cast<std::size_t>(cols),
                                           row));
}

inline PolicyProb uniform_policy(const GridMap& map) {
  return uniform_policy(map.rows(), map.cols());
}

// Entrywise p -> (p, 1 - p, 0, p).
inline PolicyCert to_certainty(const PolicyProb& policy) {
  std::vector<PolicyCert::Row> table;
  table.reserve(policy.states());
  for (const auto& row : policy.table()) {
    table.push_back({opinion_from_probability(row[0]), opinion_from_probability(row[1]),
                     opinion_from_probability(row[2]), opinion_from_probability(row[3])});
  }
  return PolicyCert(policy.rows(), policy.cols(), std::move(table));
}

// Fuses `advice` into every entry whose action leads into `target`.
inline PolicyCert apply_advice(PolicyCert policy, const GridMap& map, const Opinion& advice,
                               Cell target,
                               NeighborScope scope = NeighborScope::AllSources) {
  if (!policy.matches(map)) throw OutOfRange("policy does not match the map");
  for (const auto& [state, action] : inbound_neighbors(map, target, scope)) {
    const std::size_t s = map.state_of(state);
    try {
      policy.set(s, action, bcf_fuse(advice, policy.at(s, action)));
    } catch (const TotalConflict& e) {
      throw TotalConflict("at " + to_string(state) + " " + std::string(action_name(action)) +
                          ": " + e.what());
    }
  }
  return policy;
}

// Entrywise projected probability b + a u; rows are not renormalized.
inline RawPolicy to_probability(const PolicyCert& policy) {
  std::vector<ActionRow> table;
  table.reserve(policy.states());
  for (const auto& row : policy.table()) {
    ActionRow out;
    for (std::size_t i = 0; i < kActionCount; ++i) out[i] = row[i].projected_probability();
    table.push_back(out);
  }
  return RawPolicy(policy.rows(), policy.cols(), std::move(table));
}

namespace detail {

inline ActionRow normalized_row(const ActionRow& row, std::size_t state) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0)) throw OutOfRange("negative entry in state " + std::to_string(state));
    sum += p;
  }
  if (sum <= kDegenerateRowSum) {
    throw DegenerateRow("state " + std::to_string(state) + " sums to " + std::to_string(sum));
  }
  ActionRow out;
  for (std::size_t i = 0; i < kActionCount; ++i) out[i] = std::min(1.0, row[i] / sum);
  return out;
}

}  // namespace detail

// Divides every entry by its row sum.
inline PolicyProb normalize(const RawPolicy& raw) {
  std::vector<ActionRow> table;
  table.reserve(raw.states());
  for (std::size_t s = 0; s < raw.states(); ++s) {
    table.push_back(detail::normalized_row(raw.row(s), s));
  }
  return PolicyProb(raw.rows(), raw.cols(), std::move(table));
}

// One advisor's advice together with how its uncertainty is calibrated.
struct AdviceSource {
  AdviceList advice;
  AdvisorProfile profile;
};

// Compiles every advice entry of every source into an opinion, fuses it into
// the certainty-domain policy in list order, then maps back to probabilities
// and renormalizes. Rows of states the agent can never occupy (terminal or
// unreachable) that collapse to zero mass fall back to uniform.
inline PolicyProb shape(const PolicyProb& policy, const GridMap& map,
                        std::span<const AdviceSource> sources) {
  if (!policy.matches(map)) throw OutOfRange("policy does not match the map");
  for (const auto& source : sources) {
    source.profile.validate();
    check_in_bounds(source.advice, map);
  }

  PolicyCert certain = to_certainty(policy);
  for (const auto& source : sources) {
    for (const auto& advice : source.advice) {
      const double u = source.profile.uncertainty_for(map, advice.location);
      const Opinion w = compile_advice(advice.value, u, kActionBaseRate);
      certain = apply_advice(std::move(certain), map, w, advice.location);
    }
  }

  const RawPolicy raw = to_probability(certain);
  const std::vector<bool> reachable = reachable_cells(map);
  std::vector<ActionRow> table;
  table.reserve(raw.states());
  for (std::size_t s = 0; s < raw.states(); ++s) {
    const ActionRow& row = raw.row(s);
    const double sum = row[0] + row[1] + row[2] + row[3];
    const bool never_occupied = !reachable[s] || map.terminal(map.cell_of(s));
    if (sum <= kDegenerateRowSum && never_occupied) {
      table.push_back(uniform_policy(1, 1).row(0));
    } else {
      table.push_back(detail::normalized_row(row, s));
    }
  }
  return PolicyProb(raw.rows(), raw.cols(), std::move(table));
}

inline PolicyProb shape(const PolicyProb& policy, const GridMap& map, const AdviceList& advice,
                        const AdvisorProfile& profile) {
  const AdviceSource source{advice, profile};
  return shape(policy, map, std::span<const AdviceSource>(&source, 1));
}

// CSV: state_row,state_col,p_left,p_down,p_right,p_up (17 significant digits).
inline void write_policy_csv(std::ostream& out, const StateActionTable<double>& policy) {
  out << "state_row,state_col,p_left,p_down,p_right,p_up\n";
  char buf[160];
  for (std::size_t s = 0; s < policy.states(); ++s) {
    const auto& r = policy.row(s);
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g,%.17g\n",
                  s / static_cast<std::size_t>(policy.cols()),
                  s % static_cast<std::size_t>(policy.cols()), r[0], r[1], r[2], r[3]);
    out << buf;
  }
}

inline PolicyProb read_policy_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  struct Entry {
    int row, col;
    ActionRow p;
  };
  std::vector<Entry> entries;
  int rows = 0, cols = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("state_row", 0) == 0) continue;
    Entry e{};
    char tail = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf%c", &e.row, &e.col, &e.p[0], &e.p[1],
                    &e.p[2], &e.p[3], &tail) != 6 ||
        e.row < 0 || e.col < 0) {
      throw ParseError(lineno, "malformed policy row");
    }
    rows = std::max(rows, e.row + 1);
    cols = std::max(cols, e.col + 1);
    entries.push_back(e);
  }
  if (entries.empty()) throw EmptyInput("policy CSV has no rows");
  const std::size_t states = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  std::vector<ActionRow> table(states, ActionRow{-1.0, -1.0, -1.0, -1.0});
  std::vector<bool> seen(states, false);
  for (const auto& e : entries) {
    const std::size_t s = static_cast<std::size_t>(e.row) * static_cast<std::size_t>(cols) +
                          static_cast<std::size_t>(e.col);
    if (seen[s]) throw ParseError(0, "duplicate state " + to_string(Cell{e.row, e.col}));
    seen[s] = true;
    table[s] = e.p;
  }
  if (entries.size() != states) throw ParseError(0, "policy CSV does not cover every state");
  return PolicyProb(rows, cols, std::move(table));
}

inline PolicyProb load_policy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open policy file " + path);
  return read_policy_csv(in);
}

}  // namespace ogrl
