#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ogrl/error.hpp"
#include "ogrl/rng.hpp"

namespace ogrl {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline std::string to_string(Cell c) {
  return "[" + std::to_string(c.row) + "," + std::to_string(c.col) + "]";
}

// Gymnasium Frozen-Lake ordering.
enum class Action : std::uint8_t { Left = 0, Down = 1, Right = 2, Up = 3 };

inline constexpr std::size_t kActionCount = 4;
inline constexpr std::array<Action, kActionCount> kActions{
    Action::Left, Action::Down, Action::Right, Action::Up};

inline constexpr std::size_t index(Action a) noexcept {
  return static_cast<std::size_t>(a);
}

inline constexpr std::string_view action_name(Action a) noexcept {
  switch (a) {
    case Action::Left: return "Left";
    case Action::Down: return "Down";
    case Action::Right: return "Right";
    case Action::Up: return "Up";
  }
  return "?";
}

// Target of a move before clamping; may lie outside the grid.
inline constexpr Cell displace(Cell c, Action a) noexcept {
  switch (a) {
    case Action::Left: return {c.row, c.col - 1};
    case Action::Down: return {c.row + 1, c.col};
    case Action::Right: return {c.row, c.col + 1};
    case Action::Up: return {c.row - 1, c.col};
  }
  return c;
}

enum class Tile : char { Start = 'S', Frozen = 'F', Hole = 'H', Goal = 'G' };

inline bool is_terminal(Tile t) noexcept {
  return t == Tile::Hole || t == Tile::Goal;
}

class GridMap;
inline bool goal_reachable(const GridMap& map);

// Frozen-Lake layout. Start is the top-left cell and Goal the bottom-right
// cell; the goal is reachable over non-hole cells. Immutable once built.
class GridMap {
 public:
  // Validates the layout invariants and throws InvalidMap otherwise.
  GridMap(int rows, int cols, std::vector<Tile> tiles,
          std::optional<std::uint64_t> seed = std::nullopt)
      : rows_(rows), cols_(cols), tiles_(std::move(tiles)), seed_(seed) {
    validate();
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t cell_count() const noexcept { return tiles_.size(); }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }

  Cell start() const noexcept { return {0, 0}; }
  Cell goal() const noexcept { return {rows_ - 1, cols_ - 1}; }

  bool contains(Cell c) const noexcept {
    return c.row >= 0 && c.col >= 0 && c.row < rows_ && c.col < cols_;
  }

  std::size_t state_of(Cell c) const noexcept {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c.col);
  }
  Cell cell_of(std::size_t state) const noexcept {
    return {static_cast<int>(state / static_cast<std::size_t>(cols_)),
            static_cast<int>(state % static_cast<std::size_t>(cols_))};
  }

  Tile at(Cell c) const { return tiles_.at(state_of(c)); }
  bool terminal(Cell c) const { return is_terminal(at(c)); }

  std::size_t hole_count() const noexcept {
    return static_cast<std::size_t>(
        std::count(tiles_.begin(), tiles_.end(), Tile::Hole));
  }

  // Holes over the cells that are neither start nor goal.
  double hole_ratio() const noexcept {
    const auto free = cell_count() - 2;
    return free == 0 ? 0.0 : static_cast<double>(hole_count()) / static_cast<double>(free);
  }

  const std::vector<Tile>& tiles() const noexcept { return tiles_; }

  friend bool operator==(const GridMap& x, const GridMap& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.tiles_ == y.tiles_;
  }

 private:
  void validate() const {
    if (rows_ < 1 || cols_ < 1 || rows_ * cols_ < 2) {
      throw InvalidMap("grid must have at least two cells");
    }
    if (tiles_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_)) {
      throw InvalidMap("tile count does not match dimensions");
    }
    for (std::size_t s = 0; s < tiles_.size(); ++s) {
      const Tile t = tiles_[s];
      const Cell c = cell_of(s);
      if (t == Tile::Start && c != start()) throw InvalidMap("start outside the top-left cell");
      if (t == Tile::Goal && c != goal()) throw InvalidMap("goal outside the bottom-right cell");
    }
    if (at(start()) != Tile::Start) throw InvalidMap("top-left cell must be S");
    if (at(goal()) != Tile::Goal) throw InvalidMap("bottom-right cell must be G");
    if (!goal_reachable(*this)) throw InvalidMap("goal unreachable from start");
  }

  int rows_;
  int cols_;
  std::vector<Tile> tiles_;
  std::optional<std::uint64_t> seed_;
};

// Cells reachable from start over non-hole cells (orthogonal moves, never
// leaving a terminal cell).
inline std::vector<bool> reachable_cells(const GridMap& map) {
  std::vector<bool> seen(map.cell_count(), false);
  std::queue<Cell> frontier;
  seen[map.state_of(map.start())] = true;
  frontier.push(map.start());
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    if (map.terminal(c)) continue;
    for (Action a : kActions) {
      const Cell n = displace(c, a);
      if (!map.contains(n) || seen[map.state_of(n)] || map.at(n) == Tile::Hole) continue;
      seen[map.state_of(n)] = true;
      frontier.push(n);
    }
  }
  return seen;
}

inline bool goal_reachable(const GridMap& map) {
  return reachable_cells(map)[map.state_of(map.goal())];
}

struct StepOutcome {
  Cell next;
  double reward = 0.0;
  bool terminal = false;
};

// Deterministic transition; moves off the grid leave the agent in place.
inline StepOutcome step(const GridMap& map, Cell s, Action a) {
  if (!map.contains(s)) throw InvalidState(to_string(s) + " is outside the map");
  if (map.terminal(s)) throw InvalidState(to_string(s) + " is terminal");
  Cell next = displace(s, a);
  if (!map.contains(next)) next = s;
  const Tile t = map.at(next);
  return {next, t == Tile::Goal ? 1.0 : 0.0, is_terminal(t)};
}

struct StateAction {
  Cell state;
  Action action;
  friend bool operator==(const StateAction&, const StateAction&) = default;
  friend auto operator<=>(const StateAction&, const StateAction&) = default;
};

enum class NeighborScope {
  // Only sources the agent can act from: step() must be defined there.
  NonTerminalSources,
  // Every topological neighbour, terminal cells included.
  AllSources,
};

// (state, action) pairs whose move lands on target from a different cell,
// in row-major source order.
inline std::vector<StateAction> inbound_neighbors(
    const GridMap& map, Cell target,
    NeighborScope scope = NeighborScope::NonTerminalSources) {
  if (!map.contains(target)) throw OutOfRange(to_string(target) + " is outside the map");
  std::vector<StateAction> out;
  // A source reaches target only by the opposite move.
  constexpr std::array<std::pair<Action, Action>, kActionCount> kReverse{{
      {Action::Up, Action::Down},  // source above moves down
      {Action::Left, Action::Right},
      {Action::Right, Action::Left},
      {Action::Down, Action::Up},
  }};
  for (const auto& [offset, move] : kReverse) {
    const Cell source = displace(target, offset);
    if (!map.contains(source)) continue;
    if (scope == NeighborScope::NonTerminalSources && map.terminal(source)) continue;
    out.push_back({source, move});
  }
  return out;
}

inline int manhattan_distance(Cell p, Cell q) noexcept {
  return std::abs(p.row - q.row) + std::abs(p.col - q.col);
}

// Number of holes round(hole_ratio * (cells - 2)), half away from zero.
inline std::size_t hole_quota(std::size_t cells, double hole_ratio) {
  return static_cast<std::size_t>(
      std::llround(hole_ratio * static_cast<double>(cells - 2)));
}

inline constexpr int kMaxMapResamples = 10'000;

// Places Start/Goal in opposite corners and samples holes uniformly without
// replacement from the remaining cells (partial Fisher-Yates over SplitMix64).
// Layouts with an unreachable goal are discarded and resampled from the same
// stream.
inline GridMap generate_map(int size, double hole_ratio, std::uint64_t seed) {
  if (size < 2) throw OutOfRange("map size must be >= 2");
  if (!(hole_ratio >= 0.0 && hole_ratio < 1.0)) {
    throw OutOfRange("hole ratio must lie in [0, 1)");
  }
  const auto n = static_cast<std::size_t>(size);
  const std::size_t cells = n * n;
  const std::size_t holes = hole_quota(cells, hole_ratio);

  std::vector<std::size_t> free;
  free.reserve(cells - 2);
  for (std::size_t s = 1; s + 1 < cells; ++s) free.push_back(s);

  SplitMix64 rng(seed);
  for (int attempt = 0; attempt < kMaxMapResamples; ++attempt) {
    std::vector<std::size_t> pool = free;
    std::vector<Tile> tiles(cells, Tile::Frozen);
    tiles.front() = Tile::Start;
    tiles.back() = Tile::Goal;
    for (std::size_t i = 0; i < holes; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      tiles[pool[i]] = Tile::Hole;
    }
    try {
      return GridMap(size, size, std::move(tiles), seed);
    } catch (const InvalidMap&) {
      // unreachable goal; draw again
    }
  }
  throw Unsatisfiable("no reachable layout with " + std::to_string(holes) +
                      " holes after " + std::to_string(kMaxMapResamples) + " draws");
}

// One row per line, characters S/F/H/G.
inline void write_map(std::ostream& out, const GridMap& map) {
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) out << static_cast<char>(map.at({r, c}));
    out << '\n';
  }
}

inline std::string map_to_string(const GridMap& map) {
  std::ostringstream out;
  write_map(out, map);
  return out.str();
}

inline GridMap read_map(std::istream& in) {
  std::vector<Tile> tiles;
  int rows = 0;
  int cols = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    const std::string_view body(line.data() + first, last - first + 1);
    if (cols >= 0 && static_cast<int>(body.size()) != cols) {
      throw ParseError(lineno, "ragged map row");
    }
    cols = static_cast<int>(body.size());
    for (char ch : body) {
      switch (ch) {
        case 'S': case 'F': case 'H': case 'G':
          tiles.push_back(static_cast<Tile>(ch));
          break;
        default:
          throw ParseError(lineno, std::string("unexpected map character '") + ch + "'");
      }
    }
    ++rows;
  }
  if (rows == 0) throw InvalidMap("empty map");
  return GridMap(rows, cols, std::move(tiles));
}

inline GridMap parse_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_map(in);
}

inline GridMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open map file " + path);
  return read_map(in);
}

// The 4x4 Gymnasium layout used as the running example.
inline GridMap frozen_lake_4x4() {
  return parse_map("SFFF\nFHFH\nFFFH\nHFFG\n");
}

}  // namespace ogrl
