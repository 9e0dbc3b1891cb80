#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ogrl/error.hpp"
#include "ogrl/grid.hpp"
#include "ogrl/opinion.hpp"

namespace ogrl {

// Five-point advice scale, -2 (harmful) .. +2 (beneficial).
inline constexpr int kScaleMin = -2;
inline constexpr int kScaleMax = 2;
inline constexpr int kScaleLength = kScaleMax - kScaleMin + 1;

// A statement that occupying `location` is worth `value` on the five-point scale.
struct Advice {
  Cell location;
  int value = 0;
  friend bool operator==(const Advice&, const Advice&) = default;
};

using AdviceList = std::vector<Advice>;

namespace detail {

class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }

  void expect(char c, const char* what) {
    skip_space();
    if (at_end() || text_[pos_] != c) fail(std::string("expected ") + what);
    ++pos_;
  }

  int integer(const char* what) {
    skip_space();
    const std::size_t begin = pos_;
    long long v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > 1'000'000'000) fail(std::string(what) + " too large");
      ++pos_;
    }
    if (pos_ == begin) fail(std::string("expected ") + what);
    return static_cast<int>(v);
  }

  // -?[0-2], with an optional '+' as well.
  int scale_value() {
    skip_space();
    int sign = 1;
    if (!at_end() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      sign = text_[pos_] == '-' ? -1 : 1;
      ++pos_;
    }
    if (at_end() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      fail("expected advice value");
    }
    const int digit = text_[pos_] - '0';
    ++pos_;
    if (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      fail("advice value outside -2..2");
    }
    if (digit > kScaleMax) fail("advice value outside -2..2");
    return sign * digit;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

// Parses `[r, c], v` lines. Blank lines and lines starting with '#' are skipped;
// file order is preserved.
inline AdviceList parse_advice(std::istream& in) {
  AdviceList out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    detail::LineCursor cur(line, lineno);
    Advice advice;
    cur.expect('[', "'['");
    advice.location.row = cur.integer("row index");
    cur.expect(',', "',' between row and column");
    advice.location.col = cur.integer("column index");
    cur.expect(']', "']'");
    cur.expect(',', "',' before advice value");
    advice.value = cur.scale_value();
    cur.skip_space();
    if (!cur.at_end()) cur.fail("trailing characters after advice value");
    out.push_back(advice);
  }
  return out;
}

inline AdviceList parse_advice(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_advice(in);
}

inline AdviceList load_advice(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open advice file " + path);
  return parse_advice(in);
}

// Canonical form: "[r,c], v" with no '+' sign.
inline std::string format_advice(const Advice& a) {
  return "[" + std::to_string(a.location.row) + "," + std::to_string(a.location.col) +
         "], " + std::to_string(a.value);
}

inline void write_advice(std::ostream& out, const AdviceList& list) {
  for (const auto& a : list) out << format_advice(a) << '\n';
}

// Fraction of map cells covered by the advice (distinct cells).
inline double advice_quota(const AdviceList& list, const GridMap& map) {
  std::set<Cell> cells;
  for (const auto& a : list) cells.insert(a.location);
  return static_cast<double>(cells.size()) / static_cast<double>(map.cell_count());
}

inline void check_in_bounds(const AdviceList& list, const GridMap& map) {
  for (const auto& a : list) {
    if (!map.contains(a.location)) {
      throw OutOfRange("advice location " + to_string(a.location) + " is outside the map");
    }
  }
}

// Linear certainty discount with saturation at tau * max_distance:
//   u = (1/tau) (distance / max_distance) u_max   while distance <= tau max_distance
//   u = u_max                                      beyond.
inline double calibrate_uncertainty(double distance, double max_distance, double tau,
                                    double u_max) {
  if (!(max_distance > 0.0)) throw BadCalibration("maximum distance must be positive");
  if (!(distance >= 0.0 && distance <= max_distance)) {
    throw BadCalibration("distance outside [0, maximum distance]");
  }
  if (!(tau > 0.0 && tau <= 1.0)) throw BadCalibration("tau must lie in (0, 1]");
  if (!(u_max >= 0.0 && u_max <= 1.0)) throw BadCalibration("u_max must lie in [0, 1]");
  const double saturation = tau * max_distance;
  if (distance >= saturation) return u_max;
  return std::min(u_max, distance / saturation * u_max);
}

// Splits the committed mass 1 - u between belief and disbelief according to
// the value's position j = value + 3 on the five-point scale.
inline Opinion compile_advice(int value, double u, double base_rate) {
  if (value < kScaleMin || value > kScaleMax) {
    throw OutOfScale("advice value " + std::to_string(value) + " outside -2..2");
  }
  if (!(u >= 0.0 && u <= 1.0)) throw OutOfRange("uncertainty outside [0, 1]");
  const int order = value - kScaleMin + 1;
  const double committed = 1.0 - u;
  const double b = static_cast<double>(order - 1) / (kScaleLength - 1) * committed;
  return Opinion::make(b, committed - b, u, base_rate);
}

struct FixedUncertainty {
  double u = 0.0;
  friend bool operator==(const FixedUncertainty&, const FixedUncertainty&) = default;
};

struct DistanceUncertainty {
  double tau = 1.0;
  double u_max = 1.0;
  friend bool operator==(const DistanceUncertainty&, const DistanceUncertainty&) = default;
};

using UncertaintyMode = std::variant<FixedUncertainty, DistanceUncertainty>;

struct AdvisorProfile {
  std::optional<Cell> position;
  UncertaintyMode uncertainty = FixedUncertainty{};

  static AdvisorProfile fixed(double u) {
    AdvisorProfile p{std::nullopt, FixedUncertainty{u}};
    p.validate();
    return p;
  }

  static AdvisorProfile at(Cell position, double tau = 1.0, double u_max = 1.0) {
    AdvisorProfile p{position, DistanceUncertainty{tau, u_max}};
    p.validate();
    return p;
  }

  void validate() const {
    if (const auto* f = std::get_if<FixedUncertainty>(&uncertainty)) {
      if (!(f->u >= 0.0 && f->u <= 1.0)) throw BadCalibration("fixed u must lie in [0, 1]");
      return;
    }
    const auto& d = std::get<DistanceUncertainty>(uncertainty);
    if (!position) throw BadCalibration("distance-based uncertainty needs an advisor position");
    if (!(d.tau > 0.0 && d.tau <= 1.0)) throw BadCalibration("tau must lie in (0, 1]");
    if (!(d.u_max >= 0.0 && d.u_max <= 1.0)) throw BadCalibration("u_max must lie in [0, 1]");
  }

  // Uncertainty of advice about `target` on `map`. The maximum distance is the
  // corner-to-corner Manhattan distance.
  double uncertainty_for(const GridMap& map, Cell target) const {
    if (const auto* f = std::get_if<FixedUncertainty>(&uncertainty)) return f->u;
    const auto& d = std::get<DistanceUncertainty>(uncertainty);
    if (!position) throw BadCalibration("distance-based uncertainty needs an advisor position");
    const double max_distance = manhattan_distance(map.start(), map.goal());
    return calibrate_uncertainty(manhattan_distance(*position, target), max_distance,
                                 d.tau, d.u_max);
  }
};

enum class OracleMode { All, HolesAndGoal };

// Rule-based advice from full knowledge of the map, row-major order.
// All: goal +2, hole -2, frozen cells +1/0/-1 for 0/1/2+ adjacent holes.
// HolesAndGoal: only the -2 and +2 entries. The start cell is never advised.
inline AdviceList oracle_advice(const GridMap& map, OracleMode mode) {
  AdviceList out;
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      const Cell cell{r, c};
      switch (map.at(cell)) {
        case Tile::Start:
          break;
        case Tile::Goal:
          out.push_back({cell, 2});
          break;
        case Tile::Hole:
          out.push_back({cell, -2});
          break;
        case Tile::Frozen: {
          if (mode == OracleMode::HolesAndGoal) break;
          int holes = 0;
          for (Action a : kActions) {
            const Cell n = displace(cell, a);
            if (map.contains(n) && map.at(n) == Tile::Hole) ++holes;
          }
          out.push_back({cell, holes == 0 ? 1 : (holes == 1 ? 0 : -1)});
          break;
        }
      }
    }
  }
  return out;
}

// The `count` entries closest to `position` (Manhattan), ties kept in list order.
inline AdviceList nearest_advice(AdviceList list, Cell position, std::size_t count) {
  std::stable_sort(list.begin(), list.end(), [&](const Advice& x, const Advice& y) {
    return manhattan_distance(x.location, position) < manhattan_distance(y.location, position);
  });
  if (list.size() > count) list.resize(count);
  return list;
}

// Cell budget for a quota fraction of the map.
inline std::size_t quota_cells(const GridMap& map, double quota) {
  if (!(quota >= 0.0 && quota <= 1.0)) throw OutOfRange("quota must lie in [0, 1]");
  return static_cast<std::size_t>(std::llround(quota * static_cast<double>(map.cell_count())));
}

}  // namespace ogrl
