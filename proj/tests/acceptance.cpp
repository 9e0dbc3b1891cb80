// Acceptance suite. One PASS/FAIL line per criterion; run a subset by passing
// criterion numbers, e.g. `acceptance 1 3`.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ogrl/ogrl.hpp"

using namespace ogrl;

namespace {

// Pinned tolerances.
constexpr double kTable2Tolerance = 1e-3;
constexpr double kBcfExampleTolerance = 1e-3;
constexpr double kShapedTableTolerance = 5e-3;
constexpr double kCommutativityTolerance = 1e-12;
constexpr double kMassTolerance = 1e-9;
constexpr double kAssociativityFlag = 1e-9;
constexpr double kGradientRelativeError = 1e-5;
constexpr double kRankTestAlpha = 0.05;
constexpr double kVacuousTolerance = 1e-12;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

SplitMix64& shared_rng() {
  static SplitMix64 rng(20240601);
  return rng;
}

Opinion random_opinion(SplitMix64& rng) {
  double x = rng.uniform(), y = rng.uniform();
  if (x > y) std::swap(x, y);
  return make_opinion(x, y - x, 1.0 - y, rng.uniform());
}

PolicyProb random_policy(int rows, int cols, SplitMix64& rng) {
  std::vector<ActionRow> table(static_cast<std::size_t>(rows * cols));
  for (auto& row : table) {
    double sum = 0.0;
    for (auto& p : row) sum += (p = rng.uniform() + 0.01);
    for (auto& p : row) p /= sum;
  }
  return PolicyProb(rows, cols, std::move(table));
}

// 1. Advice compilation against the printed mapping table.
Verdict table2() {
  const double us[] = {0.0, 0.2, 0.5, 0.833};
  // (b, d) per value -2..+2, per u column, as printed.
  const double printed[5][4][2] = {
      {{0.00, 1.00}, {0.0, 0.8}, {0.000, 0.500}, {0.000, 0.167}},
      {{0.25, 0.75}, {0.2, 0.6}, {0.125, 0.375}, {0.042, 0.125}},
      {{0.50, 0.50}, {0.4, 0.4}, {0.250, 0.250}, {0.084, 0.084}},
      {{0.75, 0.25}, {0.6, 0.2}, {0.375, 0.125}, {0.125, 0.043}},
      {{1.00, 0.00}, {0.8, 0.0}, {0.500, 0.000}, {0.167, 0.000}},
  };
  Verdict v;
  int ok = 0;
  double worst = 0.0;
  std::string misses;
  for (int value = -2; value <= 2; ++value) {
    for (int k = 0; k < 4; ++k) {
      const Opinion w = compile_advice(value, us[k], kActionBaseRate);
      const double eb = std::abs(w.belief() - printed[value + 2][k][0]);
      const double ed = std::abs(w.disbelief() - printed[value + 2][k][1]);
      worst = std::max({worst, eb, ed});
      if (eb <= kTable2Tolerance && ed <= kTable2Tolerance) {
        ++ok;
      } else {
        char buf[160];
        std::snprintf(buf, sizeof buf, " [v=%+d u=%.3f: got (%.4f, %.4f), printed (%.3f, %.3f)]",
                      value, us[k], w.belief(), w.disbelief(), printed[value + 2][k][0],
                      printed[value + 2][k][1]);
        misses += buf;
      }
    }
  }
  v.pass = ok == 20;
  v.detail = std::to_string(ok) + "/20 cells within 1e-3, max |err| " + fmt("%.2e", worst) + misses;
  return v;
}

// 2. Worked fusion example.
Verdict bcf_example() {
  const Opinion w = bcf_fuse(make_opinion(0, 0.5, 0.5, 0.25), make_opinion(0.25, 0.75, 0, 0.25));
  const double err = std::max({std::abs(w.belief() - 0.143), std::abs(w.disbelief() - 0.857),
                               std::abs(w.uncertainty() - 0.0), std::abs(w.base_rate() - 0.25)});
  return {err <= kBcfExampleTolerance, "fused " + format_opinion(w, 4) + ", max |err| " + fmt("%.2e", err)};
}

// 3. Running example, every printed entry before and after normalization.
Verdict running_example() {
  const GridMap lake = frozen_lake_4x4();
  const AdviceList advice{{{1, 1}, -2}, {{1, 3}, -2}, {{0, 3}, -1}, {{3, 3}, 2}};
  const AdvisorProfile advisor = AdvisorProfile::at({3, 0}, 1.0);

  PolicyCert cert = to_certainty(uniform_policy(lake));
  for (const auto& a : advice) {
    cert = apply_advice(cert, lake,
                        compile_advice(a.value, advisor.uncertainty_for(lake, a.location), kActionBaseRate),
                        a.location);
  }
  const RawPolicy raw = to_probability(cert);
  const PolicyProb shaped = shape(uniform_policy(lake), lake, advice, advisor);

  const std::map<Cell, ActionRow> before{
      {{0, 0}, {0.25, 0.25, 0.25, 0.25}},  {{0, 1}, {0.25, 0.143, 0.25, 0.25}},
      {{0, 2}, {0.25, 0.25, 0.250, 0.25}}, {{0, 3}, {0.25, 0.217, 0.25, 0.25}},
      {{1, 0}, {0.25, 0.25, 0.143, 0.25}}, {{1, 2}, {0.143, 0.25, 0.217, 0.25}},
      {{1, 3}, {0.25, 0.250, 0.25, 0.25}}, {{2, 1}, {0.25, 0.25, 0.25, 0.143}},
      {{2, 3}, {0.25, 0.400, 0.25, 0.217}}, {{3, 2}, {0.25, 0.25, 0.400, 0.25}},
      {{3, 3}, {0.25, 0.25, 0.25, 0.25}}};
  const std::map<Cell, ActionRow> after{
      {{0, 0}, {0.25, 0.25, 0.25, 0.25}},     {{0, 1}, {0.28, 0.16, 0.28, 0.28}},
      {{0, 2}, {0.25, 0.25, 0.25, 0.25}},     {{0, 3}, {0.259, 0.223, 0.259, 0.259}},
      {{1, 0}, {0.28, 0.28, 0.16, 0.28}},     {{1, 2}, {0.166, 0.29, 0.252, 0.29}},
      {{1, 3}, {0.25, 0.25, 0.25, 0.25}},     {{2, 1}, {0.28, 0.28, 0.28, 0.16}},
      {{2, 3}, {0.224, 0.358, 0.224, 0.194}}, {{3, 2}, {0.217, 0.217, 0.348, 0.217}},
      {{3, 3}, {0.25, 0.25, 0.25, 0.25}}};

  int entries = 0, ok = 0;
  double worst = 0.0;
  std::string misses;
  auto compare = [&](const StateActionTable<double>& table, const std::map<Cell, ActionRow>& expected,
                     const char* which) {
    for (const auto& [cell, row] : expected) {
      for (std::size_t i = 0; i < kActionCount; ++i) {
        const double got = table.at(lake.state_of(cell), kActions[i]);
        const double err = std::abs(got - row[i]);
        worst = std::max(worst, err);
        ++entries;
        if (err <= kShapedTableTolerance) {
          ++ok;
        } else {
          misses += std::string(" [") + which + " " + to_string(cell) + " " +
                    std::string(action_name(kActions[i])) + "]";
        }
      }
    }
  };
  compare(raw, before, "before");
  compare(shaped, after, "after");
  return {ok == entries, std::to_string(ok) + "/" + std::to_string(entries) +
                             " printed entries within 5e-3, max |err| " + fmt("%.2e", worst) + misses};
}

// 4. Fusion properties on random pairs; associativity only flagged.
Verdict fusion_properties() {
  SplitMix64& rng = shared_rng();
  int pairs = 0, skipped = 0, closure = 0, commut = 0, neutral = 0, absorb = 0;
  for (int i = 0; i < 10'000; ++i) {
    const Opinion x = random_opinion(rng), y = random_opinion(rng);
    if (fusion_conflict(x, y) >= 1.0 - kConflictTolerance) {
      ++skipped;
      continue;
    }
    ++pairs;
    const Opinion xy = bcf_fuse(x, y), yx = bcf_fuse(y, x);
    const double mass = xy.belief() + xy.disbelief() + xy.uncertainty();
    const bool in_range = xy.belief() >= 0 && xy.disbelief() >= 0 && xy.uncertainty() >= 0 &&
                          xy.base_rate() >= 0 && xy.base_rate() <= 1;
    closure += in_range && std::abs(mass - 1.0) <= kMassTolerance;
    commut += std::abs(xy.belief() - yx.belief()) <= kCommutativityTolerance &&
              std::abs(xy.disbelief() - yx.disbelief()) <= kCommutativityTolerance &&
              std::abs(xy.uncertainty() - yx.uncertainty()) <= kCommutativityTolerance &&
              std::abs(xy.base_rate() - yx.base_rate()) <= kCommutativityTolerance;
    const Opinion v = bcf_fuse(Opinion::vacuous(rng.uniform()), x);
    neutral += std::abs(v.belief() - x.belief()) <= kCommutativityTolerance &&
               std::abs(v.disbelief() - x.disbelief()) <= kCommutativityTolerance &&
               std::abs(v.uncertainty() - x.uncertainty()) <= kCommutativityTolerance &&
               (x.uncertainty() == 1.0 || std::abs(v.base_rate() - x.base_rate()) <= kCommutativityTolerance);
    // Zero-uncertainty operand: y with its uncertainty moved into disbelief.
    const Opinion y0 = make_opinion(y.belief(), 1.0 - y.belief(), 0.0, y.base_rate());
    if (fusion_conflict(x, y0) < 1.0 - kConflictTolerance) {
      absorb += bcf_fuse(x, y0).uncertainty() == 0.0;
    } else {
      ++absorb;  // undefined pair, nothing to absorb
    }
  }
  // Belief masses are associative; the averaged base rate is not, so both are reported.
  int mass_flags = 0, rate_flags = 0, triples = 0;
  double mass_worst = 0.0, rate_worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Opinion x = random_opinion(rng), y = random_opinion(rng), z = random_opinion(rng);
    try {
      const Opinion l = bcf_fuse(bcf_fuse(x, y), z), r = bcf_fuse(x, bcf_fuse(y, z));
      ++triples;
      const double mass = std::max({std::abs(l.belief() - r.belief()), std::abs(l.disbelief() - r.disbelief()),
                                    std::abs(l.uncertainty() - r.uncertainty())});
      const double rate = std::abs(l.base_rate() - r.base_rate());
      mass_worst = std::max(mass_worst, mass);
      rate_worst = std::max(rate_worst, rate);
      mass_flags += mass > kAssociativityFlag;
      rate_flags += rate > kAssociativityFlag;
    } catch (const TotalConflict&) {
    }
  }
  Verdict v;
  v.pass = closure == pairs && commut == pairs && neutral == pairs && absorb == pairs && pairs > 9000;
  std::ostringstream d;
  d << pairs << " pairs (" << skipped << " total-conflict skipped): closure " << closure << ", commutative "
    << commut << ", vacuous-neutral " << neutral << ", u=0 absorbing " << absorb
    << "; associativity over " << triples << " triples (flag only): b,d,u " << mass_flags
    << " beyond 1e-9 (max " << fmt("%.1e", mass_worst) << "), base rate " << rate_flags << " (max "
    << fmt("%.1e", rate_worst) << ")";
  v.detail = d.str();
  return v;
}

// 5. REINFORCE step against finite differences of ln pi.
Verdict gradient_check() {
  SplitMix64& rng = shared_rng();
  const GridMap map = generate_map(6, 0.0, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ActionRow> rows(map.cell_count());
    for (auto& r : rows) for (double& x : r) x = (rng.uniform() - 0.5) * 8.0;
    const Preferences h(map.rows(), map.cols(), rows);
    Cell s;
    do {
      s = map.cell_of(rng.below(map.cell_count()));
    } while (map.terminal(s));
    const Action a = kActions[rng.below(kActionCount)];
    Trajectory t;
    t.steps.push_back({s, a, 1.0});
    const double lr = 0.9;
    const Preferences out = reinforce_update(h, map, t, lr, 1.0);

    const auto& row = h.row(map.state_of(s));
    auto log_pi = [&](const ActionRow& hr) { return std::log(softmax(hr)[index(a)]); };
    constexpr double eps = 1e-6;
    double err = 0.0, norm = 0.0;
    for (std::size_t b = 0; b < kActionCount; ++b) {
      ActionRow up = row, down = row;
      up[b] += eps;
      down[b] -= eps;
      const double fd = (log_pi(up) - log_pi(down)) / (2 * eps);
      const double step = (out.row(map.state_of(s))[b] - row[b]) / lr;
      err += (step - fd) * (step - fd);
      norm += fd * fd;
    }
    worst = std::max(worst, std::sqrt(err / norm));
  }
  return {worst < kGradientRelativeError, "100 tables, max relative error " + fmt("%.2e", worst)};
}

// 6. Behavioural reproduction on a generated 12x12 map.
Verdict behaviour() {
  constexpr std::size_t kRuns = 10, kEpisodes = 5'000;
  constexpr std::uint64_t kEvalSeed = 1'000;
  PilotSpec pilot;  // 12x12, ratio 0.2
  const auto seed = find_learnable_map(pilot);
  if (!seed) return {false, "pilot found no map on which the unadvised agent ever reaches the goal"};

  auto config = [&](AgentType agent, std::vector<AdviceSourceSpec> advice) {
    ExperimentConfig c;
    c.map = {12, 0.2, *seed, std::nullopt};
    c.agent = agent;
    c.advice = std::move(advice);
    c.episodes = kEpisodes;
    c.runs = kRuns;
    c.base_seed = kEvalSeed;
    return run_experiment(c).totals();
  };
  auto oracle = [&](double u) {
    return config(AgentType::Advised, {{AdviceOrigin::OracleAll, "", AdvisorProfile::fixed(u), {}}});
  };
  auto coop = [&](Cooperation mode) {
    const GridMap map = generate_map(12, 0.2, *seed);
    const auto profiles = cooperative_profiles(mode, map);
    return config(AgentType::Advised, {{AdviceOrigin::OracleAll, "", profiles[0], 0.1},
                                       {AdviceOrigin::OracleAll, "", profiles[1], 0.1}});
  };

  const auto random = config(AgentType::Random, {});
  const auto unadvised = config(AgentType::Unadvised, {});
  const auto u0 = oracle(0.0), u4 = oracle(0.4), u8 = oracle(0.8);
  const auto seq = coop(Cooperation::Sequential), par = coop(Cooperation::Parallel);

  const double m_rand = stats::mean(random), m_un = stats::mean(unadvised);
  const double m0 = stats::mean(u0), m4 = stats::mean(u4), m8 = stats::mean(u8);
  const double m_seq = stats::mean(seq), m_par = stats::mean(par);
  const double p04 = stats::rank_sum_p_greater(u0, u4), p48 = stats::rank_sum_p_greater(u4, u8);

  const bool a = m0 > 3.0 * m_un;
  const bool b = m_un > 20.0 * m_rand;
  const bool c = m0 >= m4 && m4 >= m8 && p04 < kRankTestAlpha && p48 < kRankTestAlpha;
  const bool d = m_seq >= m_par;  // informational only

  std::ostringstream out;
  out.precision(1);
  out << std::fixed << "map seed " << *seed << ", " << kRuns << "x" << kEpisodes << " episodes; means: random "
      << m_rand << ", unadvised " << m_un << ", oracle u0 " << m0 << " / u.4 " << m4 << " / u.8 " << m8
      << ", sequential " << m_seq << ", parallel " << m_par << ". (a) " << (a ? "ok" : "FAIL") << " (b) "
      << (b ? "ok" : "FAIL") << " (c) " << (c ? "ok" : "FAIL");
  out.precision(2);
  out << std::scientific << " [p(u0>u.4)=" << p04 << ", p(u.4>u.8)=" << p48 << "] (d) "
      << (d ? "ok" : "INFO reversed on this map");
  return {a && b && c, out.str()};
}

// 7. Parser conformance on fixtures and malformed lines.
Verdict parser() {
  const std::filesystem::path dir = OGRL_FIXTURES;
  int parsed = 0;
  std::string failures;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name == "lake-1.txt" || name.rfind("advice-", 0) == 0) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      load_advice(f.string());
      ++parsed;
    } catch (const std::exception& e) {
      failures += " [" + f.filename().string() + ": " + e.what() + "]";
    }
  }
  const bool lake_ok = load_advice((dir / "lake-1.txt").string()) ==
                       AdviceList{{{1, 1}, -2}, {{1, 3}, -2}, {{0, 3}, -1}, {{3, 3}, 2}};

  std::vector<std::string> bad;
  {
    std::ifstream in(dir / "malformed-lines.txt");
    for (std::string line; std::getline(in, line);) bad.push_back(line);
  }
  int rejected = 0;
  for (std::size_t i = 0; i < bad.size(); ++i) {
    // Valid lines, a comment and a blank line precede the bad one.
    std::string doc = "# preamble\n[0,1], 1\n\n";
    for (std::size_t k = 0; k < i % 5; ++k) doc += "[2,2], +1\n";
    const std::size_t expected_line = 4 + i % 5;
    doc += bad[i] + "\n[3,3], 2\n";
    try {
      parse_advice(doc);
      failures += " [accepted: " + bad[i] + "]";
    } catch (const ParseError& e) {
      if (e.line() == expected_line) ++rejected;
      else failures += " [wrong line for: " + bad[i] + "]";
    }
  }
  const bool pass = lake_ok && parsed == static_cast<int>(files.size()) && bad.size() >= 10 &&
                    rejected == static_cast<int>(bad.size());
  return {pass, std::to_string(parsed) + "/" + std::to_string(files.size()) + " advice fixtures parse" +
                    (lake_ok ? " (running-example set exact)" : " (running-example set WRONG)") + ", " +
                    std::to_string(rejected) + "/" + std::to_string(bad.size()) +
                    " malformed lines rejected at the right line" + failures};
}

// 8. Map generator properties.
Verdict generator() {
  auto bfs = [](const GridMap& m) {
    const int n = m.rows();
    std::vector<char> seen(static_cast<std::size_t>(n * n), 0);
    std::deque<int> q{0};
    seen[0] = 1;
    while (!q.empty()) {
      const int s = q.front();
      q.pop_front();
      if (s == n * n - 1) return true;
      const int r = s / n, c = s % n;
      const int nb[4][2] = {{r + 1, c}, {r - 1, c}, {r, c + 1}, {r, c - 1}};
      for (const auto& p : nb) {
        if (p[0] < 0 || p[1] < 0 || p[0] >= n || p[1] >= n) continue;
        const int t = p[0] * n + p[1];
        if (seen[t] || m.at({p[0], p[1]}) == Tile::Hole) continue;
        seen[t] = 1;
        q.push_back(t);
      }
    }
    return false;
  };
  int maps = 0, ok = 0;
  std::string misses;
  for (int size : {4, 8, 12}) {
    for (double ratio : {0.1, 0.2}) {
      const long expected_holes = std::lround(ratio * (size * size - 2));
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        ++maps;
        const GridMap m = generate_map(size, ratio, seed);
        const bool holes = static_cast<long>(m.hole_count()) == expected_holes;
        const bool corners = m.at({0, 0}) == Tile::Start && m.at({size - 1, size - 1}) == Tile::Goal &&
                             std::count(m.tiles().begin(), m.tiles().end(), Tile::Start) == 1 &&
                             std::count(m.tiles().begin(), m.tiles().end(), Tile::Goal) == 1;
        const bool same = map_to_string(generate_map(size, ratio, seed)) == map_to_string(m);
        if (holes && corners && bfs(m) && same) {
          ++ok;
        } else if (misses.size() < 200) {
          misses += " [" + std::to_string(size) + "/" + fmt("%.1f", ratio) + "/" + std::to_string(seed) + "]";
        }
      }
    }
  }
  return {ok == maps, std::to_string(ok) + "/" + std::to_string(maps) +
                          " maps: exact hole count, corners, BFS reachable, bit-identical" + misses};
}

// 9. Shaping invariants on random policies.
Verdict shaping_invariants() {
  SplitMix64& rng = shared_rng();
  double vac_worst = 0.0;
  int moved_ok = 0, moved_total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int size = 4 + static_cast<int>(rng.below(5));
    const GridMap map = generate_map(size, 0.2, rng());
    const PolicyProb p = random_policy(size, size, rng);

    AdviceList all = oracle_advice(map, OracleMode::All);
    const PolicyProb vac = shape(p, map, all, AdvisorProfile::fixed(1.0));
    for (std::size_t s = 0; s < p.states(); ++s) {
      for (std::size_t i = 0; i < kActionCount; ++i) {
        vac_worst = std::max(vac_worst, std::abs(vac.row(s)[i] - p.row(s)[i]));
      }
    }

    const Cell target = map.cell_of(rng.below(map.cell_count()));
    for (int value : {-2, -1, 1, 2}) {
      const double u = 0.95 * rng.uniform();
      const PolicyProb q = shape(p, map, AdviceList{{target, value}}, AdvisorProfile::fixed(u));
      for (const auto& [s, a] : inbound_neighbors(map, target, NeighborScope::AllSources)) {
        const double before = p.at(map.state_of(s), a), after = q.at(map.state_of(s), a);
        ++moved_total;
        moved_ok += value < 0 ? after < before : after > before;
      }
    }
  }
  return {vac_worst <= kVacuousTolerance && moved_ok == moved_total,
          "vacuous advice max |change| " + fmt("%.1e", vac_worst) + "; " + std::to_string(moved_ok) + "/" +
              std::to_string(moved_total) + " inbound entries moved in the advised direction"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "advice compilation table", table2},
      {2, "BCF worked example", bcf_example},
      {3, "4x4 end-to-end shaping", running_example},
      {4, "fusion property suite", fusion_properties},
      {5, "gradient check", gradient_check},
      {6, "behavioural reproduction", behaviour},
      {7, "parser conformance", parser},
      {8, "map generator properties", generator},
      {9, "shaping invariants", shaping_invariants},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] #%d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
