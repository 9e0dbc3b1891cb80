#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ogrl/advice.hpp"
#include "ogrl/agent.hpp"
#include "ogrl/error.hpp"
#include "ogrl/grid.hpp"
#include "ogrl/shaping.hpp"

namespace ogrl {

enum class AgentType { Random, Unadvised, Advised };

struct MapSpec {
  int size = 12;
  double hole_ratio = 0.2;
  std::uint64_t seed = 63;
  std::optional<std::string> file;  // overrides the generator when set
};

enum class AdviceOrigin { File, OracleAll, OracleHolesAndGoal };

struct AdviceSourceSpec {
  AdviceOrigin origin = AdviceOrigin::OracleAll;
  std::string path;  // AdviceOrigin::File only
  AdvisorProfile profile;
  // Keep only the advice on the quota * |S| cells closest to the advisor.
  std::optional<double> quota;
};

struct ExperimentConfig {
  std::string label = "experiment";
  MapSpec map;
  AgentType agent = AgentType::Unadvised;
  std::vector<AdviceSourceSpec> advice;
  std::size_t episodes = 10'000;
  std::size_t runs = 30;
  double lr = 0.9;
  double discount = 1.0;
  std::uint64_t base_seed = 0;
  std::size_t max_steps = 0;  // 0: 4 |S|
  unsigned threads = 0;       // 0: hardware concurrency; not part of the config hash

  void validate() const {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in [0, 1]");
    if (agent == AgentType::Advised && advice.empty()) {
      throw ConfigError("advised agents need at least one advice source");
    }
    if (agent != AgentType::Advised && !advice.empty()) {
      throw ConfigError("advice given to a non-advised agent");
    }
    for (const auto& a : advice) {
      a.profile.validate();
      if (a.origin == AdviceOrigin::File && a.path.empty()) {
        throw ConfigError("advice file source without a path");
      }
      if (a.quota && !a.profile.position) {
        throw ConfigError("advice quota selection needs an advisor position");
      }
    }
  }
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<double> rewards;     // per episode
  std::vector<double> cumulative;  // running sum R_T

  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

inline std::vector<double> cumulative_sum(const std::vector<double>& rewards) {
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (acc += rewards[i]);
  return out;
}

enum class Cooperation { Sequential, Parallel };

// Sequential: advisors at start and goal corners. Parallel: the two other
// corners. Both discount certainty linearly with tau = 1, u_max = 1.
inline std::array<AdvisorProfile, 2> cooperative_profiles(Cooperation mode, const GridMap& map) {
  const int last_row = map.rows() - 1;
  const int last_col = map.cols() - 1;
  if (mode == Cooperation::Sequential) {
    return {AdvisorProfile::at({0, 0}), AdvisorProfile::at({last_row, last_col})};
  }
  return {AdvisorProfile::at({0, last_col}), AdvisorProfile::at({last_row, 0})};
}

inline GridMap resolve_map(const MapSpec& spec) {
  if (spec.file) return load_map(*spec.file);
  return generate_map(spec.size, spec.hole_ratio, spec.seed);
}

inline std::vector<AdviceSource> resolve_advice(const std::vector<AdviceSourceSpec>& specs,
                                                const GridMap& map) {
  std::vector<AdviceSource> out;
  for (const auto& spec : specs) {
    AdviceList list;
    switch (spec.origin) {
      case AdviceOrigin::File: list = load_advice(spec.path); break;
      case AdviceOrigin::OracleAll: list = oracle_advice(map, OracleMode::All); break;
      case AdviceOrigin::OracleHolesAndGoal:
        list = oracle_advice(map, OracleMode::HolesAndGoal);
        break;
    }
    check_in_bounds(list, map);
    if (spec.quota) list = nearest_advice(std::move(list), *spec.profile.position,
                                          quota_cells(map, *spec.quota));
    out.push_back({std::move(list), spec.profile});
  }
  return out;
}

struct ExperimentResult {
  GridMap map;
  PolicyProb initial_policy;
  std::vector<AdviceSource> advice;
  std::vector<RunRecord> runs;
  std::vector<PolicyProb> final_policies;  // uniform for random agents

  std::vector<double> totals() const {
    std::vector<double> out;
    for (const auto& r : runs) out.push_back(r.total());
    return out;
  }
};

// Generates (or loads) the map once, shapes the initial policy once for
// advised agents, then executes the runs with seeds base_seed + run index.
// Runs may execute concurrently; results are ordered by run index.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  GridMap map = resolve_map(cfg.map);
  std::vector<AdviceSource> advice = resolve_advice(cfg.advice, map);
  PolicyProb initial = uniform_policy(map);
  if (cfg.agent == AgentType::Advised) initial = shape(initial, map, advice);

  std::vector<RunRecord> records(cfg.runs);
  std::vector<std::optional<PolicyProb>> finals(cfg.runs);
  std::vector<std::exception_ptr> failures(cfg.runs);

  auto execute = [&](std::size_t i) {
    RunRecord& rec = records[i];
    rec.run = i;
    rec.seed = cfg.base_seed + i;
    if (cfg.agent == AgentType::Random) {
      rec.rewards = run_random_agent(map, cfg.episodes, rec.seed, cfg.max_steps);
      finals[i] = uniform_policy(map);
    } else {
      TrainResult r = train(map, initial,
                            {cfg.episodes, cfg.lr, cfg.discount, rec.seed, cfg.max_steps});
      rec.rewards = std::move(r.rewards);
      finals[i] = softmax_policy(r.preferences);
    }
    rec.cumulative = cumulative_sum(rec.rewards);
  };

  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.runs));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cfg.runs;) {
      try {
        execute(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<PolicyProb> final_policies;
  for (auto& f : finals) final_policies.push_back(std::move(*f));
  return {std::move(map), std::move(initial), std::move(advice), std::move(records),
          std::move(final_policies)};
}

// ---------------------------------------------------------------------------
// Config file (JSON). Schema, all keys optional except "agent":
//
//   {
//     "label": "oracle-all-u0.2",
//     "map": {"size": 12, "hole_ratio": 0.2, "seed": 63} | {"file": "map.txt"},
//     "agent": "random" | "unadvised" | "advised",
//     "advice": [{
//       "source": "oracle:all" | "oracle:holes-and-goal" | "file",
//       "path": "advice.txt",
//       "uncertainty": {"mode": "fixed", "u": 0.2}
//                    | {"mode": "distance", "tau": 1.0, "u_max": 1.0},
//       "position": [row, col],
//       "quota": 0.1
//     }],
//     "episodes": 10000, "runs": 30, "lr": 0.9, "discount": 1.0,
//     "base_seed": 0, "max_steps": 0, "threads": 0
//   }
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> keys,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) ==
        keys.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline std::string to_string(AgentType a) {
  switch (a) {
    case AgentType::Random: return "random";
    case AgentType::Unadvised: return "unadvised";
    case AgentType::Advised: return "advised";
  }
  return "?";
}

inline std::string to_string(AdviceOrigin o) {
  switch (o) {
    case AdviceOrigin::File: return "file";
    case AdviceOrigin::OracleAll: return "oracle:all";
    case AdviceOrigin::OracleHolesAndGoal: return "oracle:holes-and-goal";
  }
  return "?";
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::get_or;
  detail::reject_unknown(j,
                         {"label", "map", "agent", "advice", "episodes", "runs", "lr",
                          "discount", "base_seed", "max_steps", "threads"},
                         "config");
  ExperimentConfig cfg;
  cfg.label = get_or<std::string>(j, "label", cfg.label);
  if (j.contains("map")) {
    const auto& m = j.at("map");
    detail::reject_unknown(m, {"size", "hole_ratio", "seed", "file"}, "map");
    cfg.map.size = get_or<int>(m, "size", cfg.map.size);
    cfg.map.hole_ratio = get_or<double>(m, "hole_ratio", cfg.map.hole_ratio);
    cfg.map.seed = get_or<std::uint64_t>(m, "seed", cfg.map.seed);
    if (m.contains("file")) cfg.map.file = get_or<std::string>(m, "file", "");
  }
  if (!j.contains("agent")) throw ConfigError("missing 'agent'");
  const auto agent = get_or<std::string>(j, "agent", "");
  if (agent == "random") cfg.agent = AgentType::Random;
  else if (agent == "unadvised") cfg.agent = AgentType::Unadvised;
  else if (agent == "advised") cfg.agent = AgentType::Advised;
  else throw ConfigError("unknown agent type '" + agent + "'");

  if (j.contains("advice")) {
    if (!j.at("advice").is_array()) throw ConfigError("'advice' must be an array");
    for (const auto& a : j.at("advice")) {
      detail::reject_unknown(a, {"source", "path", "uncertainty", "position", "quota"},
                             "advice source");
      AdviceSourceSpec spec;
      const auto source = get_or<std::string>(a, "source", "");
      if (source == "file") spec.origin = AdviceOrigin::File;
      else if (source == "oracle:all") spec.origin = AdviceOrigin::OracleAll;
      else if (source == "oracle:holes-and-goal") spec.origin = AdviceOrigin::OracleHolesAndGoal;
      else throw ConfigError("unknown advice source '" + source + "'");
      spec.path = get_or<std::string>(a, "path", "");
      if (a.contains("position")) {
        const auto pos = get_or<std::vector<int>>(a, "position", {});
        if (pos.size() != 2) throw ConfigError("'position' must be [row, col]");
        spec.profile.position = Cell{pos[0], pos[1]};
      }
      if (a.contains("uncertainty")) {
        const auto& u = a.at("uncertainty");
        detail::reject_unknown(u, {"mode", "u", "tau", "u_max"}, "uncertainty");
        const auto mode = get_or<std::string>(u, "mode", "fixed");
        if (mode == "fixed") {
          spec.profile.uncertainty = FixedUncertainty{get_or<double>(u, "u", 0.0)};
        } else if (mode == "distance") {
          spec.profile.uncertainty =
              DistanceUncertainty{get_or<double>(u, "tau", 1.0), get_or<double>(u, "u_max", 1.0)};
        } else {
          throw ConfigError("unknown uncertainty mode '" + mode + "'");
        }
      }
      if (a.contains("quota")) spec.quota = get_or<double>(a, "quota", 0.0);
      cfg.advice.push_back(std::move(spec));
    }
  }
  cfg.episodes = get_or<std::size_t>(j, "episodes", cfg.episodes);
  cfg.runs = get_or<std::size_t>(j, "runs", cfg.runs);
  cfg.lr = get_or<double>(j, "lr", cfg.lr);
  cfg.discount = get_or<double>(j, "discount", cfg.discount);
  cfg.base_seed = get_or<std::uint64_t>(j, "base_seed", cfg.base_seed);
  cfg.max_steps = get_or<std::size_t>(j, "max_steps", cfg.max_steps);
  cfg.threads = get_or<unsigned>(j, "threads", cfg.threads);
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  ExperimentConfig cfg;
  try {
    cfg = config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  // Relative file references are taken relative to the config's directory.
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto rebase = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  if (cfg.map.file) rebase(*cfg.map.file);
  for (auto& a : cfg.advice) rebase(a.path);
  return cfg;
}

// Canonical JSON form (keys sorted); the thread count is omitted because it
// does not affect results.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["label"] = cfg.label;
  if (cfg.map.file) {
    j["map"] = {{"file", *cfg.map.file}};
  } else {
    j["map"] = {{"size", cfg.map.size}, {"hole_ratio", cfg.map.hole_ratio},
                {"seed", cfg.map.seed}};
  }
  j["agent"] = to_string(cfg.agent);
  j["advice"] = nlohmann::json::array();
  for (const auto& a : cfg.advice) {
    nlohmann::json s;
    s["source"] = to_string(a.origin);
    if (a.origin == AdviceOrigin::File) s["path"] = a.path;
    if (a.profile.position) s["position"] = {a.profile.position->row, a.profile.position->col};
    if (const auto* f = std::get_if<FixedUncertainty>(&a.profile.uncertainty)) {
      s["uncertainty"] = {{"mode", "fixed"}, {"u", f->u}};
    } else {
      const auto& d = std::get<DistanceUncertainty>(a.profile.uncertainty);
      s["uncertainty"] = {{"mode", "distance"}, {"tau", d.tau}, {"u_max", d.u_max}};
    }
    if (a.quota) s["quota"] = *a.quota;
    j["advice"].push_back(std::move(s));
  }
  j["episodes"] = cfg.episodes;
  j["runs"] = cfg.runs;
  j["lr"] = cfg.lr;
  j["discount"] = cfg.discount;
  j["base_seed"] = cfg.base_seed;
  j["max_steps"] = cfg.max_steps;
  return j;
}

// FNV-1a 64 of the canonical config dump.
inline std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// run,episode,reward,cumulative_reward (episodes 0-based).
inline void write_results_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << "run,episode,reward,cumulative_reward\n";
  char buf[96];
  for (const auto& r : runs) {
    for (std::size_t e = 0; e < r.rewards.size(); ++e) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", r.run, e, r.rewards[e],
                    r.cumulative[e]);
      out << buf;
    }
  }
}

inline std::vector<RunRecord> read_results_csv(std::istream& in) {
  std::vector<RunRecord> runs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("run", 0) == 0)) continue;
    std::size_t run = 0, episode = 0;
    double reward = 0, cumulative = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%zu,%zu,%lf,%lf%c", &run, &episode, &reward, &cumulative,
                    &tail) != 4) {
      throw ParseError(lineno, "malformed results row");
    }
    if (runs.empty() || runs.back().run != run) {
      runs.push_back({});
      runs.back().run = run;
    }
    auto& rec = runs.back();
    if (episode != rec.rewards.size()) throw ParseError(lineno, "episodes out of order");
    rec.rewards.push_back(reward);
    rec.cumulative.push_back(cumulative);
  }
  return runs;
}

inline std::vector<RunRecord> load_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results file " + path);
  return read_results_csv(in);
}

inline nlohmann::json manifest_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
  nlohmann::json m;
  m["config"] = config_to_json(cfg);
  m["config_hash"] = config_hash(cfg);
  m["map"] = map_to_string(result.map);
  std::size_t advice_entries = 0;
  nlohmann::json quotas = nlohmann::json::array();
  for (const auto& s : result.advice) {
    advice_entries += s.advice.size();
    quotas.push_back(advice_quota(s.advice, result.map));
  }
  m["advice_entries"] = advice_entries;
  m["advice_quota"] = quotas;
  const auto totals = result.totals();
  m["run_totals"] = totals;
  double sum = 0.0;
  for (double t : totals) sum += t;
  m["mean_cumulative_reward"] = sum / static_cast<double>(totals.size());
  return m;
}

// Writes <out> (CSV) and <out minus extension>.manifest.json. Files are
// written to temporaries and renamed so a failure leaves no partial output.
inline std::filesystem::path manifest_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".manifest.json");
  return p;
}

inline void write_experiment(const std::filesystem::path& csv, const ExperimentConfig& cfg,
                             const ExperimentResult& result) {
  const auto manifest = manifest_path_for(csv);
  const auto tmp_csv = std::filesystem::path(csv.string() + ".tmp");
  const auto tmp_manifest = std::filesystem::path(manifest.string() + ".tmp");
  {
    std::ofstream out(tmp_csv, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp_csv.string());
    write_results_csv(out, result.runs);
    std::ofstream mout(tmp_manifest, std::ios::binary);
    if (!mout) throw IoError("cannot write " + tmp_manifest.string());
    mout << manifest_json(cfg, result).dump(2) << '\n';
    if (!out || !mout) throw IoError("write failed for " + csv.string());
  }
  std::filesystem::rename(tmp_csv, csv);
  std::filesystem::rename(tmp_manifest, manifest);
}

// Pilot used to pick a study map: the first generator seed (from first_seed,
// at most `attempts` seeds) on which the unadvised agent reaches the goal in
// at least `min_successful_runs` of `runs` pilot runs. Pilot run seeds are
// pilot_seed + i, independent of any evaluation seeds.
struct PilotSpec {
  int size = 12;
  double hole_ratio = 0.2;
  std::uint64_t first_seed = 1;
  std::size_t attempts = 200;
  std::size_t runs = 10;
  std::size_t episodes = 5'000;
  std::size_t min_successful_runs = 3;
  std::uint64_t pilot_seed = 1'000'000;
};

inline std::optional<std::uint64_t> find_learnable_map(const PilotSpec& pilot) {
  for (std::size_t k = 0; k < pilot.attempts; ++k) {
    ExperimentConfig cfg;
    cfg.map = {pilot.size, pilot.hole_ratio, pilot.first_seed + k, std::nullopt};
    cfg.agent = AgentType::Unadvised;
    cfg.episodes = pilot.episodes;
    cfg.runs = pilot.runs;
    cfg.base_seed = pilot.pilot_seed;
    const auto result = run_experiment(cfg);
    std::size_t learned = 0;
    for (double t : result.totals()) learned += t > 0.0 ? 1 : 0;
    if (learned >= pilot.min_successful_runs) return cfg.map.seed;
  }
  return std::nullopt;
}

}  // namespace ogrl
