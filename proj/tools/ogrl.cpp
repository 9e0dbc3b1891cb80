// ogrl: command-line front end for opinion-guided policy shaping experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ogrl/ogrl.hpp"

namespace fs = std::filesystem;
using namespace ogrl;

namespace {

// Malformed invocation detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Cell parse_cell(const std::string& text, const std::string& flag) {
  int r = 0, c = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d,%d%c", &r, &c, &tail) != 2 || r < 0 || c < 0) {
    throw UsageError(flag + " expects ROW,COL, got '" + text + "'");
  }
  return {r, c};
}

// fixed:U | distance:tau=T[,u_max=M]
UncertaintyMode parse_uncertainty(const std::string& text) {
  double value = 0.0, u_max = 1.0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "fixed:%lf%c", &value, &tail) == 1) {
    return FixedUncertainty{value};
  }
  if (std::sscanf(text.c_str(), "distance:tau=%lf,u_max=%lf%c", &value, &u_max, &tail) == 2 ||
      std::sscanf(text.c_str(), "distance:tau=%lf%c", &value, &tail) == 1) {
    return DistanceUncertainty{value, u_max};
  }
  if (text == "distance") return DistanceUncertainty{1.0, 1.0};
  throw UsageError("--uncertainty expects fixed:U or distance:tau=T, got '" + text + "'");
}

void require_file(const std::string& path, const std::string& flag) {
  if (!fs::is_regular_file(path)) throw UsageError(flag + ": no such file '" + path + "'");
}

void require_writable(const std::string& path, const std::string& flag) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError(flag + ": directory '" + parent.string() + "' does not exist");
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

template <typename Writer>
void write_with(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  writer(out);
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opinion-guided policy shaping for grid-world reinforcement learning", "ogrl"};
  app.set_version_flag("--version", std::string("ogrl ") + kVersion);
  app.require_subcommand(1, 1);

  // gen-map
  int size = 12;
  double hole_ratio = 0.2;
  std::uint64_t map_seed = 0;
  std::string map_out;
  auto* gen = app.add_subcommand("gen-map", "Generate a seeded Frozen-Lake map");
  gen->add_option("--size", size, "Side length")->required();
  gen->add_option("--hole-ratio", hole_ratio, "Fraction of non-start/goal cells that are holes")
      ->required();
  gen->add_option("--seed", map_seed, "Generator seed")->required();
  gen->add_option("--out", map_out, "Output map file (S/F/H/G rows)")->required();

  // advise
  std::string advise_map, advise_mode = "all", advise_near, advise_out;
  double advise_quota = 1.0;
  auto* advise = app.add_subcommand("advise", "Write oracle advice for a map");
  advise->add_option("--map", advise_map, "Map file")->required();
  advise->add_option("--mode", advise_mode, "all | holes-and-goal")
      ->check(CLI::IsMember({"all", "holes-and-goal"}));
  advise->add_option("--near", advise_near, "Keep only advice closest to ROW,COL");
  advise->add_option("--quota", advise_quota, "Fraction of cells to keep with --near");
  advise->add_option("--out", advise_out, "Output advice file")->required();

  // shape
  std::string shape_map, shape_out, shape_policy;
  std::vector<std::string> shape_advice, shape_pos, shape_unc;
  auto* shp = app.add_subcommand("shape", "Fuse advice into a policy");
  shp->add_option("--map", shape_map, "Map file")->required();
  shp->add_option("--advice", shape_advice, "Advice file (repeat for several advisors)")
      ->required();
  shp->add_option("--advisor-pos", shape_pos, "Advisor cell ROW,COL (once, or once per --advice)");
  shp->add_option("--uncertainty", shape_unc,
                  "fixed:U | distance:tau=T (once, or once per --advice)")
      ->required();
  shp->add_option("--policy", shape_policy, "Policy CSV to shape (default: uniform)");
  shp->add_option("--out", shape_out, "Output policy CSV")->required();

  // train
  std::string train_map, train_policy, train_out, train_policy_out;
  TrainOptions topts;
  auto* trn = app.add_subcommand("train", "Train a policy-gradient agent");
  trn->add_option("--map", train_map, "Map file")->required();
  trn->add_option("--policy", train_policy, "Initial policy CSV (default: uniform)");
  trn->add_option("--episodes", topts.episodes, "Episodes")->capture_default_str();
  trn->add_option("--lr", topts.lr, "Learning rate")->capture_default_str();
  trn->add_option("--discount", topts.discount, "Discount factor")->capture_default_str();
  trn->add_option("--seed", topts.seed, "Sampling seed")->required();
  trn->add_option("--max-steps", topts.max_steps, "Episode step cap (0: 4 x cells)")
      ->capture_default_str();
  trn->add_option("--out", train_out, "Per-episode rewards CSV")->required();
  trn->add_option("--policy-out", train_policy_out, "Final policy CSV");

  // experiment
  std::string exp_config, exp_out;
  unsigned exp_threads = 0;
  auto* exp = app.add_subcommand("experiment", "Run a configured study");
  exp->add_option("--config", exp_config, "JSON config file")->required();
  exp->add_option("--out", exp_out, "Results CSV (manifest written alongside)")->required();
  exp->add_option("--threads", exp_threads, "Worker threads (0: all cores)");

  // report
  auto* rep = app.add_subcommand("report", "Render heatmaps and reward curves");
  rep->require_subcommand(1, 1);
  std::string hm_policy, hm_map, hm_out, hm_csv;
  auto* hm = rep->add_subcommand("heatmap", "Policy heatmap (SVG + CSV)");
  hm->add_option("--policy", hm_policy, "Policy CSV")->required();
  hm->add_option("--map", hm_map, "Map file")->required();
  hm->add_option("--out", hm_out, "Output SVG")->required();
  hm->add_option("--csv", hm_csv, "Output CSV (default: --out with .csv extension)");
  std::vector<std::string> cv_in;
  std::string cv_scale = "linear", cv_out;
  auto* cv = rep->add_subcommand("curves", "Mean cumulative reward curves (SVG)");
  cv->add_option("--in", cv_in, "Results CSV files, one series each")->required();
  cv->add_option("--scale", cv_scale, "linear | log")->check(CLI::IsMember({"linear", "log"}));
  cv->add_option("--out", cv_out, "Output SVG")->required();

  if (argc <= 1) {
    std::cout << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  }

  try {
    if (*gen) {
      require_writable(map_out, "--out");
      const GridMap map = generate_map(size, hole_ratio, map_seed);
      write_text(map_out, map_to_string(map));
    } else if (*advise) {
      require_file(advise_map, "--map");
      require_writable(advise_out, "--out");
      const GridMap map = load_map(advise_map);
      AdviceList list = oracle_advice(
          map, advise_mode == "all" ? OracleMode::All : OracleMode::HolesAndGoal);
      if (!advise_near.empty()) {
        const Cell near = parse_cell(advise_near, "--near");
        if (!map.contains(near)) throw UsageError("--near lies outside the map");
        list = nearest_advice(std::move(list), near, quota_cells(map, advise_quota));
      }
      write_with(advise_out, [&](std::ostream& out) { write_advice(out, list); });
      std::cerr << "advice: " << list.size() << " entries, quota "
                << advice_quota(list, map) << "\n";
    } else if (*shp) {
      require_file(shape_map, "--map");
      for (const auto& a : shape_advice) require_file(a, "--advice");
      if (!shape_policy.empty()) require_file(shape_policy, "--policy");
      require_writable(shape_out, "--out");
      const std::size_t n = shape_advice.size();
      if (shape_unc.size() != 1 && shape_unc.size() != n) {
        throw UsageError("--uncertainty must be given once or once per --advice");
      }
      if (!shape_pos.empty() && shape_pos.size() != 1 && shape_pos.size() != n) {
        throw UsageError("--advisor-pos must be given once or once per --advice");
      }
      const GridMap map = load_map(shape_map);
      std::vector<AdviceSource> sources;
      for (std::size_t i = 0; i < n; ++i) {
        AdvisorProfile profile;
        profile.uncertainty = parse_uncertainty(shape_unc[shape_unc.size() == 1 ? 0 : i]);
        if (!shape_pos.empty()) {
          profile.position =
              parse_cell(shape_pos[shape_pos.size() == 1 ? 0 : i], "--advisor-pos");
        }
        if (std::holds_alternative<DistanceUncertainty>(profile.uncertainty) &&
            !profile.position) {
          throw UsageError("distance uncertainty requires --advisor-pos");
        }
        const AdviceList list = load_advice(shape_advice[i]);
        std::cerr << "advice " << shape_advice[i] << ": " << list.size() << " entries, quota "
                  << advice_quota(list, map) << "\n";
        sources.push_back({list, profile});
      }
      const PolicyProb base =
          shape_policy.empty() ? uniform_policy(map) : load_policy_csv(shape_policy);
      const PolicyProb shaped = shape(base, map, sources);
      write_with(shape_out, [&](std::ostream& out) { write_policy_csv(out, shaped); });
    } else if (*trn) {
      require_file(train_map, "--map");
      if (!train_policy.empty()) require_file(train_policy, "--policy");
      require_writable(train_out, "--out");
      if (!train_policy_out.empty()) require_writable(train_policy_out, "--policy-out");
      const GridMap map = load_map(train_map);
      const PolicyProb initial =
          train_policy.empty() ? uniform_policy(map) : load_policy_csv(train_policy);
      TrainResult result = train(map, initial, topts);
      RunRecord rec;
      rec.seed = topts.seed;
      rec.cumulative = cumulative_sum(result.rewards);
      rec.rewards = std::move(result.rewards);
      write_with(train_out, [&](std::ostream& out) { write_results_csv(out, {rec}); });
      if (!train_policy_out.empty()) {
        write_with(train_policy_out, [&](std::ostream& out) {
          write_policy_csv(out, softmax_policy(result.preferences));
        });
      }
      std::cerr << "cumulative reward: " << rec.total() << "\n";
    } else if (*exp) {
      require_file(exp_config, "--config");
      require_writable(exp_out, "--out");
      ExperimentConfig cfg = load_config(exp_config);
      if (exp_threads) cfg.threads = exp_threads;
      const ExperimentResult result = run_experiment(cfg);
      write_experiment(exp_out, cfg, result);
      std::cerr << cfg.label << ": mean cumulative reward "
                << stats::mean(result.totals()) << " over " << cfg.runs << " runs\n";
    } else if (*hm) {
      require_file(hm_policy, "--policy");
      require_file(hm_map, "--map");
      require_writable(hm_out, "--out");
      std::string csv_path = hm_csv;
      if (csv_path.empty()) csv_path = fs::path(hm_out).replace_extension(".csv").string();
      require_writable(csv_path, "--csv");
      const GridMap map = load_map(hm_map);
      const auto cells = heatmap(load_policy_csv(hm_policy), map);
      write_text(hm_out, heatmap_svg(cells, map));
      write_with(csv_path, [&](std::ostream& out) { write_heatmap_csv(out, cells); });
    } else if (*cv) {
      for (const auto& f : cv_in) require_file(f, "--in");
      require_writable(cv_out, "--out");
      std::vector<CurveSeries> series;
      for (const auto& f : cv_in) {
        series.push_back({fs::path(f).stem().string(), load_results_csv(f)});
      }
      write_text(cv_out,
                 reward_curves_svg(series, cv_scale == "log" ? Scale::Log : Scale::Linear));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
