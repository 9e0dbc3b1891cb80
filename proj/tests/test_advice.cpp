#include <catch_amalgamated.hpp>

#include <fstream>
#include <map>

#include "support.hpp"

using namespace ogrl;
using Catch::Approx;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t parse_error_line(const std::string& text) {
  try {
    parse_advice(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("parse the running-example advice") {
  const AdviceList list = parse_advice("[1,1], -2\n[3,3], +2");
  REQUIRE(list.size() == 2);
  CHECK(list[0] == Advice{{1, 1}, -2});
  CHECK(list[1] == Advice{{3, 3}, 2});
  CHECK(parse_advice("").empty());
  CHECK(parse_error_line("[1,1], -3") == 1);

  const AdviceList lake = load_advice(OGRL_FIXTURES "/lake-1.txt");
  CHECK(lake == AdviceList{{{1, 1}, -2}, {{1, 3}, -2}, {{0, 3}, -1}, {{3, 3}, 2}});
}

TEST_CASE("whitespace, comments, blank lines and CRLF") {
  const AdviceList list = parse_advice("# comment\n\n  [ 4 , 7 ] , -2  \n[5,8],+1\r\n\t[0,0],0\n");
  CHECK(list == AdviceList{{{4, 7}, -2}, {{5, 8}, 1}, {{0, 0}, 0}});
  CHECK(load_advice(OGRL_FIXTURES "/advice-crlf.txt") ==
        AdviceList{{{1, 1}, -2}, {{3, 3}, 2}});
}

TEST_CASE("malformed lines report their line number") {
  const auto bad = read_lines(OGRL_FIXTURES "/malformed-lines.txt");
  REQUIRE(bad.size() >= 10);
  for (std::size_t i = 0; i < bad.size(); ++i) {
    std::string doc = "# header\n[0,1], 1\n\n";
    for (std::size_t k = 0; k < i; ++k) doc += "[2,2], 0\n";
    doc += bad[i] + "\n[3,3], 2\n";
    INFO(bad[i]);
    CHECK(parse_error_line(doc) == 4 + i);
  }
}

TEST_CASE("serialization round trip") {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    AdviceList list;
    const auto n = rng.below(20);
    for (std::uint64_t i = 0; i < n; ++i) {
      list.push_back({{static_cast<int>(rng.below(30)), static_cast<int>(rng.below(30))},
                      static_cast<int>(rng.below(5)) - 2});
    }
    std::ostringstream out;
    write_advice(out, list);
    CHECK(out.str().find('+') == std::string::npos);
    CHECK(parse_advice(out.str()) == list);
  }
  CHECK(format_advice({{3, 3}, 2}) == "[3,3], 2");
}

TEST_CASE("manhattan distance") {
  CHECK(manhattan_distance({3, 0}, {1, 1}) == 3);
  CHECK(manhattan_distance({2, 2}, {2, 2}) == 0);
  CHECK(manhattan_distance({0, 0}, {11, 11}) == 22);
}

TEST_CASE("uncertainty calibration") {
  CHECK(calibrate_uncertainty(3, 6, 1.0, 1.0) == Approx(0.5));
  CHECK(calibrate_uncertainty(5, 6, 1.0, 1.0) == Approx(0.833).margin(1e-3));
  CHECK(calibrate_uncertainty(0, 6, 1.0, 1.0) == 0.0);
  CHECK(calibrate_uncertainty(4, 6, 0.5, 1.0) == 1.0);
  CHECK(calibrate_uncertainty(3, 6, 0.5, 0.8) == 0.8);  // exactly at the threshold
  CHECK_THROWS_AS(calibrate_uncertainty(7, 6, 1.0, 1.0), BadCalibration);
  CHECK_THROWS_AS(calibrate_uncertainty(1, 0, 1.0, 1.0), BadCalibration);
  CHECK_THROWS_AS(calibrate_uncertainty(1, 6, 0.0, 1.0), BadCalibration);
  CHECK_THROWS_AS(calibrate_uncertainty(1, 6, 1.0, 1.5), BadCalibration);

  for (double tau : {0.25, 0.5, 0.7, 1.0}) {
    double prev = -1.0;
    for (int delta = 0; delta <= 22; ++delta) {
      const double u = calibrate_uncertainty(delta, 22, tau, 0.9);
      CHECK(u >= prev);
      CHECK(u <= 0.9);
      prev = u;
    }
  }
}

TEST_CASE("advice compilation examples") {
  auto same = [](const Opinion& w, double b, double d, double u) {
    CHECK(w.belief() == Approx(b).margin(1e-12));
    CHECK(w.disbelief() == Approx(d).margin(1e-12));
    CHECK(w.uncertainty() == Approx(u).margin(1e-12));
    CHECK(w.base_rate() == 0.25);
  };
  same(compile_advice(1, 0.2, 0.25), 0.6, 0.2, 0.2);
  same(compile_advice(-2, 0.5, 0.25), 0.0, 0.5, 0.5);
  same(compile_advice(2, 1.0, 0.25), 0.0, 0.0, 1.0);
  same(compile_advice(0, 0.0, 0.25), 0.5, 0.5, 0.0);
  CHECK_THROWS_AS(compile_advice(3, 0.0, 0.25), OutOfScale);
  CHECK_THROWS_AS(compile_advice(-3, 0.0, 0.25), OutOfScale);
}

TEST_CASE("advice compilation properties over a sweep") {
  for (int step = 0; step <= 20; ++step) {
    const double u = step * 0.05;
    for (int v = -2; v <= 2; ++v) {
      const Opinion w = compile_advice(v, u, 0.25);
      CHECK(std::abs(w.belief() + w.disbelief() + w.uncertainty() - 1.0) <= 1e-9);
      CHECK(w.belief() == Approx(compile_advice(-v, u, 0.25).disbelief()).margin(1e-15));
      if (v > -2) {
        const Opinion lower = compile_advice(v - 1, u, 0.25);
        CHECK(w.belief() >= lower.belief());
        CHECK(w.disbelief() <= lower.disbelief());
      }
      if (step > 0) {
        const Opinion less_uncertain = compile_advice(v, (step - 1) * 0.05, 0.25);
        CHECK(w.belief() <= less_uncertain.belief() + 1e-15);
        CHECK(w.disbelief() <= less_uncertain.disbelief() + 1e-15);
      }
    }
  }
}

TEST_CASE("advisor profiles") {
  const GridMap lake = frozen_lake_4x4();
  const AdvisorProfile advisor = AdvisorProfile::at({3, 0});
  CHECK(advisor.uncertainty_for(lake, {1, 1}) == Approx(0.5));
  CHECK(advisor.uncertainty_for(lake, {1, 3}) == Approx(5.0 / 6.0));
  CHECK(advisor.uncertainty_for(lake, {0, 3}) == 1.0);
  CHECK(advisor.uncertainty_for(lake, {3, 3}) == Approx(0.5));
  CHECK(AdvisorProfile::fixed(0.4).uncertainty_for(lake, {0, 3}) == 0.4);
  CHECK_THROWS_AS(AdvisorProfile::fixed(1.2), BadCalibration);
  AdvisorProfile nowhere{std::nullopt, DistanceUncertainty{}};
  CHECK_THROWS_AS(nowhere.validate(), BadCalibration);
}

TEST_CASE("oracle advice on the 4x4 lake") {
  const GridMap lake = frozen_lake_4x4();
  CHECK(oracle_advice(lake, OracleMode::HolesAndGoal) ==
        AdviceList{{{1, 1}, -2}, {{1, 3}, -2}, {{2, 3}, -2}, {{3, 0}, -2}, {{3, 3}, 2}});

  std::map<Cell, int> all;
  for (const auto& a : oracle_advice(lake, OracleMode::All)) all[a.location] = a.value;
  CHECK(all.size() == 15);
  CHECK(all.count({0, 0}) == 0);
  CHECK(all.at({2, 2}) == 0);   // one adjacent hole
  CHECK(all.at({0, 3}) == 0);   // [1,3]
  CHECK(all.at({1, 2}) == -1);  // [1,1] and [1,3]
  CHECK(all.at({0, 2}) == 1);
  CHECK(all.at({3, 3}) == 2);

  const GridMap clear = parse_map("SFF\nFFF\nFFG\n");
  CHECK(oracle_advice(clear, OracleMode::HolesAndGoal) == AdviceList{{{2, 2}, 2}});
}

TEST_CASE("oracle advice agrees with a neighbour count on generated maps") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GridMap map = generate_map(8, 0.2, seed);
    for (const auto& a : oracle_advice(map, OracleMode::All)) {
      const Tile t = map.at(a.location);
      if (t == Tile::Hole) { CHECK(a.value == -2); continue; }
      if (t == Tile::Goal) { CHECK(a.value == 2); continue; }
      int holes = 0;
      const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const Cell n{a.location.row + dr[k], a.location.col + dc[k]};
        if (n.row >= 0 && n.col >= 0 && n.row < 8 && n.col < 8 && map.at(n) == Tile::Hole) ++holes;
      }
      CHECK(a.value == (holes == 0 ? 1 : holes == 1 ? 0 : -1));
    }
  }
}

TEST_CASE("quota helpers") {
  const GridMap lake = frozen_lake_4x4();
  const AdviceList all = oracle_advice(lake, OracleMode::All);
  CHECK(advice_quota(all, lake) == Approx(15.0 / 16.0));
  CHECK(advice_quota(AdviceList{{{1, 1}, -2}, {{1, 1}, 0}}, lake) == Approx(1.0 / 16.0));
  CHECK(quota_cells(lake, 0.1) == 2);
  const AdviceList near = nearest_advice(all, {3, 3}, 3);
  REQUIRE(near.size() == 3);
  for (const auto& a : near) CHECK(manhattan_distance(a.location, {3, 3}) <= 1);
  CHECK_THROWS_AS(check_in_bounds(AdviceList{{{4, 0}, 1}}, lake), OutOfRange);
}
