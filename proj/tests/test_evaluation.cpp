#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <sstream>

#include "lulc/checkpoint.hpp"
#include "lulc/error.hpp"
#include "lulc/evaluation.hpp"
#include "lulc/io.hpp"
#include "lulc/seed_grid.hpp"
#include "oracles.hpp"

using namespace lulc;
using C = LulcClass;

namespace {

Params biased_policy(C c) {
  auto p = Params::zeros(kPolicySizes);
  p.biases.back()[static_cast<Eigen::Index>(index_of(c))] = 10.0;
  return p;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

int count_bars(const boost::property_tree::ptree& node) {
  int n = 0;
  for (const auto& [name, child] : node) {
    if (name == "rect" && child.get<std::string>("<xmlattr>.class", "") == "bar") ++n;
    n += count_bars(child);
  }
  return n;
}

}  // namespace

TEST_CASE("transition matrix") {
  Xoshiro256 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = oracle::random_grid(rng, 12);
    auto h = g;
    for (int k = 0; k < 20; ++k) h.set_class(rng.below(h.size()), static_cast<C>(rng.below(7)));
    const auto m = TransitionMatrix::between(g, h);
    const auto before = class_histogram(g);
    for (const auto c : kAllClasses) REQUIRE(m.row_total(c) == before[c]);
    REQUIRE(m.grand_total() == static_cast<std::int64_t>(g.size()));
  }
  CHECK_THROWS_AS(TransitionMatrix::between(LulcGrid(1, 1, {C::kWater}, 1.0),
                                            LulcGrid(2, 1, {C::kWater, C::kWater}, 1.0)),
                  Error);
}

TEST_CASE("run_greedy") {
  const auto grid = make_seed_grid();
  const auto table = default_coefficients();
  SUBCASE("zero steps is the identity") {
    Xoshiro256 rng(1);
    const auto ac = init_actor_critic(rng);
    const auto r = run_greedy(grid, EnvConfig{}, table, ac.policy, 0);
    CHECK(r.final_grid == grid);
    for (const auto c : kAllClasses) CHECK(r.transitions.row_is_diagonal(c));
  }
  SUBCASE("converged policy matches the closed form") {
    const auto r = run_greedy(grid, EnvConfig{}, table, biased_policy(C::kWetland), 1000);
    const auto& m = r.transitions.counts;
    const auto h = class_histogram(grid);
    for (const auto c : kAllClasses) {
      const auto k = index_of(c);
      if (c == C::kUrban || c == C::kWetland) {
        CHECK(r.transitions.row_is_diagonal(c));
      } else {
        CHECK(m[k][index_of(C::kWetland)] == h[c]);
      }
    }
    CHECK(r.runoff.total_m3_per_s == doctest::Approx(0.311).epsilon(1e-12));
    CHECK(r.runoff.total_m3_per_s == doctest::Approx(oracle::per_pixel_runoff(r.final_grid, table)).epsilon(1e-12));
  }
  SUBCASE("random policies keep frozen rows diagonal") {
    Xoshiro256 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
      auto ac = init_actor_critic(rng);
      for (auto& b : ac.policy.biases.back()) b = 3.0 * rng.uniform();
      const auto r = run_greedy(grid, EnvConfig{}, table, ac.policy, 1 + static_cast<int>(rng.below(2500)));
      CHECK(r.transitions.row_is_diagonal(C::kUrban));
      CHECK(r.transitions.row_is_diagonal(C::kWetland));
      const auto h = class_histogram(grid);
      for (const auto c : kAllClasses) CHECK(r.transitions.row_total(c) == h[c]);
    }
  }
}

TEST_CASE("compare_all") {
  const auto grid = make_seed_grid();
  const auto table = default_coefficients();
  const auto policy = biased_policy(C::kWetland);
  auto scenarios = builtin_scenarios();
  scenarios.push_back(Scenario::identity());
  const auto r = compare_all(grid, scenarios, policy, EnvConfig{}, table);
  REQUIRE(r.entries.size() == 8);
  CHECK(r.entries.front().label == "existing");
  CHECK(r.entries.back().label == "optimized");
  CHECK(r.entries[6].runoff_m3_per_s == r.existing);
  CHECK(r.existing == doctest::Approx(oracle::per_pixel_runoff(grid, table)).epsilon(1e-12));
  CHECK(r.optimized_is_strict_minimum);
  CHECK(r.optimized_below_existing);

  SUBCASE("values do not depend on scenario order") {
    auto reversed = scenarios;
    std::reverse(reversed.begin(), reversed.end());
    const auto q = compare_all(grid, reversed, policy, EnvConfig{}, table);
    for (const auto& e : r.entries) {
      const auto it = std::find_if(q.entries.begin(), q.entries.end(),
                                   [&](const auto& x) { return x.label == e.label; });
      REQUIRE(it != q.entries.end());
      CHECK(it->runoff_m3_per_s == e.runoff_m3_per_s);
    }
  }
  SUBCASE("a do-nothing policy is not the minimum") {
    const auto idle = compare_all(grid, builtin_scenarios(), Params::zeros(kPolicySizes),
                                  EnvConfig{}, table);
    // zero logits pick water (lowest index) everywhere not frozen
    CHECK_FALSE(idle.optimized_is_strict_minimum);
  }
}

TEST_CASE("report files") {
  const auto grid = make_seed_grid();
  const auto table = default_coefficients();
  const auto policy = biased_policy(C::kWetland);
  const auto report = compare_all(grid, builtin_scenarios(), policy, EnvConfig{}, table);
  const auto greedy = run_greedy(grid, EnvConfig{}, table, policy, 1000);
  const auto dir = oracle::scratch_dir("reports");
  emit_reports(report, greedy.transitions, dir);

  const auto transition = read_text_file(dir / "transition.csv");
  CHECK(count_lines(transition) == 8);
  CHECK(transition.rfind("from,water,urban,barren,forest,grassland,agriculture,wetland,total\n", 0) == 0);
  CHECK(transition.find("agriculture,0,0,0,0,0,0,718,718\n") != std::string::npos);

  const auto comparison = read_text_file(dir / "comparison.csv");
  CHECK(comparison.rfind("label,runoff_m3_per_s\n", 0) == 0);
  CHECK(count_lines(comparison) == 8);

  boost::property_tree::ptree svg;
  std::istringstream in(read_text_file(dir / "comparison.svg"));
  REQUIRE_NOTHROW(boost::property_tree::read_xml(in, svg));
  CHECK(count_bars(svg) == 7);
  CHECK(read_text_file(dir / "comparison.svg").find("<script") == std::string::npos);
}

TEST_CASE("checkpoint format") {
  PpoConfig cfg;
  cfg.seed = 0xfeedfacecafebeefULL;
  cfg.workers = 2;
  auto state = init_trainer_state(cfg);
  state.update = 17;
  // make optimizer state non-trivial
  nn::adam_update(state.model.policy, state.model.policy, state.model.policy_adam, {});
  const auto text = format_checkpoint(state);

  SUBCASE("round trip is exact") {
    const auto back = parse_checkpoint(text);
    CHECK(back == state);
    CHECK(format_checkpoint(back) == text);
  }
  SUBCASE("corruption names the failed field") {
    auto bad = text;
    bad[bad.size() / 2] = bad[bad.size() / 2] == '1' ? '2' : '1';
    try {
      parse_checkpoint(bad);
      FAIL("expected a checkpoint error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kCheckpoint);
      CHECK(std::string(e.what()).find("sha256") != std::string::npos);
    }
  }
  SUBCASE("architecture mismatch") {
    auto body = text.substr(0, text.rfind("sha256 "));
    const auto pos = body.find("arch 15 64 64 7");
    REQUIRE(pos != std::string::npos);
    body.replace(pos, 15, "arch 15 32 32 7");
    const auto resigned = body + "sha256 " + sha256_hex(body) + "\n";
    try {
      parse_checkpoint(resigned);
      FAIL("expected a checkpoint error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("'arch'") != std::string::npos);
    }
  }
  SUBCASE("truncated") {
    CHECK_THROWS_AS(parse_checkpoint(text.substr(0, 200)), Error);
    CHECK_THROWS_AS(parse_checkpoint(""), Error);
  }
}
