#include <doctest.h>

#include <cmath>
#include <vector>

#include "gf/modes.hpp"
#include "gf/synth.hpp"

using namespace gf;
using forecaster::ModelArch;
using guidance::Guidance;
using guidance::GuidanceKind;
using modes::AutoGuidanceSpec;
using modes::AutoOutcome;
using modes::SplitParams;
using seldonian::SeldonianConfig;

namespace {

Guidance smoothness(double epsilon, double delta = 0.1) {
  Guidance g;
  g.kind = GuidanceKind::Smoothness;
  g.epsilon = epsilon;
  g.delta = delta;
  return g;
}

SeldonianConfig quick_config(int epochs = 60) {
  SeldonianConfig config;
  config.train.epochs = epochs;
  config.train.learning_rate = 0.08;
  config.train.beta_weight = 0.05;
  return config;
}

constexpr ModelArch kArch{4, 2, 3};
constexpr SplitParams kSplit{0.2, 0.5};

}  // namespace

TEST_SUITE("modes") {

TEST_CASE("direct guidance certifies smooth synthetic data at a generous epsilon") {
  const auto seasons = data::synth_seasons({.count = 12, .noise_sd = 0.05, .seed = 21});
  int certified = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto outcome = modes::direct_guidance(seasons, {smoothness(0.5, 0.2)}, quick_config(),
                                                data::PredictionTask{8, 1}, kSplit, kArch, seed);
    if (outcome.certified()) ++certified;
  }
  CHECK(certified >= 9);
}

TEST_CASE("an infeasible guidance returns NSF that suggests raising epsilon") {
  const auto seasons = data::synth_seasons({.count = 12, .noise_sd = 0.4, .seed = 22});
  const auto outcome = modes::direct_guidance(seasons, {smoothness(0.0, 0.01)}, quick_config(20),
                                              data::PredictionTask{10, 1}, kSplit, kArch, 3);
  CHECK_FALSE(outcome.certified());
  REQUIRE_FALSE(outcome.feedback.empty());
  bool mentions_epsilon = false;
  for (const auto& fb : outcome.feedback) {
    for (const auto& s : fb.suggestions) {
      if (s.find("epsilon") != std::string::npos) mentions_epsilon = true;
    }
  }
  CHECK(mentions_epsilon);
}

TEST_CASE("a disabled constraint still certifies with a finite bound") {
  const auto seasons = data::synth_seasons({.count = 10, .noise_sd = 0.2, .seed = 23});
  auto config = quick_config(30);
  config.lambda = 0.0;
  const auto outcome =
      modes::direct_guidance(seasons, {smoothness(1e6)}, config, data::PredictionTask{10, 1},
                             kSplit, kArch, 5);
  CHECK(outcome.certified());
  REQUIRE(outcome.safety_bound.has_value());
  CHECK(std::isfinite(*outcome.safety_bound));
}

TEST_CASE("automatic guidance stops at the first certifying grid point that keeps performance") {
  // Noise keeps the tightest epsilon infeasible; the looser grid points
  // certify. The stopping rule must record a trace entry per attempt.
  const auto seasons = data::synth_seasons({.count = 14, .noise_sd = 0.18, .seed = 24});
  AutoGuidanceSpec spec;
  spec.base = smoothness(std::numeric_limits<double>::quiet_NaN(), 0.2);
  spec.epsilon_grid = {0.02, 0.6, 1.0};
  spec.performance_requirement = 2.0;  // generous: certification decides
  const auto outcome = modes::automatic_guidance(seasons, spec, quick_config(),
                                                 data::PredictionTask{10, 1}, kSplit, kArch, 7);
  REQUIRE(outcome.found());
  CHECK(*outcome.epsilon == doctest::Approx(0.6));
  CHECK(outcome.trace.size() == 2);
  CHECK_FALSE(outcome.trace[0].certified);
  CHECK(outcome.trace[1].certified);
  CHECK(outcome.trace[1].rmse_ratio <= 2.0);
  CHECK(outcome.model.has_value());
}

TEST_CASE("automatic guidance returns NSF with a full trace when no grid point works") {
  const auto seasons = data::synth_seasons({.count = 12, .noise_sd = 0.4, .seed = 25});
  AutoGuidanceSpec spec;
  spec.base = smoothness(0.0, 0.05);
  spec.epsilon_grid = {0.001};
  const auto outcome = modes::automatic_guidance(seasons, spec, quick_config(20),
                                                 data::PredictionTask{10, 1}, kSplit, kArch, 8);
  CHECK_FALSE(outcome.found());
  CHECK(outcome.trace.size() == 1);
  CHECK_FALSE(outcome.model.has_value());
}

TEST_CASE("an unbounded requirement accepts the smallest certifying epsilon") {
  const auto seasons = data::synth_seasons({.count = 12, .noise_sd = 0.1, .seed = 26});
  AutoGuidanceSpec spec;
  spec.base = smoothness(0.0, 0.2);
  spec.epsilon_grid = {0.4, 0.8};
  spec.performance_requirement = std::numeric_limits<double>::infinity();
  const auto outcome = modes::automatic_guidance(seasons, spec, quick_config(),
                                                 data::PredictionTask{8, 1}, kSplit, kArch, 9);
  REQUIRE(outcome.found());
  CHECK(*outcome.epsilon == doctest::Approx(outcome.trace.back().epsilon));
  for (std::size_t i = 0; i + 1 < outcome.trace.size(); ++i) {
    CHECK_FALSE(outcome.trace[i].certified);
  }
}

TEST_CASE("found outcomes satisfy the performance requirement by construction") {
  const auto seasons = data::synth_seasons({.count = 14, .noise_sd = 0.12, .seed = 27});
  AutoGuidanceSpec spec;
  spec.base = smoothness(0.0, 0.2);
  spec.epsilon_grid = {0.25, 0.5, 1.0, 2.0};
  spec.performance_requirement = 1.1;
  const auto outcome = modes::automatic_guidance(seasons, spec, quick_config(),
                                                 data::PredictionTask{9, 1}, kSplit, kArch, 10);
  if (outcome.found()) {
    CHECK(outcome.trace.back().rmse_ratio <= spec.performance_requirement);
    CHECK(outcome.trace.back().epsilon == *outcome.epsilon);
  }
  for (const auto& entry : outcome.trace) {
    if (!entry.certified) CHECK(std::isnan(entry.rmse_ratio));
  }
}

TEST_CASE("weekly sweep covers each requested week and tolerates failing weeks") {
  const auto seasons = data::synth_seasons({.count = 10, .noise_sd = 0.1, .seed = 28});
  // Week 45 is beyond the 30-week season: that entry must carry an error
  // while the others complete.
  const std::vector<int> weeks{5, 6, 45};
  const auto sweep = modes::weekly_sweep_direct(seasons, {smoothness(0.6, 0.2)}, quick_config(15),
                                                weeks, kSplit, kArch, 31);
  REQUIRE(sweep.weeks.size() == 3);
  CHECK(sweep.weeks[0].week == 5);
  CHECK(sweep.weeks[0].error.empty());
  CHECK(sweep.weeks[0].outcome.has_value());
  CHECK(sweep.weeks[1].week == 6);
  CHECK(sweep.weeks[2].week == 45);
  CHECK_FALSE(sweep.weeks[2].error.empty());
  CHECK_FALSE(sweep.weeks[2].outcome.has_value());
}

TEST_CASE("a singleton week range yields a singleton sweep") {
  const auto seasons = data::synth_seasons({.count = 8, .noise_sd = 0.1, .seed = 29});
  const auto sweep = modes::weekly_sweep_direct(seasons, {smoothness(0.6, 0.2)}, quick_config(10),
                                                {7}, kSplit, kArch, 32);
  CHECK(sweep.weeks.size() == 1);
}

TEST_CASE("permuting the week order permutes but does not change per-week outcomes") {
  const auto seasons = data::synth_seasons({.count = 8, .noise_sd = 0.15, .seed = 30});
  const auto config = quick_config(25);
  const auto a = modes::weekly_sweep_direct(seasons, {smoothness(0.5, 0.2)}, config, {4, 9, 14},
                                            kSplit, kArch, 33);
  const auto b = modes::weekly_sweep_direct(seasons, {smoothness(0.5, 0.2)}, config, {14, 4, 9},
                                            kSplit, kArch, 33);
  auto find_week = [](const modes::DirectSweep& sweep, int week) {
    for (const auto& w : sweep.weeks) {
      if (w.week == week) return w;
    }
    FAIL("week missing from sweep");
    return sweep.weeks.front();
  };
  for (const int week : {4, 9, 14}) {
    const auto wa = find_week(a, week);
    const auto wb = find_week(b, week);
    CHECK(wa.seed == wb.seed);
    REQUIRE(wa.outcome.has_value());
    REQUIRE(wb.outcome.has_value());
    CHECK(wa.outcome->certified() == wb.outcome->certified());
    if (wa.outcome->certified()) {
      CHECK(wa.outcome->model->theta == wb.outcome->model->theta);
    }
  }
}

TEST_CASE("parallel sweep execution matches the sequential result") {
  const auto seasons = data::synth_seasons({.count = 8, .noise_sd = 0.1, .seed = 34});
  const auto config = quick_config(15);
  const std::vector<int> weeks{5, 8, 11, 14};
  const auto seq = modes::weekly_sweep_direct(seasons, {smoothness(0.6, 0.2)}, config, weeks,
                                              kSplit, kArch, 35, 1);
  const auto par = modes::weekly_sweep_direct(seasons, {smoothness(0.6, 0.2)}, config, weeks,
                                              kSplit, kArch, 35, 4);
  REQUIRE(seq.weeks.size() == par.weeks.size());
  for (std::size_t i = 0; i < seq.weeks.size(); ++i) {
    CHECK(seq.weeks[i].week == par.weeks[i].week);
    CHECK(seq.weeks[i].outcome.has_value() == par.weeks[i].outcome.has_value());
    if (seq.weeks[i].outcome && seq.weeks[i].outcome->certified() &&
        par.weeks[i].outcome->certified()) {
      CHECK(seq.weeks[i].outcome->model->theta == par.weeks[i].outcome->model->theta);
    }
  }
}

TEST_CASE("for one trained model certification is monotone in epsilon") {
  const auto seasons = data::synth_seasons({.count = 10, .noise_sd = 0.2, .seed = 36});
  const auto split = data::split(seasons, 0.2, 0.5, 36);
  const auto config = quick_config(40);
  const data::PredictionTask task{10, 1};
  auto with_eps = quick_config(40);
  with_eps.guidances = {smoothness(0.3, 0.2)};
  const auto model = seldonian::select_candidate(split, with_eps, task, kArch, 37);

  bool previous = false;
  for (const double eps : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
    const bool now = modes::recheck_certifies(model, split, with_eps, task, eps);
    if (previous) CHECK(now);  // once certified, looser thresholds stay certified
    previous = now;
  }
  CHECK(modes::recheck_certifies(model, split, with_eps, task, 1e9));
}

}  // TEST_SUITE
