#include <doctest.h>

#include <cmath>
#include <vector>

#include "gf/rng.hpp"
#include "gf/seldonian.hpp"
#include "gf/synth.hpp"

using namespace gf;
using forecaster::ForecastModel;
using forecaster::ModelArch;
using guidance::Guidance;
using guidance::GuidanceKind;
using seldonian::SeldonianConfig;

namespace {

data::Season fixture_season(const std::string& region, const std::string& year,
                            std::vector<double> values) {
  data::Season s;
  s.region = region;
  s.year_label = year;
  s.values = std::move(values);
  return s;
}

ForecastModel constant_model(double value, double normalizer = 4.0) {
  ForecastModel m;
  m.arch = ModelArch{2, 2, 2};
  m.normalizer = normalizer;
  m.theta.assign(static_cast<std::size_t>(forecaster::parameter_count(m.arch)), 0.0);
  m.theta.back() = value / normalizer;
  return m;
}

Guidance smoothness(double epsilon, double delta = 0.1) {
  Guidance g;
  g.kind = GuidanceKind::Smoothness;
  g.epsilon = epsilon;
  g.delta = delta;
  return g;
}

// Seasons whose last observed value at the task week sits at a fixed offset
// from a constant prediction, so every deviation sample is that offset.
data::SeasonSet offset_seasons(const std::vector<double>& last_observed,
                               const std::string& region = "nat") {
  data::SeasonSet out;
  for (std::size_t i = 0; i < last_observed.size(); ++i) {
    out.add(fixture_season(region, data::season_label(2000 + static_cast<int>(i)),
                           {1.0, 2.0, last_observed[i], 2.0, 1.0}));
  }
  return out;
}

constexpr data::PredictionTask kTask{3, 1};  // last observed is values[2]

SeldonianConfig base_config(const Guidance& g, double lambda = 1.0) {
  SeldonianConfig config;
  config.lambda = lambda;
  config.u_loss = 10.0;
  config.guidances = {g};
  config.train.epochs = 5;
  return config;
}

}  // namespace

TEST_SUITE("seldonian") {

TEST_CASE("candidate loss returns the pure task branch when deviations vanish") {
  // Constant prediction 2.0 and last observed 2.0 everywhere: all Z = 0.
  const auto model = constant_model(2.0);
  const auto d_c = offset_seasons({2.0, 2.0, 2.0});
  const auto config = base_config(smoothness(0.25));
  const std::vector<int> counts{3};
  const double loss =
      seldonian::candidate_loss(model, d_c, config, kTask, d_c, counts, *config.u_loss);
  const double task_only = forecaster::task_loss(model, d_c, kTask, d_c, 0.0);
  CHECK(loss == doctest::Approx(task_only));
}

TEST_CASE("candidate loss switches to the penalty branch on a predicted violation") {
  // Z is exactly 0.6 for every season (zero variance), so the predicted
  // bound is 0.6 > 0.25; with U_L = 10 and lambda = 1 the loss is 10.6.
  const auto model = constant_model(2.0);
  const auto d_c = offset_seasons({2.6, 2.6, 2.6});
  const auto config = base_config(smoothness(0.25));
  const std::vector<int> counts{3};
  const double loss =
      seldonian::candidate_loss(model, d_c, config, kTask, d_c, counts, *config.u_loss);
  CHECK(loss == doctest::Approx(10.6));
}

TEST_CASE("lambda zero reduces the satisfied branch to the task loss exactly") {
  const auto model = constant_model(2.0);
  const auto d_c = offset_seasons({2.1, 1.9, 2.05});
  const auto config = base_config(smoothness(0.5), 0.0);
  const std::vector<int> counts{3};
  const double loss =
      seldonian::candidate_loss(model, d_c, config, kTask, d_c, counts, *config.u_loss);
  CHECK(loss == doctest::Approx(forecaster::task_loss(model, d_c, kTask, d_c, 0.0)));
}

TEST_CASE("penalty branch dominates every task-branch value once U_L covers the task loss") {
  Rng rng(14);
  for (int trial = 0; trial < 15; ++trial) {
    const auto seasons = data::synth_seasons(
        {.count = 5, .noise_sd = 0.3, .seed = 100 + static_cast<std::uint64_t>(trial)});
    const auto model =
        forecaster::init_model(ModelArch{3, 2, 2}, rng.bits(), seasons.max_value());
    const data::PredictionTask task{10, 1};
    auto config = base_config(smoothness(0.25));
    config.train.beta_weight = 0.0;
    const std::vector<int> counts{5};

    const double task_loss = forecaster::task_loss(model, seasons, task, seasons, 0.0);
    const auto z = guidance::collect_z(model, config.guidances[0], seasons, task, seasons);
    const double mean_z = [&] {
      double sum = 0.0;
      for (const auto& s : z) sum += s.value;
      return sum / static_cast<double>(z.size());
    }();
    const double u_loss = std::max(1.0, 2.0 * task_loss);
    const double task_branch_value = task_loss + config.lambda * mean_z;
    const double predicted = seldonian::predicted_bound(
        z, seldonian::BoundParams{config.guidances[0].delta, 5, config.inflation});
    const double penalty_branch_value =
        u_loss + predicted + (config.lambda - 1.0) * config.guidances[0].epsilon;
    CHECK(penalty_branch_value > task_branch_value);
  }
}

TEST_CASE("safety sample counts mirror collect_z and enforce the minimum") {
  const auto safety = offset_seasons({2.0, 2.1, 2.2});
  CHECK(seldonian::safety_sample_counts(safety, {smoothness(0.5)}, kTask) ==
        std::vector<int>{3});
  const auto tiny = offset_seasons({2.0});
  CHECK_THROWS_AS(
      static_cast<void>(seldonian::safety_sample_counts(tiny, {smoothness(0.5)}, kTask)), Error);
}

TEST_CASE("select_candidate is reproducible bit for bit") {
  const auto seasons = data::synth_seasons({.count = 8, .noise_sd = 0.1, .seed = 5});
  const auto split = data::split(seasons, 0.25, 0.5, 3);
  auto config = base_config(smoothness(0.5, 0.2));
  config.train.epochs = 2;
  const data::PredictionTask task{10, 1};
  const auto a = seldonian::select_candidate(split, config, task, ModelArch{4, 2, 3}, 11);
  const auto b = seldonian::select_candidate(split, config, task, ModelArch{4, 2, 3}, 11);
  CHECK(a.theta == b.theta);
  CHECK(a.normalizer == b.normalizer);
}

TEST_CASE("disabled constraints train exactly like the plain trainer") {
  const auto seasons = data::synth_seasons({.count = 10, .noise_sd = 0.1, .seed = 6});
  const auto split = data::split(seasons, 0.2, 0.5, 4);
  const data::PredictionTask task{12, 1};
  const ModelArch arch{4, 2, 3};

  auto config = base_config(smoothness(std::numeric_limits<double>::infinity()), 0.0);
  config.train.epochs = 40;
  config.train.beta_weight = 0.1;
  const auto guided = seldonian::select_candidate(split, config, task, arch, 9);

  // Plain training: same seed, same epochs, task loss only.
  const auto training = split.training();
  const auto start = forecaster::init_model(arch, 9, training.max_value());
  const auto plain = forecaster::fit(
      start, forecaster::taped_task_loss(start, split.candidate, task, training, 0.1),
      config.train);

  const double guided_loss = forecaster::task_loss(guided, split.candidate, task, training, 0.1);
  const double plain_loss =
      forecaster::task_loss(plain.model, split.candidate, task, training, 0.1);
  CHECK(guided_loss == doctest::Approx(plain_loss).epsilon(0.05));
  CHECK(guided.theta == plain.model.theta);  // identical path with lambda 0, eps inf
}

TEST_CASE("safety test certifies a zero-variance in-bound candidate") {
  const auto seasons = offset_seasons({2.25, 2.25, 2.25, 2.25, 2.25, 2.25});
  const auto split = data::split(seasons, 0.2, 0.4, 2);
  // Constant model 2.0: every Z on the safety set is exactly 0.25 = eps/2.
  const auto model = constant_model(2.0, seasons.max_value());
  const auto config = base_config(smoothness(0.5));
  const auto outcome = seldonian::safety_test(model, split, config, kTask);
  CHECK(outcome.certified());
  REQUIRE(outcome.model.has_value());
  REQUIRE(outcome.safety_bound.has_value());
  CHECK(*outcome.safety_bound == doctest::Approx(0.25));
}

TEST_CASE("safety test rejects when the bound crosses epsilon and reports feedback") {
  // Safety deviations {0.1, 0.2, 0.3} give the worked-example bound 0.3089.
  data::DataSplit split;
  split.candidate = offset_seasons({2.05, 2.15, 2.25}, "nat");
  split.safety = data::SeasonSet{};
  for (auto [year, offset] : {std::pair{2010, 0.1}, {2011, 0.2}, {2012, 0.3}}) {
    split.safety.add(
        fixture_season("nat", data::season_label(year), {1.0, 2.0, 2.0 + offset, 2.0, 1.0}));
  }
  const auto model = constant_model(2.0);

  SUBCASE("epsilon 0.25 is violated") {
    const auto outcome = seldonian::safety_test(model, split, base_config(smoothness(0.25)), kTask);
    CHECK_FALSE(outcome.certified());
    CHECK_FALSE(outcome.model.has_value());
    REQUIRE(outcome.safety_bound.has_value());
    CHECK(*outcome.safety_bound == doctest::Approx(0.3088662107903649).epsilon(1e-9));
    REQUIRE(outcome.feedback.size() == 1);
    const auto& fb = outcome.feedback[0];
    CHECK(fb.margin == doctest::Approx(*outcome.safety_bound - 0.25));
    CHECK(fb.epsilon == doctest::Approx(0.25));
    CHECK_FALSE(fb.suggestions.empty());
  }
  SUBCASE("epsilon 0.5 certifies the same deviations") {
    const auto outcome = seldonian::safety_test(model, split, base_config(smoothness(0.5)), kTask);
    CHECK(outcome.certified());
  }
}

TEST_CASE("safety test outcome is always exactly certified or NSF with feedback") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto seasons = data::synth_seasons(
        {.count = 8, .noise_sd = 0.4, .seed = 200 + static_cast<std::uint64_t>(trial)});
    const auto split = data::split(seasons, 0.25, 0.5, rng.bits());
    const auto model =
        forecaster::init_model(ModelArch{3, 2, 2}, rng.bits(), seasons.max_value());
    const auto outcome = seldonian::safety_test(
        model, split, base_config(smoothness(rng.uniform(0.0, 0.6))), data::PredictionTask{10, 1});
    if (outcome.certified()) {
      CHECK(outcome.model.has_value());
      for (const auto& fb : outcome.feedback) CHECK(fb.bound <= fb.epsilon);
    } else {
      CHECK_FALSE(outcome.model.has_value());
      CHECK_FALSE(outcome.feedback.empty());
      bool any_violation = false;
      for (const auto& fb : outcome.feedback) {
        if (fb.margin > 0.0) {
          any_violation = true;
          CHECK_FALSE(fb.suggestions.empty());
        }
      }
      CHECK(any_violation);
    }
  }
}

TEST_CASE("candidate loss gradient matches finite differences on both branches") {
  const auto seasons = data::synth_seasons({.count = 4, .noise_sd = 0.2, .seed = 31});
  const data::PredictionTask task{10, 1};
  const ModelArch arch{3, 2, 2};
  const std::vector<int> counts{4};

  auto check_branch = [&](double epsilon, bool expect_penalty) {
    const auto model = forecaster::init_model(arch, 19, seasons.max_value());
    auto config = base_config(smoothness(epsilon));
    config.train.beta_weight = 0.2;
    const double primal =
        seldonian::candidate_loss(model, seasons, config, task, seasons, counts, 10.0);
    CHECK((primal >= 10.0) == expect_penalty);

    const auto taped = seldonian::taped_candidate_loss(model, seasons, config, task, seasons,
                                                       counts, 10.0);
    const auto analytic = forecaster::grad(model, taped);
    std::vector<double> numeric(analytic.size());
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      ForecastModel hi = model;
      hi.theta[i] += 1e-5;
      ForecastModel lo = model;
      lo.theta[i] -= 1e-5;
      numeric[i] =
          (seldonian::candidate_loss(hi, seasons, config, task, seasons, counts, 10.0) -
           seldonian::candidate_loss(lo, seasons, config, task, seasons, counts, 10.0)) /
          2e-5;
    }
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double scale = std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric[i])});
      CHECK(std::fabs(analytic[i] - numeric[i]) <= 1e-4 * scale);
    }
  };

  check_branch(5.0, false);   // generous epsilon: task branch
  check_branch(0.001, true);  // tight epsilon: penalty branch
}

}  // TEST_SUITE
