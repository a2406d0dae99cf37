#include "gf/modes.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "gf/log.hpp"
#include "gf/rng.hpp"

namespace gf::modes {

seldonian::RunOutcome direct_guidance_on_split(const data::DataSplit& split,
                                               const std::vector<guidance::Guidance>& guidances,
                                               seldonian::SeldonianConfig config,
                                               const data::PredictionTask& task,
                                               const forecaster::ModelArch& arch,
                                               std::uint64_t seed) {
  config.guidances = guidances;
  config.validate();
  require(!config.guidances.empty(), ErrorKind::Precondition,
          "direct guidance needs at least one guidance");
  const auto candidate = seldonian::select_candidate(split, config, task, arch, seed);
  return seldonian::safety_test(candidate, split, config, task);
}

seldonian::RunOutcome direct_guidance(const data::SeasonSet& data,
                                      const std::vector<guidance::Guidance>& guidances,
                                      seldonian::SeldonianConfig config,
                                      const data::PredictionTask& task,
                                      const SplitParams& split_params,
                                      const forecaster::ModelArch& arch, std::uint64_t seed) {
  const auto split =
      data::split(data, split_params.test_fraction, split_params.candidate_fraction, seed);
  return direct_guidance_on_split(split, guidances, std::move(config), task, arch, seed);
}

void AutoGuidanceSpec::validate() const {
  require(!epsilon_grid.empty(), ErrorKind::Precondition, "epsilon grid is empty");
  for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
    require(epsilon_grid[i] > 0.0, ErrorKind::Precondition, "epsilon grid values must be positive");
    if (i > 0) {
      require(epsilon_grid[i] > epsilon_grid[i - 1], ErrorKind::Precondition,
              "epsilon grid must be strictly ascending");
    }
  }
  require(performance_requirement > 0.0, ErrorKind::Precondition,
          "performance requirement must be positive");
}

forecaster::ForecastModel train_baseline(const data::DataSplit& split,
                                         const seldonian::SeldonianConfig& config,
                                         const data::PredictionTask& task,
                                         const forecaster::ModelArch& arch, std::uint64_t seed) {
  seldonian::SeldonianConfig unconstrained = config;
  unconstrained.guidances.clear();
  unconstrained.lambda = 0.0;
  unconstrained.u_loss = 1.0;  // unused without guidances
  return seldonian::select_candidate(split, unconstrained, task, arch, seed);
}

AutoOutcome automatic_guidance_on_split(const data::DataSplit& split, const AutoGuidanceSpec& spec,
                                        const seldonian::SeldonianConfig& config_base,
                                        const data::PredictionTask& task,
                                        const forecaster::ModelArch& arch, std::uint64_t seed) {
  spec.validate();

  AutoOutcome outcome;
  const data::SeasonSet training = split.training();

  const auto baseline = train_baseline(split, config_base, task, arch, seed);
  outcome.baseline_rmse = forecaster::rmse_at_week(baseline, split.safety, task, training);

  for (const double epsilon : spec.epsilon_grid) {
    guidance::Guidance g = spec.base;
    g.epsilon = epsilon;

    AutoTraceEntry entry;
    entry.epsilon = epsilon;
    const auto run = direct_guidance_on_split(split, {g}, config_base, task, arch, seed);
    entry.certified = run.certified();
    if (run.certified()) {
      const double rmse = forecaster::rmse_at_week(*run.model, split.safety, task, training);
      entry.rmse_ratio = outcome.baseline_rmse > 0.0
                             ? rmse / outcome.baseline_rmse
                             : (rmse > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    }
    outcome.trace.push_back(entry);

    if (entry.certified && entry.rmse_ratio <= spec.performance_requirement) {
      outcome.status = AutoOutcome::Status::Found;
      outcome.epsilon = epsilon;
      outcome.model = run.model;
      outcome.run = run;
      return outcome;
    }
  }
  outcome.status = AutoOutcome::Status::Nsf;
  return outcome;
}

AutoOutcome automatic_guidance(const data::SeasonSet& data, const AutoGuidanceSpec& spec,
                               const seldonian::SeldonianConfig& config_base,
                               const data::PredictionTask& task, const SplitParams& split_params,
                               const forecaster::ModelArch& arch, std::uint64_t seed) {
  const auto split =
      data::split(data, split_params.test_fraction, split_params.candidate_fraction, seed);
  return automatic_guidance_on_split(split, spec, config_base, task, arch, seed);
}

namespace {

// Run one job per week, sequentially or in batches of `jobs` async tasks;
// results are merged in week order either way.
template <class Result, class Fn>
std::vector<Result> per_week(const std::vector<int>& weeks, int jobs, const Fn& fn) {
  std::vector<Result> results(weeks.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < weeks.size(); ++i) results[i] = fn(i);
    return results;
  }
  std::size_t next = 0;
  while (next < weeks.size()) {
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                                    weeks.size() - next);
    std::vector<std::future<Result>> futures;
    futures.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      futures.push_back(std::async(std::launch::async, [&fn, i = next + b] { return fn(i); }));
    }
    for (std::size_t b = 0; b < batch; ++b) results[next + b] = futures[b].get();
    next += batch;
  }
  return results;
}

}  // namespace

DirectSweep weekly_sweep_direct(const data::SeasonSet& data,
                                const std::vector<guidance::Guidance>& guidances,
                                const seldonian::SeldonianConfig& config,
                                const std::vector<int>& weeks, const SplitParams& split_params,
                                const forecaster::ModelArch& arch, std::uint64_t base_seed,
                                int jobs) {
  require(!weeks.empty(), ErrorKind::Precondition, "weekly sweep needs at least one week");
  DirectSweep sweep;
  sweep.split =
      data::split(data, split_params.test_fraction, split_params.candidate_fraction, base_seed);

  sweep.weeks = per_week<DirectWeekResult>(weeks, jobs, [&](std::size_t i) {
    DirectWeekResult r;
    r.week = weeks[i];
    r.seed = mix_seed(base_seed, static_cast<std::uint64_t>(weeks[i]));
    try {
      data::PredictionTask task{weeks[i], 1};
      r.outcome = direct_guidance_on_split(sweep.split, guidances, config, task, arch, r.seed);
    } catch (const Error& e) {
      r.error = e.what();
    }
    return r;
  });
  return sweep;
}

AutoSweep weekly_sweep_auto(const data::SeasonSet& data, const AutoGuidanceSpec& spec,
                            const seldonian::SeldonianConfig& config,
                            const std::vector<int>& weeks, const SplitParams& split_params,
                            const forecaster::ModelArch& arch, std::uint64_t base_seed, int jobs) {
  require(!weeks.empty(), ErrorKind::Precondition, "weekly sweep needs at least one week");
  AutoSweep sweep;
  sweep.split =
      data::split(data, split_params.test_fraction, split_params.candidate_fraction, base_seed);

  sweep.weeks = per_week<AutoWeekResult>(weeks, jobs, [&](std::size_t i) {
    AutoWeekResult r;
    r.week = weeks[i];
    r.seed = mix_seed(base_seed, static_cast<std::uint64_t>(weeks[i]));
    try {
      data::PredictionTask task{weeks[i], 1};
      r.outcome = automatic_guidance_on_split(sweep.split, spec, config, task, arch, r.seed);
    } catch (const Error& e) {
      r.error = e.what();
    }
    return r;
  });
  return sweep;
}

std::vector<BaselineWeek> baseline_sweep(const data::DataSplit& split,
                                         const seldonian::SeldonianConfig& config,
                                         const std::vector<int>& weeks,
                                         const forecaster::ModelArch& arch,
                                         std::uint64_t base_seed, int jobs) {
  require(!weeks.empty(), ErrorKind::Precondition, "baseline sweep needs at least one week");
  return per_week<BaselineWeek>(weeks, jobs, [&](std::size_t i) {
    BaselineWeek r;
    r.week = weeks[i];
    const std::uint64_t seed = mix_seed(base_seed, static_cast<std::uint64_t>(weeks[i]));
    try {
      data::PredictionTask task{weeks[i], 1};
      r.model = train_baseline(split, config, task, arch, seed);
    } catch (const Error& e) {
      r.error = e.what();
    }
    return r;
  });
}

bool recheck_certifies(const forecaster::ForecastModel& model, const data::DataSplit& split,
                       const seldonian::SeldonianConfig& config, const data::PredictionTask& task,
                       double epsilon) {
  seldonian::SeldonianConfig probe = config;
  for (auto& g : probe.guidances) g.epsilon = epsilon;
  const auto outcome = seldonian::safety_test(model, split, probe, task);
  return outcome.certified();
}

}  // namespace gf::modes
