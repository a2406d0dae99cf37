#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gf/seldonian.hpp"

namespace gf::modes {

struct SplitParams {
  double test_fraction = 0.2;
  double candidate_fraction = 0.5;
};

// Direct guidance: the expert supplies every knob. Split, select a
// candidate, run the safety test, hand back the outcome unchanged.
seldonian::RunOutcome direct_guidance(const data::SeasonSet& data,
                                      const std::vector<guidance::Guidance>& guidances,
                                      seldonian::SeldonianConfig config,
                                      const data::PredictionTask& task,
                                      const SplitParams& split_params,
                                      const forecaster::ModelArch& arch, std::uint64_t seed);

// Same, reusing an existing split (the weekly sweep and automatic mode hold
// the split fixed while varying the task or epsilon).
seldonian::RunOutcome direct_guidance_on_split(const data::DataSplit& split,
                                               const std::vector<guidance::Guidance>& guidances,
                                               seldonian::SeldonianConfig config,
                                               const data::PredictionTask& task,
                                               const forecaster::ModelArch& arch,
                                               std::uint64_t seed);

// Automatic guidance: epsilon is searched over an ascending grid under a
// performance requirement expressed as a D_s RMSE ratio against the
// unconstrained baseline.
struct AutoGuidanceSpec {
  guidance::Guidance base;           // epsilon ignored; kind/delta/regions used
  std::vector<double> epsilon_grid;  // strictly ascending, all positive
  double performance_requirement = 1.0;

  void validate() const;
};

struct AutoTraceEntry {
  double epsilon = 0.0;
  bool certified = false;
  double rmse_ratio = std::numeric_limits<double>::quiet_NaN();  // NaN when not certified
};

struct AutoOutcome {
  enum class Status { Found, Nsf };
  Status status = Status::Nsf;
  std::optional<double> epsilon;
  std::optional<forecaster::ForecastModel> model;
  std::optional<seldonian::RunOutcome> run;  // safety-test detail of the found epsilon
  std::vector<AutoTraceEntry> trace;         // complete up to the stopping point
  double baseline_rmse = 0.0;

  bool found() const { return status == Status::Found; }
};

AutoOutcome automatic_guidance(const data::SeasonSet& data, const AutoGuidanceSpec& spec,
                               const seldonian::SeldonianConfig& config_base,
                               const data::PredictionTask& task, const SplitParams& split_params,
                               const forecaster::ModelArch& arch, std::uint64_t seed);

AutoOutcome automatic_guidance_on_split(const data::DataSplit& split, const AutoGuidanceSpec& spec,
                                        const seldonian::SeldonianConfig& config_base,
                                        const data::PredictionTask& task,
                                        const forecaster::ModelArch& arch, std::uint64_t seed);

// Unconstrained baseline: plain task-loss training on the candidate set with
// the same architecture, epochs and seed.
forecaster::ForecastModel train_baseline(const data::DataSplit& split,
                                         const seldonian::SeldonianConfig& config,
                                         const data::PredictionTask& task,
                                         const forecaster::ModelArch& arch, std::uint64_t seed);

enum class SweepMode { Direct, Auto };

struct DirectWeekResult {
  int week = 0;
  std::uint64_t seed = 0;
  std::optional<seldonian::RunOutcome> outcome;  // absent when the week errored
  std::string error;
};

struct AutoWeekResult {
  int week = 0;
  std::uint64_t seed = 0;
  std::optional<AutoOutcome> outcome;
  std::string error;
};

// Weekly sweeps share one split (drawn from the base seed) so every week is
// judged against the same held-out seasons; per-week training seeds are
// derived from (base seed, week). A failing week records its error and the
// other weeks proceed. jobs > 1 runs weeks concurrently; results are merged
// in week order either way.
struct DirectSweep {
  data::DataSplit split;
  std::vector<DirectWeekResult> weeks;
};

struct AutoSweep {
  data::DataSplit split;
  std::vector<AutoWeekResult> weeks;
};

DirectSweep weekly_sweep_direct(const data::SeasonSet& data,
                                const std::vector<guidance::Guidance>& guidances,
                                const seldonian::SeldonianConfig& config,
                                const std::vector<int>& weeks, const SplitParams& split_params,
                                const forecaster::ModelArch& arch, std::uint64_t base_seed,
                                int jobs = 1);

AutoSweep weekly_sweep_auto(const data::SeasonSet& data, const AutoGuidanceSpec& spec,
                            const seldonian::SeldonianConfig& config,
                            const std::vector<int>& weeks, const SplitParams& split_params,
                            const forecaster::ModelArch& arch, std::uint64_t base_seed,
                            int jobs = 1);

// Per-week unconstrained baselines matching a direct sweep's seeds.
struct BaselineWeek {
  int week = 0;
  std::optional<forecaster::ForecastModel> model;
  std::string error;
};

std::vector<BaselineWeek> baseline_sweep(const data::DataSplit& split,
                                         const seldonian::SeldonianConfig& config,
                                         const std::vector<int>& weeks,
                                         const forecaster::ModelArch& arch,
                                         std::uint64_t base_seed, int jobs = 1);

// Threshold-monotonicity hook: recheck one trained model's safety bounds
// against a different epsilon without retraining.
bool recheck_certifies(const forecaster::ForecastModel& model, const data::DataSplit& split,
                       const seldonian::SeldonianConfig& config, const data::PredictionTask& task,
                       double epsilon);

}  // namespace gf::modes
