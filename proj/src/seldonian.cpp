#include "gf/seldonian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gf/log.hpp"

namespace gf::seldonian {

double upper_bound_values(std::span<const double> z, double delta) {
  require(delta > 0.0 && delta < 1.0, ErrorKind::Precondition, "delta must lie in (0,1)");
  return detail::bound_core<double>(z, delta, static_cast<int>(z.size()), 1.0);
}

double upper_bound(std::span<const guidance::ZSample> z, double delta) {
  const auto values = guidance::z_values(z);
  return upper_bound_values(values, delta);
}

double predicted_bound_values(std::span<const double> z, const BoundParams& params) {
  params.validate();
  return detail::bound_core<double>(z, params.delta, params.safety_size, params.inflation);
}

double predicted_bound(std::span<const guidance::ZSample> z, const BoundParams& params) {
  const auto values = guidance::z_values(z);
  return predicted_bound_values(values, params);
}

std::vector<int> safety_sample_counts(const data::SeasonSet& safety,
                                      const std::vector<guidance::Guidance>& guidances,
                                      const data::PredictionTask& task) {
  std::vector<int> counts;
  counts.reserve(guidances.size());
  for (const auto& g : guidances) {
    const int count = guidance::count_z(g, safety, task);
    require(count >= 2, ErrorKind::Sizing,
            "safety set yields only " + std::to_string(count) + " deviation samples for " +
                g.describe() + "; at least 2 are required");
    counts.push_back(count);
  }
  return counts;
}

double candidate_loss(const forecaster::ForecastModel& model, const data::SeasonSet& d_c,
                      const SeldonianConfig& config, const data::PredictionTask& task,
                      const data::SeasonSet& historical, std::span<const int> safety_counts,
                      double u_loss) {
  model.validate();
  config.validate();
  const auto ctx = forecaster::summarize(historical, model.normalizer);
  return detail::candidate_loss_core<double>(model.theta, model.arch, model.normalizer, d_c,
                                             config, task, ctx, safety_counts, u_loss);
}

forecaster::TapedLoss taped_candidate_loss(const forecaster::ForecastModel& model,
                                           const data::SeasonSet& d_c,
                                           const SeldonianConfig& config,
                                           const data::PredictionTask& task,
                                           const data::SeasonSet& historical,
                                           std::vector<int> safety_counts, double u_loss) {
  const forecaster::ModelArch arch = model.arch;
  const double normalizer = model.normalizer;
  const auto ctx = forecaster::summarize(historical, model.normalizer);
  return [arch, normalizer, d_c, config, task, ctx, safety_counts, u_loss](
             ad::Tape&, std::span<const ad::Value> theta) {
    return detail::candidate_loss_core<ad::Value>(theta, arch, normalizer, d_c, config, task, ctx,
                                                  safety_counts, u_loss);
  };
}

double estimate_loss_ceiling(const forecaster::ForecastModel& start, const data::SeasonSet& d_c,
                             const data::PredictionTask& task, const data::SeasonSet& historical,
                             const forecaster::TrainConfig& train) {
  forecaster::TrainConfig warmup = train;
  warmup.epochs = 5;
  const auto loss_fn = forecaster::taped_task_loss(start, d_c, task, historical, train.beta_weight);
  const auto result = forecaster::fit(start, loss_fn, warmup);
  double max_loss = 0.0;
  for (const double l : result.loss_history) max_loss = std::max(max_loss, l);
  const double ceiling = std::max(2.0 * max_loss, 1e-6);
  log::debug("estimated loss ceiling U_L = ", ceiling);
  return ceiling;
}

forecaster::ForecastModel select_candidate(const data::DataSplit& split,
                                           const SeldonianConfig& config,
                                           const data::PredictionTask& task,
                                           const forecaster::ModelArch& arch, std::uint64_t seed) {
  config.validate();
  require(!split.candidate.empty(), ErrorKind::Sizing, "candidate set is empty");
  require(!split.safety.empty(), ErrorKind::Sizing, "safety set is empty");

  const data::SeasonSet training = split.training();
  double normalizer = training.max_value();
  if (normalizer <= 0.0) normalizer = 1.0;

  const forecaster::ForecastModel start = forecaster::init_model(arch, seed, normalizer);

  const std::vector<int> counts = safety_sample_counts(split.safety, config.guidances, task);
  const double u_loss =
      config.u_loss ? *config.u_loss
                    : estimate_loss_ceiling(start, split.candidate, task, training, config.train);

  const auto loss_fn =
      taped_candidate_loss(start, split.candidate, config, task, training, counts, u_loss);
  const auto result = forecaster::fit(start, loss_fn, config.train);
  log::debug("candidate selected: best loss ", result.best_loss, " over ",
             result.loss_history.size(), " evaluations");
  return result.model;
}

RunOutcome safety_test(const forecaster::ForecastModel& candidate, const data::DataSplit& split,
                       const SeldonianConfig& config, const data::PredictionTask& task) {
  candidate.validate();
  config.validate();
  require(!split.safety.empty(), ErrorKind::Sizing, "safety set is empty");

  const data::SeasonSet training = split.training();
  RunOutcome outcome;
  bool all_within = true;
  double max_bound = -std::numeric_limits<double>::infinity();
  double max_candidate_bound = -std::numeric_limits<double>::infinity();

  for (const auto& g : config.guidances) {
    const auto z_safety =
        guidance::collect_z(candidate, g, split.safety, task, training, config.quality);
    const double bound = upper_bound(z_safety, g.delta);
    max_bound = std::max(max_bound, bound);

    if (!split.candidate.empty()) {
      const auto z_candidate =
          guidance::collect_z(candidate, g, split.candidate, task, training, config.quality);
      if (z_candidate.size() >= 2) {
        BoundParams params{g.delta, static_cast<int>(z_safety.size()), config.inflation};
        max_candidate_bound =
            std::max(max_candidate_bound, predicted_bound(z_candidate, params));
      }
    }

    GuidanceReport report;
    report.guidance = g.describe();
    report.bound = bound;
    report.epsilon = g.epsilon;
    report.margin = bound - g.epsilon;
    if (bound > g.epsilon) {
      all_within = false;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "raise epsilon to at least %.4f", bound);
      report.suggestions = {buf, "raise delta to accept a lower-confidence certificate",
                            "enlarge the safety set with more seasons"};
    }
    outcome.feedback.push_back(std::move(report));
  }

  if (max_bound > -std::numeric_limits<double>::infinity()) outcome.safety_bound = max_bound;
  if (max_candidate_bound > -std::numeric_limits<double>::infinity()) {
    outcome.candidate_bound = max_candidate_bound;
  }
  if (all_within) {
    outcome.status = RunOutcome::Status::Certified;
    outcome.model = candidate;
  } else {
    outcome.status = RunOutcome::Status::Nsf;
  }
  return outcome;
}

}  // namespace gf::seldonian
