#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gf/guidance.hpp"
#include "gf/stats.hpp"

namespace gf::seldonian {

// Inputs of the candidate-time bound: the confidence level, the number of
// samples the safety set will yield, and the widening factor applied so
// candidates are conservative relative to the held-out test.
struct BoundParams {
  double delta = 0.1;
  int safety_size = 2;
  double inflation = 2.0;

  void validate() const {
    require(delta > 0.0 && delta < 1.0, ErrorKind::Precondition, "delta must lie in (0,1)");
    require(safety_size >= 2, ErrorKind::Precondition,
            "bound needs a safety sample count >= 2, got " + std::to_string(safety_size));
    require(inflation >= 1.0, ErrorKind::Precondition, "inflation must be >= 1");
  }
};

namespace detail {

// mean + inflation * (s / sqrt(m_target)) * t_{1-delta, m_target-1}, the
// one-sided Student-t upper confidence bound on E[Z]. Zero sample variance
// collapses to the mean.
template <class T>
T bound_core(std::span<const T> z, double delta, int m_target, double inflation) {
  using gf::ad::primal;
  using std::sqrt;
  const int m = static_cast<int>(z.size());
  require(m >= 2, ErrorKind::Sizing,
          "confidence bound needs at least 2 samples, got " + std::to_string(m));
  require(m_target >= 2, ErrorKind::Sizing, "safety sample count must be >= 2");

  T sum(0.0);
  for (const auto& v : z) sum = sum + v;
  const T mean = sum / static_cast<double>(m);

  T sq(0.0);
  for (const auto& v : z) {
    const T diff = v - mean;
    sq = sq + diff * diff;
  }
  if (primal(sq) <= 0.0) return mean;

  const T sd = sqrt(sq / static_cast<double>(m - 1));
  const double t = stats::student_t_quantile(1.0 - delta, static_cast<double>(m_target - 1));
  const double scale = inflation * t / std::sqrt(static_cast<double>(m_target));
  return mean + scale * sd;
}

}  // namespace detail

// (1-delta)-confidence upper bound on E[Z] from the samples themselves.
double upper_bound(std::span<const guidance::ZSample> z, double delta);
double upper_bound_values(std::span<const double> z, double delta);

// Candidate-time anticipation of the safety test: same shape, but scaled by
// the safety set's size and widened by the inflation factor.
double predicted_bound(std::span<const guidance::ZSample> z, const BoundParams& params);
double predicted_bound_values(std::span<const double> z, const BoundParams& params);

struct SeldonianConfig {
  double lambda = 1.0;                    // trade-off weight on the mean deviation
  std::optional<double> u_loss;           // loss ceiling U_L; estimated when unset
  std::vector<guidance::Guidance> guidances;
  forecaster::TrainConfig train;
  double inflation = 2.0;                 // predicted-bound widening
  guidance::QualityMetric quality = guidance::QualityMetric::Rmse;

  void validate() const {
    require(lambda >= 0.0, ErrorKind::Precondition, "lambda must be >= 0");
    if (u_loss) require(*u_loss > 0.0, ErrorKind::Precondition, "u_loss must be positive");
    require(inflation >= 1.0, ErrorKind::Precondition, "inflation must be >= 1");
    train.validate();
    for (const auto& g : guidances) g.validate();
  }
};

namespace detail {

// Switched candidate loss. While every guidance's predicted bound stays
// within its epsilon the loss is the task loss plus lambda times the mean
// deviation; otherwise it jumps above the loss ceiling and descends along
// the worst violating bound.
template <class T>
T candidate_loss_core(std::span<const T> theta, const forecaster::ModelArch& arch,
                      double normalizer, const data::SeasonSet& d_c,
                      const SeldonianConfig& config, const data::PredictionTask& task,
                      const forecaster::HistoricalContext& ctx,
                      std::span<const int> safety_counts, double u_loss) {
  using gf::ad::primal;
  const T task_term = forecaster::detail::task_loss_core<T>(theta, arch, normalizer, d_c, task,
                                                            ctx, config.train.beta_weight);
  if (config.guidances.empty()) return task_term;
  require(safety_counts.size() == config.guidances.size(), ErrorKind::Precondition,
          "one safety sample count per guidance required");

  std::vector<T> bounds;
  std::vector<T> means;
  bounds.reserve(config.guidances.size());
  means.reserve(config.guidances.size());
  int worst = -1;
  for (std::size_t i = 0; i < config.guidances.size(); ++i) {
    const auto& g = config.guidances[i];
    const auto zs = guidance::detail::collect_z_core<T>(theta, arch, normalizer, g, d_c, task,
                                                        ctx, config.quality);
    T sum(0.0);
    for (const auto& v : zs) sum = sum + v;
    means.push_back(sum / static_cast<double>(zs.size()));
    bounds.push_back(detail::bound_core<T>(zs, g.delta, safety_counts[i], config.inflation));
    if (primal(bounds.back()) > g.epsilon &&
        (worst < 0 || primal(bounds.back()) > primal(bounds[static_cast<std::size_t>(worst)]))) {
      worst = static_cast<int>(i);
    }
  }

  if (worst < 0) {
    T mean_dev(0.0);
    for (const auto& m : means) mean_dev = mean_dev + m;
    mean_dev = mean_dev / static_cast<double>(means.size());
    return task_term + config.lambda * mean_dev;
  }
  const auto& g = config.guidances[static_cast<std::size_t>(worst)];
  return T(u_loss) + bounds[static_cast<std::size_t>(worst)] + T((config.lambda - 1.0) * g.epsilon);
}

}  // namespace detail

// Safety-set sample counts per guidance (the |D_s| input of the predicted
// bound), computed structurally without a model.
std::vector<int> safety_sample_counts(const data::SeasonSet& safety,
                                      const std::vector<guidance::Guidance>& guidances,
                                      const data::PredictionTask& task);

double candidate_loss(const forecaster::ForecastModel& model, const data::SeasonSet& d_c,
                      const SeldonianConfig& config, const data::PredictionTask& task,
                      const data::SeasonSet& historical, std::span<const int> safety_counts,
                      double u_loss);

forecaster::TapedLoss taped_candidate_loss(const forecaster::ForecastModel& model,
                                           const data::SeasonSet& d_c,
                                           const SeldonianConfig& config,
                                           const data::PredictionTask& task,
                                           const data::SeasonSet& historical,
                                           std::vector<int> safety_counts, double u_loss);

// Loss ceiling U_L: twice the largest task loss observed over a short
// unconstrained warmup from the same initial parameters.
double estimate_loss_ceiling(const forecaster::ForecastModel& start, const data::SeasonSet& d_c,
                             const data::PredictionTask& task, const data::SeasonSet& historical,
                             const forecaster::TrainConfig& train);

// Trains on the candidate set, minimizing the switched loss with best-so-far
// checkpointing, and returns the winning parameters.
forecaster::ForecastModel select_candidate(const data::DataSplit& split,
                                           const SeldonianConfig& config,
                                           const data::PredictionTask& task,
                                           const forecaster::ModelArch& arch, std::uint64_t seed);

// Per-guidance safety-test result plus the knob suggestions surfaced on NSF.
struct GuidanceReport {
  std::string guidance;
  double bound = 0.0;    // safety-set upper bound on E[Z]
  double epsilon = 0.0;
  double margin = 0.0;   // bound - epsilon; positive means violated
  std::vector<std::string> suggestions;
};

struct RunOutcome {
  enum class Status { Certified, Nsf };
  Status status = Status::Nsf;
  std::optional<forecaster::ForecastModel> model;  // present iff certified
  std::optional<double> safety_bound;              // largest per-guidance bound
  std::optional<double> candidate_bound;           // largest predicted bound on D_c
  std::vector<GuidanceReport> feedback;

  bool certified() const { return status == Status::Certified; }
};

// Held-out safety test: certify the candidate only if every guidance's
// upper bound on the safety set stays within its epsilon; otherwise return
// NSF with per-guidance feedback. NSF is a value, never an exception.
RunOutcome safety_test(const forecaster::ForecastModel& candidate, const data::DataSplit& split,
                       const SeldonianConfig& config, const data::PredictionTask& task);

}  // namespace gf::seldonian
