#pragma once

#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gf/forecaster.hpp"

namespace gf::guidance {

enum class GuidanceKind { Smoothness, RegionalEquity };

enum class QualityMetric { Rmse, MeanAbsoluteError };

const char* to_string(GuidanceKind kind);
GuidanceKind guidance_kind_from(const std::string& name);

// A behavioral constraint: the model's deviation measure must stay within
// epsilon with probability at least 1 - delta.
struct Guidance {
  GuidanceKind kind = GuidanceKind::Smoothness;
  double epsilon = 0.0;  // raw wILI units
  double delta = 0.1;
  std::pair<std::string, std::string> region_pair;  // RegionalEquity only
  // RegionalEquity sampling window: weeks within this distance of the task
  // week contribute samples; unset means every forecastable week.
  std::optional<int> week_window;

  void validate() const;
  std::string describe() const;
};

// One realized deviation sample.
struct ZSample {
  double value = 0.0;  // always >= 0, both constructions are absolute values
  int week_index = 0;
  std::string region;      // "r1|r2" for region pairs
  std::string year_label;  // empty when pooled across seasons
};

// |prediction - last observed incidence|, both on the raw scale.
ZSample z_smooth(const forecaster::Prediction& prediction, double last_observed);

// |quality(R1) - quality(R2)| at one week, quality measured across each
// region's seasons at that week.
ZSample z_regional(const forecaster::ForecastModel& model, const data::PredictionTask& week,
                   const data::SeasonSet& data, QualityMetric quality,
                   const std::pair<std::string, std::string>& pair,
                   const data::SeasonSet& historical);

// All deviation samples for one guidance over a season set, deterministically
// ordered by (year_label, region, week).
std::vector<ZSample> collect_z(const forecaster::ForecastModel& model, const Guidance& guidance,
                               const data::SeasonSet& data, const data::PredictionTask& task,
                               const data::SeasonSet& historical,
                               QualityMetric quality = QualityMetric::Rmse);

// Number of samples collect_z would produce, without running the model.
int count_z(const Guidance& guidance, const data::SeasonSet& data,
            const data::PredictionTask& task);

// Fraction of samples strictly above epsilon (Z <= epsilon is desirable).
double failure_rate(std::span<const ZSample> z, double epsilon);

std::vector<double> z_values(std::span<const ZSample> z);

// Guidance JSON: a single object or a list of
//   {"kind":"smoothness"|"regional_equity","epsilon":0.25,"delta":0.2,
//    "regions":["hhs1","hhs6"],"window":3}
// epsilon may be omitted for automatic mode (it stays NaN until set).
std::vector<Guidance> parse_guidances(const std::string& json_text);

namespace detail {

// Weeks a regional-equity guidance samples: every week forecastable in both
// regions, optionally restricted to a window around the task week.
std::vector<int> regional_weeks(const Guidance& guidance, const data::SeasonSet& data,
                                const data::PredictionTask& task);

template <class T>
T quality_at_week(std::span<const T> theta, const forecaster::ModelArch& arch, double normalizer,
                  const data::SeasonSet& region_data, const data::PredictionTask& task,
                  const forecaster::HistoricalContext& ctx, QualityMetric quality) {
  using gf::ad::primal;
  using std::abs;
  using std::sqrt;
  T acc(0.0);
  for (const auto& season : region_data.seasons()) {
    const auto out =
        forecaster::detail::forward_for_season<T>(theta, arch, normalizer, season, task, ctx);
    const T pred = out.y_norm * normalizer;
    const double truth = season.values[static_cast<std::size_t>(task.week_index)];
    const T err = pred - T(truth);
    if (quality == QualityMetric::MeanAbsoluteError) {
      acc = acc + abs(err);
    } else {
      acc = acc + err * err;
    }
  }
  const T mean = acc / static_cast<double>(region_data.size());
  if (quality == QualityMetric::MeanAbsoluteError) return mean;
  if (primal(mean) <= 0.0) return T(0.0);  // exact fit: gradient-free zero
  return sqrt(mean);
}

// Taped/plain deviation values in the same order as collect_z.
template <class T>
std::vector<T> collect_z_core(std::span<const T> theta, const forecaster::ModelArch& arch,
                              double normalizer, const Guidance& guidance,
                              const data::SeasonSet& data, const data::PredictionTask& task,
                              const forecaster::HistoricalContext& ctx, QualityMetric quality) {
  using std::abs;
  guidance.validate();
  require(!data.empty(), ErrorKind::Precondition, "deviation samples over an empty season set");
  std::vector<T> out;

  if (guidance.kind == GuidanceKind::Smoothness) {
    // One sample per (season, prediction), ordered by (year_label, region).
    std::vector<const data::Season*> order;
    for (const auto& s : data.seasons()) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
      return std::tie(a->year_label, a->region) < std::tie(b->year_label, b->region);
    });
    for (const auto* season : order) {
      const auto fwd =
          forecaster::detail::forward_for_season<T>(theta, arch, normalizer, *season, task, ctx);
      const double last_observed = season->values[static_cast<std::size_t>(task.week_index - 1)];
      out.push_back(abs(fwd.y_norm * normalizer - T(last_observed)));
    }
    return out;
  }

  const auto weeks = regional_weeks(guidance, data, task);
  const data::SeasonSet first = data.for_region(guidance.region_pair.first);
  const data::SeasonSet second = data.for_region(guidance.region_pair.second);
  for (const int w : weeks) {
    data::PredictionTask week_task{w, 1};
    const T q1 = quality_at_week<T>(theta, arch, normalizer, first, week_task, ctx, quality);
    const T q2 = quality_at_week<T>(theta, arch, normalizer, second, week_task, ctx, quality);
    out.push_back(abs(q1 - q2));
  }
  return out;
}

}  // namespace detail

}  // namespace gf::guidance
