#include "gf/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace gf::guidance {

const char* to_string(GuidanceKind kind) {
  return kind == GuidanceKind::Smoothness ? "smoothness" : "regional_equity";
}

GuidanceKind guidance_kind_from(const std::string& name) {
  if (name == "smoothness") return GuidanceKind::Smoothness;
  if (name == "regional_equity") return GuidanceKind::RegionalEquity;
  fail(ErrorKind::Parse, "unknown guidance kind '" + name + "'");
}

void Guidance::validate() const {
  require(!std::isnan(epsilon) && epsilon >= 0.0, ErrorKind::Precondition,
          "guidance epsilon must be set and >= 0");
  require(delta > 0.0 && delta < 1.0, ErrorKind::Precondition,
          "guidance delta must lie in (0,1)");
  if (kind == GuidanceKind::RegionalEquity) {
    require(!region_pair.first.empty() && !region_pair.second.empty(), ErrorKind::Precondition,
            "regional equity guidance needs two region ids");
    require(region_pair.first != region_pair.second, ErrorKind::Precondition,
            "regional equity guidance needs two distinct regions");
  } else {
    require(region_pair.first.empty() && region_pair.second.empty(), ErrorKind::Precondition,
            "smoothness guidance takes no region pair");
  }
  if (week_window) {
    require(*week_window >= 0, ErrorKind::Precondition, "week window must be >= 0");
  }
}

std::string Guidance::describe() const {
  std::string out = to_string(kind);
  if (kind == GuidanceKind::RegionalEquity) {
    out += "[" + region_pair.first + "|" + region_pair.second + "]";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(eps=%g,delta=%g)", epsilon, delta);
  return out + buf;
}

ZSample z_smooth(const forecaster::Prediction& prediction, double last_observed) {
  require(std::isfinite(prediction.value) && std::isfinite(last_observed),
          ErrorKind::Precondition, "smoothness deviation needs finite values");
  ZSample z;
  z.value = std::fabs(prediction.value - last_observed);
  z.week_index = prediction.week_index;
  z.region = prediction.region;
  z.year_label = prediction.year_label;
  return z;
}

namespace detail {

std::vector<int> regional_weeks(const Guidance& guidance, const data::SeasonSet& data,
                                const data::PredictionTask& task) {
  for (const auto& region : {guidance.region_pair.first, guidance.region_pair.second}) {
    require(!data.for_region(region).empty(), ErrorKind::Precondition,
            "region '" + region + "' has no seasons in the data");
  }
  int min_length = std::numeric_limits<int>::max();
  for (const auto& s : data.seasons()) {
    if (s.region == guidance.region_pair.first || s.region == guidance.region_pair.second) {
      min_length = std::min(min_length, s.length());
    }
  }
  int lo = 1;
  int hi = min_length - 1;
  if (guidance.week_window) {
    lo = std::max(lo, task.week_index - *guidance.week_window);
    hi = std::min(hi, task.week_index + *guidance.week_window);
  }
  require(lo <= hi, ErrorKind::Precondition,
          "no forecastable weeks shared by regions '" + guidance.region_pair.first + "' and '" +
              guidance.region_pair.second + "'");
  std::vector<int> weeks;
  for (int w = lo; w <= hi; ++w) weeks.push_back(w);
  return weeks;
}

}  // namespace detail

ZSample z_regional(const forecaster::ForecastModel& model, const data::PredictionTask& week,
                   const data::SeasonSet& data, QualityMetric quality,
                   const std::pair<std::string, std::string>& pair,
                   const data::SeasonSet& historical) {
  model.validate();
  const data::SeasonSet first = data.for_region(pair.first);
  const data::SeasonSet second = data.for_region(pair.second);
  require(!first.empty(), ErrorKind::Precondition, "region '" + pair.first + "' missing from data");
  require(!second.empty(), ErrorKind::Precondition,
          "region '" + pair.second + "' missing from data");
  const auto ctx = forecaster::summarize(historical, model.normalizer);
  const double q1 = detail::quality_at_week<double>(model.theta, model.arch, model.normalizer,
                                                    first, week, ctx, quality);
  const double q2 = detail::quality_at_week<double>(model.theta, model.arch, model.normalizer,
                                                    second, week, ctx, quality);
  ZSample z;
  z.value = std::fabs(q1 - q2);
  z.week_index = week.week_index;
  z.region = pair.first + "|" + pair.second;
  z.year_label = "";
  return z;
}

std::vector<ZSample> collect_z(const forecaster::ForecastModel& model, const Guidance& guidance,
                               const data::SeasonSet& data, const data::PredictionTask& task,
                               const data::SeasonSet& historical, QualityMetric quality) {
  model.validate();
  const auto ctx = forecaster::summarize(historical, model.normalizer);
  const auto values = detail::collect_z_core<double>(model.theta, model.arch, model.normalizer,
                                                     guidance, data, task, ctx, quality);
  std::vector<ZSample> out;
  out.reserve(values.size());
  if (guidance.kind == GuidanceKind::Smoothness) {
    std::vector<const data::Season*> order;
    for (const auto& s : data.seasons()) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
      return std::tie(a->year_label, a->region) < std::tie(b->year_label, b->region);
    });
    for (std::size_t i = 0; i < values.size(); ++i) {
      ZSample z;
      z.value = values[i];
      z.week_index = task.week_index;
      z.region = order[i]->region;
      z.year_label = order[i]->year_label;
      out.push_back(std::move(z));
    }
  } else {
    const auto weeks = detail::regional_weeks(guidance, data, task);
    for (std::size_t i = 0; i < values.size(); ++i) {
      ZSample z;
      z.value = values[i];
      z.week_index = weeks[i];
      z.region = guidance.region_pair.first + "|" + guidance.region_pair.second;
      z.year_label = "";
      out.push_back(std::move(z));
    }
  }
  return out;
}

int count_z(const Guidance& guidance, const data::SeasonSet& data,
            const data::PredictionTask& task) {
  require(!data.empty(), ErrorKind::Precondition, "deviation samples over an empty season set");
  if (guidance.kind == GuidanceKind::Smoothness) return data.size();
  return static_cast<int>(detail::regional_weeks(guidance, data, task).size());
}

double failure_rate(std::span<const ZSample> z, double epsilon) {
  require(!z.empty(), ErrorKind::Precondition, "failure rate of an empty sample list");
  int failures = 0;
  for (const auto& sample : z) {
    if (sample.value > epsilon) ++failures;
  }
  return static_cast<double>(failures) / static_cast<double>(z.size());
}

std::vector<double> z_values(std::span<const ZSample> z) {
  std::vector<double> out;
  out.reserve(z.size());
  for (const auto& sample : z) out.push_back(sample.value);
  return out;
}

static Guidance parse_one(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::Parse, "guidance entry must be a JSON object");
  require(j.contains("kind") && j["kind"].is_string(), ErrorKind::Parse,
          "guidance needs a string 'kind'");
  Guidance g;
  g.kind = guidance_kind_from(j["kind"].get<std::string>());
  g.epsilon = j.value("epsilon", std::numeric_limits<double>::quiet_NaN());
  require(j.contains("delta") && j["delta"].is_number(), ErrorKind::Parse,
          "guidance needs a numeric 'delta'");
  g.delta = j["delta"].get<double>();
  if (g.kind == GuidanceKind::RegionalEquity) {
    require(j.contains("regions") && j["regions"].is_array() && j["regions"].size() == 2,
            ErrorKind::Parse, "regional_equity guidance needs 'regions':[r1,r2]");
    g.region_pair = {j["regions"][0].get<std::string>(), j["regions"][1].get<std::string>()};
  }
  if (j.contains("window")) g.week_window = j["window"].get<int>();
  return g;
}

std::vector<Guidance> parse_guidances(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("guidance JSON: ") + e.what());
  }
  std::vector<Guidance> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(parse_one(item));
  } else {
    out.push_back(parse_one(j));
  }
  require(!out.empty(), ErrorKind::Parse, "guidance list is empty");
  return out;
}

}  // namespace gf::guidance
