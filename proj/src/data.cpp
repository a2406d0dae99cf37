#include "gf/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

#include "gf/rng.hpp"

namespace gf::data {

int Season::epi_week(int index) const {
  require(index >= 0 && index < length(), ErrorKind::Index,
          "week index " + std::to_string(index) + " outside season " + region + " " + year_label);
  const int last_calendar_week = has_week53() ? 53 : 52;
  const int w = 40 + index;
  return w <= last_calendar_week ? w : w - last_calendar_week;
}

int Season::index_of_epi_week(int epi_week) const {
  const int last_calendar_week = has_week53() ? 53 : 52;
  int index;
  if (epi_week >= 40 && epi_week <= last_calendar_week) {
    index = epi_week - 40;
  } else if (epi_week >= 1 && epi_week < 40) {
    index = epi_week + last_calendar_week - 40;
  } else {
    return -1;
  }
  return index < length() ? index : -1;
}

void Season::validate() const {
  require(!region.empty(), ErrorKind::Validation, "season with empty region id");
  require(!year_label.empty(), ErrorKind::Validation, "season with empty year label");
  require(!values.empty(), ErrorKind::Validation,
          "season " + region + " " + year_label + " has no values");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]) && values[i] >= 0.0, ErrorKind::Validation,
            "negative or non-finite wILI in " + region + " " + year_label + " at week index " +
                std::to_string(i));
  }
}

void Season::validate_alignment() const {
  validate();
  require(length() == kStandardSeasonLength || length() == kStandardSeasonLength + 1,
          ErrorKind::Validation,
          "season " + region + " " + year_label + " has " + std::to_string(length()) +
              " weeks, expected 30 or 31");
}

std::string season_label(int start_year) {
  const int next = (start_year + 1) % 100;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%d/%02d", start_year, next);
  return buf;
}

int season_start_year(int calendar_year, int epi_week) {
  return epi_week >= 40 ? calendar_year : calendar_year - 1;
}

static bool season_key_less(const Season& a, const Season& b) {
  return std::tie(a.region, a.year_label) < std::tie(b.region, b.year_label);
}

SeasonSet::SeasonSet(std::vector<Season> seasons) {
  for (auto& s : seasons) add(std::move(s));
}

void SeasonSet::add(Season season) {
  season.validate();
  auto it = std::lower_bound(seasons_.begin(), seasons_.end(), season, season_key_less);
  require(it == seasons_.end() || it->region != season.region || it->year_label != season.year_label,
          ErrorKind::Validation, "duplicate season " + season.region + " " + season.year_label);
  seasons_.insert(it, std::move(season));
}

const Season* SeasonSet::find(const std::string& region, const std::string& year_label) const {
  for (const auto& s : seasons_) {
    if (s.region == region && s.year_label == year_label) return &s;
  }
  return nullptr;
}

std::vector<std::string> SeasonSet::regions() const {
  std::set<std::string> uniq;
  for (const auto& s : seasons_) uniq.insert(s.region);
  return {uniq.begin(), uniq.end()};
}

SeasonSet SeasonSet::for_region(const std::string& region) const {
  SeasonSet out;
  for (const auto& s : seasons_) {
    if (s.region == region) out.add(s);
  }
  return out;
}

SeasonSet SeasonSet::without(const std::string& region, const std::string& year_label) const {
  SeasonSet out;
  for (const auto& s : seasons_) {
    if (s.region == region && s.year_label == year_label) continue;
    out.add(s);
  }
  return out;
}

SeasonSet SeasonSet::merged_with(const SeasonSet& other) const {
  SeasonSet out = *this;
  for (const auto& s : other.seasons_) out.add(s);
  return out;
}

double SeasonSet::max_value() const {
  double mx = 0.0;
  for (const auto& s : seasons_) {
    for (double v : s.values) mx = std::max(mx, v);
  }
  return mx;
}

void PredictionTask::validate_for(const Season& season) const {
  require(horizon == 1, ErrorKind::Precondition, "only one-week-ahead forecasts are supported");
  require(week_index >= 1 && week_index < season.length(), ErrorKind::Precondition,
          "week index " + std::to_string(week_index) + " not forecastable in season " +
              season.region + " " + season.year_label + " of length " +
              std::to_string(season.length()));
}

DataSplit split(const SeasonSet& data, double test_fraction, double candidate_fraction,
                std::uint64_t seed) {
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorKind::Precondition,
          "test_fraction must lie in (0,1)");
  require(candidate_fraction > 0.0 && candidate_fraction < 1.0, ErrorKind::Precondition,
          "candidate_fraction must lie in (0,1)");
  const int n = data.size();
  require(n >= 4, ErrorKind::Sizing,
          "three-way split needs at least 4 seasons (1 test, 1 candidate, 2 safety), got " +
              std::to_string(n));

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  int n_test = static_cast<int>(std::llround(test_fraction * n));
  n_test = std::max(1, std::min(n_test, n - 3));
  const int remainder = n - n_test;
  const int n_candidate = static_cast<int>(std::floor(candidate_fraction * remainder));
  const int n_safety = remainder - n_candidate;
  require(n_candidate >= 1, ErrorKind::Sizing,
          "candidate_fraction " + std::to_string(candidate_fraction) + " leaves an empty candidate set");
  require(n_safety >= 2, ErrorKind::Sizing,
          "safety set needs at least 2 seasons for a sample variance, got " +
              std::to_string(n_safety));

  DataSplit out;
  out.seed = seed;
  const auto& seasons = data.seasons();
  for (int i = 0; i < n; ++i) {
    const Season& s = seasons[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    if (i < n_test) {
      out.test.add(s);
    } else if (i < n_test + n_candidate) {
      out.candidate.add(s);
    } else {
      out.safety.add(s);
    }
  }
  return out;
}

}  // namespace gf::data
