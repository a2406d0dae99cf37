#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gf/error.hpp"

namespace gf::data {

// Number of weekly entries in a standard flu season (epi weeks 40..17).
inline constexpr int kStandardSeasonLength = 30;

// One region-season of weekly wILI values aligned to the epidemiological
// year: index 0 is week 40, the last index is week 17 of the following
// calendar year. Length 31 marks a season containing week 53. Short
// sequences are allowed for in-memory fixtures; file ingestion and emission
// enforce full alignment.
struct Season {
  std::string region;
  std::string year_label;      // e.g. "2015/16"
  std::vector<double> values;  // raw wILI percentages, all >= 0

  int length() const { return static_cast<int>(values.size()); }
  bool has_week53() const { return values.size() == 31; }

  // Week index -> epidemiological week number.
  int epi_week(int index) const;
  // Epidemiological week number -> week index, or -1 when not in season.
  int index_of_epi_week(int epi_week) const;

  void validate() const;            // non-empty, non-negative values
  void validate_alignment() const;  // additionally: length in {30, 31}

  friend bool operator==(const Season&, const Season&) = default;
};

// "2015/16" for start year 2015.
std::string season_label(int start_year);
// Calendar year owning a (year, epi week) row: weeks >= 40 start a season,
// weeks <= 17 belong to the season started the year before.
int season_start_year(int calendar_year, int epi_week);

// Seasons kept sorted by (region, year_label) with no duplicates.
class SeasonSet {
 public:
  SeasonSet() = default;
  explicit SeasonSet(std::vector<Season> seasons);

  void add(Season season);

  const std::vector<Season>& seasons() const { return seasons_; }
  bool empty() const { return seasons_.empty(); }
  int size() const { return static_cast<int>(seasons_.size()); }

  const Season* find(const std::string& region, const std::string& year_label) const;
  std::vector<std::string> regions() const;
  SeasonSet for_region(const std::string& region) const;
  SeasonSet without(const std::string& region, const std::string& year_label) const;
  SeasonSet merged_with(const SeasonSet& other) const;
  double max_value() const;

  friend bool operator==(const SeasonSet&, const SeasonSet&) = default;

 private:
  std::vector<Season> seasons_;
};

// Partition of seasons into the candidate set D_c, the safety set D_s and
// the held-out test set.
struct DataSplit {
  SeasonSet candidate;
  SeasonSet safety;
  SeasonSet test;
  std::uint64_t seed = 0;

  SeasonSet training() const { return candidate.merged_with(safety); }
};

// Forecast target position inside a season: the first `week_index` values
// are observed and values[week_index] is the target (one-week horizon).
struct PredictionTask {
  int week_index = 1;
  int horizon = 1;

  void validate_for(const Season& season) const;
};

// Deterministic shuffle split. The test set gets round(test_fraction * n)
// seasons (at least one); the remainder divides into candidate
// (floor(candidate_fraction * remainder)) and safety sets.
DataSplit split(const SeasonSet& data, double test_fraction, double candidate_fraction,
                std::uint64_t seed);

}  // namespace gf::data
