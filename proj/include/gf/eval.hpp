#pragma once

#include <string>
#include <vector>

#include "gf/modes.hpp"

namespace gf::eval {

// One row of the per-week evaluation table. NaN marks quantities that do not
// exist for the row (e.g. guided metrics on an NSF week).
struct WeekRow {
  int week = 0;
  double failure_rate_guided = std::numeric_limits<double>::quiet_NaN();
  double failure_rate_unconstrained = std::numeric_limits<double>::quiet_NaN();
  double delta = 0.0;
  double rmse_guided = std::numeric_limits<double>::quiet_NaN();
  double rmse_unconstrained = std::numeric_limits<double>::quiet_NaN();
  std::string status;  // "certified", "nsf" or "error: ..."
};

struct EvalSummary {
  double mean_rmse_ratio = std::numeric_limits<double>::quiet_NaN();
  int weeks_violating_delta = 0;
  int weeks_total = 0;
};

struct EvalReport {
  std::vector<WeekRow> per_week;
  EvalSummary summary;
};

// Test-set evaluation of a guided sweep against its unconstrained baseline:
// per certified week, the failure rate and RMSE of both models on the test
// seasons. NSF weeks are reported but excluded from the failure-rate and
// ratio aggregates.
EvalReport evaluate(const std::vector<modes::DirectWeekResult>& outcomes,
                    const std::vector<modes::BaselineWeek>& baselines,
                    const data::SeasonSet& test, const guidance::Guidance& guidance,
                    const data::SeasonSet& historical);

// Externally supplied forecasts, e.g. archived challenge submissions.
// CSV schema: team,region,year,week,value.
struct ExternalForecast {
  struct Entry {
    std::string region;
    int year = 0;
    int week = 0;
    double value = 0.0;
  };
  std::string team_id;
  std::vector<Entry> predictions;
};

std::vector<ExternalForecast> read_external_csv(const std::string& path);

struct TeamScore {
  std::string team_id;
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double z_value = std::numeric_limits<double>::quiet_NaN();
  int regions_scored = 0;
  std::vector<std::string> gaps;  // regions with no prediction at the week
};

// Scores each team's forecast for one (year, epi week) against the truth:
// RMSE across regions plus the guidance deviation value.
std::vector<TeamScore> score_external(const std::vector<ExternalForecast>& forecasts,
                                      const data::SeasonSet& truth,
                                      const guidance::Guidance& guidance, int eval_year,
                                      int eval_week);

enum class ReportFormat { Json, Csv };

// Byte-stable serialization: sorted keys, fixed six-decimal reals. The CSV
// format carries the per-week table; JSON carries the whole report.
std::string report_json(const EvalReport& report);
std::string report_csv(const EvalReport& report);
void emit_report(const EvalReport& report, const std::string& path, ReportFormat format);

std::string scores_json(const std::vector<TeamScore>& scores);

}  // namespace gf::eval
