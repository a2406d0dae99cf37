#include "gf/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gf/jsonw.hpp"

namespace gf::eval {

EvalReport evaluate(const std::vector<modes::DirectWeekResult>& outcomes,
                    const std::vector<modes::BaselineWeek>& baselines,
                    const data::SeasonSet& test, const guidance::Guidance& guidance,
                    const data::SeasonSet& historical) {
  require(!outcomes.empty(), ErrorKind::Precondition, "evaluate needs at least one week outcome");
  require(outcomes.size() == baselines.size(), ErrorKind::Alignment,
          "guided and baseline sweeps cover different numbers of weeks");
  require(!test.empty(), ErrorKind::Precondition, "test set is empty");

  EvalReport report;
  double ratio_sum = 0.0;
  int ratio_count = 0;

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& guided = outcomes[i];
    const auto& baseline = baselines[i];
    require(guided.week == baseline.week, ErrorKind::Alignment,
            "week mismatch between guided sweep (" + std::to_string(guided.week) +
                ") and baseline (" + std::to_string(baseline.week) + ")");

    WeekRow row;
    row.week = guided.week;
    row.delta = guidance.delta;
    const data::PredictionTask task{guided.week, 1};

    if (!baseline.error.empty()) {
      row.status = "error: " + baseline.error;
      report.per_week.push_back(std::move(row));
      continue;
    }
    if (baseline.model) {
      const auto z_base =
          guidance::collect_z(*baseline.model, guidance, test, task, historical);
      row.failure_rate_unconstrained = guidance::failure_rate(z_base, guidance.epsilon);
      row.rmse_unconstrained = forecaster::rmse_at_week(*baseline.model, test, task, historical);
    }

    if (!guided.error.empty()) {
      row.status = "error: " + guided.error;
    } else if (guided.outcome && guided.outcome->certified()) {
      const auto& model = *guided.outcome->model;
      const auto z_guided = guidance::collect_z(model, guidance, test, task, historical);
      row.failure_rate_guided = guidance::failure_rate(z_guided, guidance.epsilon);
      row.rmse_guided = forecaster::rmse_at_week(model, test, task, historical);
      row.status = "certified";
      if (row.failure_rate_guided > guidance.delta) ++report.summary.weeks_violating_delta;
      if (std::isfinite(row.rmse_unconstrained) && row.rmse_unconstrained > 0.0) {
        ratio_sum += row.rmse_guided / row.rmse_unconstrained;
        ++ratio_count;
      }
    } else {
      row.status = "nsf";
    }
    report.per_week.push_back(std::move(row));
  }

  report.summary.weeks_total = static_cast<int>(report.per_week.size());
  if (ratio_count > 0) report.summary.mean_rmse_ratio = ratio_sum / ratio_count;
  return report;
}

std::vector<ExternalForecast> read_external_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open '" + path + "'");

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Parse,
          "empty file, expected header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "team,region,year,week,value", ErrorKind::Parse,
          "line 1: expected header 'team,region,year,week,value', got '" + line + "'");

  std::map<std::string, ExternalForecast> teams;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string team, region, year_s, week_s, value_s;
    const bool ok = static_cast<bool>(std::getline(ss, team, ',')) &&
                    static_cast<bool>(std::getline(ss, region, ',')) &&
                    static_cast<bool>(std::getline(ss, year_s, ',')) &&
                    static_cast<bool>(std::getline(ss, week_s, ',')) &&
                    static_cast<bool>(std::getline(ss, value_s));
    require(ok && !team.empty() && !region.empty(), ErrorKind::Parse,
            "line " + std::to_string(line_no) + ": expected 5 fields");
    ExternalForecast::Entry entry;
    entry.region = region;
    try {
      entry.year = std::stoi(year_s);
      entry.week = std::stoi(week_s);
      entry.value = std::stod(value_s);
    } catch (const std::exception&) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad numeric field");
    }
    require(std::isfinite(entry.value), ErrorKind::Validation,
            "line " + std::to_string(line_no) + ": non-finite forecast value");
    auto& team_entry = teams[team];
    team_entry.team_id = team;
    team_entry.predictions.push_back(std::move(entry));
  }

  std::vector<ExternalForecast> out;
  out.reserve(teams.size());
  for (auto& [_, fc] : teams) out.push_back(std::move(fc));
  return out;
}

std::vector<TeamScore> score_external(const std::vector<ExternalForecast>& forecasts,
                                      const data::SeasonSet& truth,
                                      const guidance::Guidance& guidance, int eval_year,
                                      int eval_week) {
  require(!forecasts.empty(), ErrorKind::Precondition, "no forecasts to score");
  require(eval_week >= 1 && eval_week <= 53, ErrorKind::Precondition,
          "eval week must lie in 1..53");

  const std::string label =
      data::season_label(data::season_start_year(eval_year, eval_week));

  // Regions with truth available at the evaluation week and its predecessor.
  struct RegionTruth {
    std::string region;
    double value;
    double previous;
  };
  std::vector<RegionTruth> region_truth;
  for (const auto& season : truth.seasons()) {
    if (season.year_label != label) continue;
    const int idx = season.index_of_epi_week(eval_week);
    if (idx < 1) continue;
    region_truth.push_back({season.region,
                            season.values[static_cast<std::size_t>(idx)],
                            season.values[static_cast<std::size_t>(idx - 1)]});
  }
  require(!region_truth.empty(), ErrorKind::Precondition,
          "truth has no season covering year " + std::to_string(eval_year) + " week " +
              std::to_string(eval_week));

  std::vector<TeamScore> scores;
  scores.reserve(forecasts.size());
  for (const auto& team : forecasts) {
    TeamScore score;
    score.team_id = team.team_id;

    std::map<std::string, double> errors;  // per covered region
    double sq = 0.0;
    double z_sum = 0.0;
    for (const auto& rt : region_truth) {
      const ExternalForecast::Entry* hit = nullptr;
      for (const auto& p : team.predictions) {
        if (p.region == rt.region && p.year == eval_year && p.week == eval_week) {
          hit = &p;
          break;
        }
      }
      if (hit == nullptr) {
        score.gaps.push_back(rt.region);
        continue;
      }
      const double err = hit->value - rt.value;
      sq += err * err;
      z_sum += std::fabs(hit->value - rt.previous);
      errors[rt.region] = std::fabs(err);
      ++score.regions_scored;
    }

    if (score.regions_scored > 0) {
      score.rmse = std::sqrt(sq / score.regions_scored);
      if (guidance.kind == guidance::GuidanceKind::Smoothness) {
        score.z_value = z_sum / score.regions_scored;
      } else {
        const auto first = errors.find(guidance.region_pair.first);
        const auto second = errors.find(guidance.region_pair.second);
        if (first != errors.end() && second != errors.end()) {
          score.z_value = std::fabs(first->second - second->second);
        } else {
          if (first == errors.end()) score.gaps.push_back(guidance.region_pair.first);
          if (second == errors.end()) score.gaps.push_back(guidance.region_pair.second);
        }
      }
    }
    scores.push_back(std::move(score));
  }
  return scores;
}

static void week_row_json(jsonw::Writer& w, const WeekRow& row) {
  w.begin_object();
  w.key("delta"); w.number(row.delta);
  w.key("failure_rate_guided"); w.number(row.failure_rate_guided);
  w.key("failure_rate_unconstrained"); w.number(row.failure_rate_unconstrained);
  w.key("rmse_guided"); w.number(row.rmse_guided);
  w.key("rmse_unconstrained"); w.number(row.rmse_unconstrained);
  w.key("status"); w.string(row.status);
  w.key("week"); w.integer(row.week);
  w.end_object();
}

std::string report_json(const EvalReport& report) {
  jsonw::Writer w;
  w.begin_object();
  w.key("per_week");
  w.begin_array();
  for (const auto& row : report.per_week) week_row_json(w, row);
  w.end_array();
  w.key("summary");
  w.begin_object();
  w.key("mean_rmse_ratio"); w.number(report.summary.mean_rmse_ratio);
  w.key("weeks_total"); w.integer(report.summary.weeks_total);
  w.key("weeks_violating_delta"); w.integer(report.summary.weeks_violating_delta);
  w.end_object();
  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

static void csv_number(std::string& out, double v) {
  if (!std::isfinite(v)) return;  // empty cell
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out += buf;
}

std::string report_csv(const EvalReport& report) {
  std::string out =
      "week,failure_rate_guided,failure_rate_unconstrained,delta,rmse_guided,"
      "rmse_unconstrained,status\n";
  for (const auto& row : report.per_week) {
    out += std::to_string(row.week);
    out += ',';
    csv_number(out, row.failure_rate_guided);
    out += ',';
    csv_number(out, row.failure_rate_unconstrained);
    out += ',';
    csv_number(out, row.delta);
    out += ',';
    csv_number(out, row.rmse_guided);
    out += ',';
    csv_number(out, row.rmse_unconstrained);
    out += ',';
    out += row.status;
    out += '\n';
  }
  return out;
}

void emit_report(const EvalReport& report, const std::string& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << (format == ReportFormat::Json ? report_json(report) : report_csv(report));
  out.flush();
  require(out.good(), ErrorKind::Io, "failed writing '" + path + "'");
}

std::string scores_json(const std::vector<TeamScore>& scores) {
  jsonw::Writer w;
  w.begin_object();
  w.key("teams");
  w.begin_array();
  for (const auto& s : scores) {
    w.begin_object();
    w.key("gaps");
    w.begin_array();
    for (const auto& g : s.gaps) w.string(g);
    w.end_array();
    w.key("regions_scored"); w.integer(s.regions_scored);
    w.key("rmse"); w.number(s.rmse);
    w.key("team"); w.string(s.team_id);
    w.key("z"); w.number(s.z_value);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

}  // namespace gf::eval
