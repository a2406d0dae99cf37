// gf — guided seasonal epidemic forecasting from the command line.
//
// Subcommands: ingest, synth, direct, auto, evaluate, score-external.
// Exit codes: 0 success, 3 no solution found, 1 error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gf/eval.hpp"
#include "gf/ingest.hpp"
#include "gf/jsonw.hpp"
#include "gf/log.hpp"
#include "gf/modes.hpp"
#include "gf/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNsf = 3;

struct Settings {
  gf::forecaster::ModelArch arch;
  gf::seldonian::SeldonianConfig seldonian;
  gf::modes::SplitParams split;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// --config JSON overrides the built-in defaults; flags override both.
Settings load_settings(const std::string& config_path) {
  Settings s;
  s.seldonian.train.epochs = 150;
  s.seldonian.train.learning_rate = 0.05;
  s.seldonian.train.beta_weight = 0.1;
  if (config_path.empty()) return s;

  std::ifstream in(config_path);
  gf::require(in.good(), gf::ErrorKind::Io, "cannot open config '" + config_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    gf::fail(gf::ErrorKind::Parse, std::string("config JSON: ") + e.what());
  }
  if (j.contains("arch")) {
    const auto& a = j["arch"];
    s.arch.hidden = a.value("hidden", s.arch.hidden);
    s.arch.embedding = a.value("embedding", s.arch.embedding);
    s.arch.neighbors = a.value("neighbors", s.arch.neighbors);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    s.seldonian.train.learning_rate = t.value("learning_rate", s.seldonian.train.learning_rate);
    s.seldonian.train.epochs = t.value("epochs", s.seldonian.train.epochs);
    s.seldonian.train.beta_weight = t.value("beta_weight", s.seldonian.train.beta_weight);
    s.seldonian.train.grad_clip = t.value("grad_clip", s.seldonian.train.grad_clip);
  }
  s.seldonian.lambda = j.value("lambda", s.seldonian.lambda);
  if (j.contains("u_loss") && !j["u_loss"].is_null()) {
    s.seldonian.u_loss = j["u_loss"].get<double>();
  }
  s.seldonian.inflation = j.value("inflation", s.seldonian.inflation);
  s.split.test_fraction = j.value("test_fraction", s.split.test_fraction);
  s.split.candidate_fraction = j.value("candidate_fraction", s.split.candidate_fraction);
  return s;
}

// Guidance flags accept inline JSON or a path to a JSON file.
std::vector<gf::guidance::Guidance> load_guidances(const std::string& text) {
  gf::require(!text.empty(), gf::ErrorKind::Precondition, "--guidance is required");
  std::string body = text;
  if (!text.starts_with('{') && !text.starts_with('[')) {
    std::ifstream in(text);
    gf::require(in.good(), gf::ErrorKind::Io, "cannot open guidance file '" + text + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    body = buffer.str();
  }
  return gf::guidance::parse_guidances(body);
}

gf::data::SeasonSet load_data(const std::string& path, const std::vector<std::string>& regions) {
  gf::require(!path.empty(), gf::ErrorKind::Precondition, "--data is required");
  std::optional<std::set<std::string>> filter;
  if (!regions.empty()) filter = std::set<std::string>(regions.begin(), regions.end());
  const auto set = gf::data::ingest_wili(path, filter);
  gf::require(!set.empty(), gf::ErrorKind::Sizing, "no seasons ingested from '" + path + "'");
  return set;
}

// Week flags use epidemiological week numbers and name the week at which the
// forecast is made; the target is the following week. A "40:17" sweep covers
// the standard season, minus its final week which has no in-season target.
std::vector<int> task_weeks_from_range(const std::string& range) {
  const auto colon = range.find(':');
  gf::require(colon != std::string::npos, gf::ErrorKind::Parse,
              "--weeks expects START:END epi weeks, e.g. 40:17");
  gf::data::Season probe;
  probe.region = "probe";
  probe.year_label = "0/01";
  probe.values.assign(gf::data::kStandardSeasonLength, 0.0);
  const int from = std::stoi(range.substr(0, colon));
  const int to = std::stoi(range.substr(colon + 1));
  const int i_from = probe.index_of_epi_week(from);
  const int i_to = probe.index_of_epi_week(to);
  gf::require(i_from >= 0 && i_to >= 0 && i_from <= i_to, gf::ErrorKind::Parse,
              "--weeks range '" + range + "' does not lie inside one season");
  std::vector<int> weeks;
  for (int i = i_from; i <= i_to; ++i) {
    const int task_week = i + 1;
    if (task_week < gf::data::kStandardSeasonLength) weeks.push_back(task_week);
  }
  gf::require(!weeks.empty(), gf::ErrorKind::Parse, "--weeks range contains no forecastable week");
  return weeks;
}

int task_week_from_epi(int epi_week) {
  gf::data::Season probe;
  probe.region = "probe";
  probe.year_label = "0/01";
  probe.values.assign(gf::data::kStandardSeasonLength, 0.0);
  const int index = probe.index_of_epi_week(epi_week);
  gf::require(index >= 0 && index + 1 < gf::data::kStandardSeasonLength, gf::ErrorKind::Parse,
              "week " + std::to_string(epi_week) + " has no in-season target week");
  return index + 1;
}

void write_text(const std::string& path, const std::string& body) {
  if (path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  gf::require(out.good(), gf::ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << body;
  out.flush();
  gf::require(out.good(), gf::ErrorKind::Io, "failed writing '" + path + "'");
}

void metadata_json(gf::jsonw::Writer& w, const Settings& s,
                   const std::vector<std::string>& regions) {
  w.begin_object();
  w.key("arch");
  w.begin_object();
  w.key("embedding"); w.integer(s.arch.embedding);
  w.key("hidden"); w.integer(s.arch.hidden);
  w.key("neighbors"); w.integer(s.arch.neighbors);
  w.end_object();
  w.key("candidate_fraction"); w.number(s.split.candidate_fraction);
  w.key("epochs"); w.integer(s.seldonian.train.epochs);
  w.key("inflation"); w.number(s.seldonian.inflation);
  w.key("lambda"); w.number(s.seldonian.lambda);
  w.key("notes");
  w.begin_array();
  w.string("historical context: training seasons excluding the forecast season");
  w.string("penalty branch follows the worst violating predicted bound");
  w.string(regions.empty() ? "regions: all ingested regions pooled for training"
                           : "regions: filtered before training");
  w.string("weekly sweeps share one split drawn from the base seed");
  w.end_array();
  w.key("seed"); w.integer(static_cast<long long>(s.seed));
  w.key("test_fraction"); w.number(s.split.test_fraction);
  w.end_object();
}

void outcome_json(gf::jsonw::Writer& w, const gf::seldonian::RunOutcome& outcome,
                  const std::string& model_path) {
  w.begin_object();
  w.key("candidate_bound");
  outcome.candidate_bound ? w.number(*outcome.candidate_bound) : w.null();
  w.key("feedback");
  w.begin_array();
  for (const auto& fb : outcome.feedback) {
    w.begin_object();
    w.key("bound"); w.number(fb.bound);
    w.key("epsilon"); w.number(fb.epsilon);
    w.key("guidance"); w.string(fb.guidance);
    w.key("margin"); w.number(fb.margin);
    w.key("suggestions");
    w.begin_array();
    for (const auto& sg : fb.suggestions) w.string(sg);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  if (outcome.certified() && !model_path.empty()) {
    w.key("model_path");
    w.string(model_path);
  }
  w.key("safety_bound");
  outcome.safety_bound ? w.number(*outcome.safety_bound) : w.null();
  w.key("status");
  w.string(outcome.certified() ? "certified" : "nsf");
  w.end_object();
}

void auto_json(gf::jsonw::Writer& w, const gf::modes::AutoOutcome& outcome) {
  w.begin_object();
  w.key("baseline_rmse"); w.number(outcome.baseline_rmse);
  w.key("epsilon");
  outcome.epsilon ? w.number(*outcome.epsilon) : w.null();
  w.key("run");
  if (outcome.run) {
    outcome_json(w, *outcome.run, "");
  } else {
    w.null();
  }
  w.key("status");
  w.string(outcome.found() ? "found" : "nsf");
  w.key("trace");
  w.begin_array();
  for (const auto& entry : outcome.trace) {
    w.begin_object();
    w.key("certified"); w.boolean(entry.certified);
    w.key("epsilon"); w.number(entry.epsilon);
    w.key("rmse_ratio"); w.number(entry.rmse_ratio);
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

int run_ingest(const std::string& data_path, const std::vector<std::string>& regions,
               const std::string& out_path) {
  const auto set = load_data(data_path, regions);
  std::cout << "seasons: " << set.size() << "\n";
  std::cout << "regions:";
  for (const auto& r : set.regions()) std::cout << ' ' << r;
  std::cout << "\n";
  if (!out_path.empty()) gf::data::write_wili(set, out_path);
  return kExitOk;
}

int run_synth(const gf::data::SynthParams& params, const std::string& out_path) {
  const auto set = gf::data::synth_seasons(params);
  gf::require(!out_path.empty(), gf::ErrorKind::Precondition, "--out is required");
  gf::data::write_wili(set, out_path);
  std::cout << "wrote " << set.size() << " seasons to " << out_path << "\n";
  return kExitOk;
}

int run_direct(const Settings& settings, const gf::data::SeasonSet& data,
               const std::vector<gf::guidance::Guidance>& guidances,
               const std::vector<std::string>& regions, const std::vector<int>& weeks,
               const std::string& report_path, const std::string& model_path) {
  gf::jsonw::Writer w;
  int exit_code = kExitNsf;

  if (weeks.size() == 1) {
    const gf::data::PredictionTask task{weeks.front(), 1};
    const auto outcome = gf::modes::direct_guidance(data, guidances, settings.seldonian, task,
                                                    settings.split, settings.arch, settings.seed);
    if (outcome.certified()) {
      exit_code = kExitOk;
      if (!model_path.empty()) gf::forecaster::save_model(*outcome.model, model_path);
    }
    w.begin_object();
    w.key("metadata");
    metadata_json(w, settings, regions);
    w.key("mode"); w.string("direct");
    w.key("outcome");
    outcome_json(w, outcome, model_path);
    w.key("week"); w.integer(weeks.front());
    w.end_object();
  } else {
    const auto sweep =
        gf::modes::weekly_sweep_direct(data, guidances, settings.seldonian, weeks, settings.split,
                                       settings.arch, settings.seed, settings.jobs);
    int certified = 0;
    w.begin_object();
    w.key("metadata");
    metadata_json(w, settings, regions);
    w.key("mode"); w.string("direct-sweep");
    w.key("weeks");
    w.begin_array();
    for (const auto& week : sweep.weeks) {
      w.begin_object();
      w.key("error");
      week.error.empty() ? w.null() : w.string(week.error);
      w.key("outcome");
      if (week.outcome) {
        outcome_json(w, *week.outcome, "");
        if (week.outcome->certified()) ++certified;
      } else {
        w.null();
      }
      w.key("week"); w.integer(week.week);
      w.end_object();
    }
    w.end_array();
    w.end_object();
    if (certified > 0) exit_code = kExitOk;
  }

  write_text(report_path, w.str() + "\n");
  return exit_code;
}

int run_auto(const Settings& settings, const gf::data::SeasonSet& data,
             const gf::modes::AutoGuidanceSpec& spec, const std::vector<std::string>& regions,
             const std::vector<int>& weeks, const std::string& report_path,
             const std::string& model_path) {
  gf::jsonw::Writer w;
  int exit_code = kExitNsf;

  if (weeks.size() == 1) {
    const gf::data::PredictionTask task{weeks.front(), 1};
    const auto outcome = gf::modes::automatic_guidance(data, spec, settings.seldonian, task,
                                                       settings.split, settings.arch,
                                                       settings.seed);
    if (outcome.found()) {
      exit_code = kExitOk;
      if (!model_path.empty()) gf::forecaster::save_model(*outcome.model, model_path);
    }
    w.begin_object();
    w.key("metadata");
    metadata_json(w, settings, regions);
    w.key("mode"); w.string("auto");
    w.key("outcome");
    auto_json(w, outcome);
    w.key("week"); w.integer(weeks.front());
    w.end_object();
  } else {
    const auto sweep = gf::modes::weekly_sweep_auto(data, spec, settings.seldonian, weeks,
                                                    settings.split, settings.arch, settings.seed,
                                                    settings.jobs);
    int found = 0;
    w.begin_object();
    w.key("metadata");
    metadata_json(w, settings, regions);
    w.key("mode"); w.string("auto-sweep");
    w.key("weeks");
    w.begin_array();
    for (const auto& week : sweep.weeks) {
      w.begin_object();
      w.key("error");
      week.error.empty() ? w.null() : w.string(week.error);
      w.key("outcome");
      if (week.outcome) {
        auto_json(w, *week.outcome);
        if (week.outcome->found()) ++found;
      } else {
        w.null();
      }
      w.key("week"); w.integer(week.week);
      w.end_object();
    }
    w.end_array();
    w.end_object();
    if (found > 0) exit_code = kExitOk;
  }

  write_text(report_path, w.str() + "\n");
  return exit_code;
}

int run_evaluate(const Settings& settings, const gf::data::SeasonSet& data,
                 const std::vector<gf::guidance::Guidance>& guidances,
                 const std::vector<int>& weeks, const std::string& report_path,
                 gf::eval::ReportFormat format) {
  gf::require(guidances.size() == 1, gf::ErrorKind::Precondition,
              "evaluate scores exactly one guidance");
  const auto sweep =
      gf::modes::weekly_sweep_direct(data, guidances, settings.seldonian, weeks, settings.split,
                                     settings.arch, settings.seed, settings.jobs);
  const auto baselines = gf::modes::baseline_sweep(sweep.split, settings.seldonian, weeks,
                                                   settings.arch, settings.seed, settings.jobs);
  const auto report = gf::eval::evaluate(sweep.weeks, baselines, sweep.split.test, guidances[0],
                                         sweep.split.training());
  if (report_path.empty()) {
    std::cout << (format == gf::eval::ReportFormat::Json ? gf::eval::report_json(report)
                                                         : gf::eval::report_csv(report));
  } else {
    gf::eval::emit_report(report, report_path, format);
  }
  return kExitOk;
}

int run_score_external(const std::string& forecasts_path, const gf::data::SeasonSet& truth,
                       const std::vector<gf::guidance::Guidance>& guidances, int eval_year,
                       int eval_week, const std::string& report_path) {
  gf::require(guidances.size() == 1, gf::ErrorKind::Precondition,
              "score-external uses exactly one guidance");
  const auto forecasts = gf::eval::read_external_csv(forecasts_path);
  const auto scores =
      gf::eval::score_external(forecasts, truth, guidances[0], eval_year, eval_week);
  write_text(report_path, gf::eval::scores_json(scores));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guided seasonal epidemic forecasting with safety-tested constraints"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  app.add_option("--config", config_path, "JSON file with architecture/training settings");
  app.add_option("--seed", seed, "base random seed")->capture_default_str();
  app.add_option("--jobs", jobs, "parallel week workers")->capture_default_str();

  std::string data_path, guidance_text, report_path, model_path, weeks_range, out_path;
  std::string forecasts_path, format_name = "json";
  std::vector<std::string> regions;
  int week_flag = -1;
  int eval_year = 0, eval_week = 0;
  double requirement = 1.0;
  std::vector<double> epsilon_grid{0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};

  auto add_data_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", data_path, "wILI CSV (region,year,week,wili)")->required();
    cmd->add_option("--region", regions, "keep only these regions");
  };
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--guidance", guidance_text, "guidance JSON (inline or a file path)")
        ->required();
    cmd->add_option("--week", week_flag, "epi week at which the forecast is made");
    cmd->add_option("--weeks", weeks_range, "epi week range to sweep, e.g. 40:17");
    cmd->add_option("--report", report_path, "write the JSON report here (default: stdout)");
  };

  auto* ingest = app.add_subcommand("ingest", "validate and summarize a wILI CSV");
  add_data_flags(ingest);
  ingest->add_option("--out", out_path, "re-emit the ingested seasons to this CSV");

  auto* synth = app.add_subcommand("synth", "generate synthetic surveillance seasons");
  gf::data::SynthParams synth_params;
  synth->add_option("--n", synth_params.count, "number of seasons")->required();
  int dip_week = -1;
  synth->add_option("--dip-week", dip_week, "week index (0-based) of the reporting dip");
  synth->add_option("--dip-depth", synth_params.dip_depth, "relative depth of the dip");
  synth->add_option("--noise-sd", synth_params.noise_sd, "additive noise level");
  synth->add_option("--synth-region", synth_params.region, "region id for the seasons");
  synth->add_option("--first-year", synth_params.first_year, "start year of the first season");
  synth->add_option("--out", out_path, "output CSV path")->required();

  auto* direct = app.add_subcommand("direct", "direct guidance: all knobs supplied");
  add_data_flags(direct);
  add_run_flags(direct);
  direct->add_option("--save-model", model_path, "write the certified checkpoint here");

  auto* auto_cmd = app.add_subcommand("auto", "automatic guidance: search epsilon");
  add_data_flags(auto_cmd);
  add_run_flags(auto_cmd);
  auto_cmd->add_option("--epsilon-grid", epsilon_grid, "ascending epsilon values to try")
      ->delimiter(',');
  auto_cmd->add_option("--requirement", requirement,
                       "max allowed guided/unconstrained RMSE ratio")
      ->capture_default_str();
  auto_cmd->add_option("--save-model", model_path, "write the found checkpoint here");

  auto* evaluate = app.add_subcommand("evaluate", "weekly failure-rate report on the test set");
  add_data_flags(evaluate);
  add_run_flags(evaluate);
  evaluate->add_option("--format", format_name, "json or csv")->capture_default_str();

  auto* score = app.add_subcommand("score-external", "score external forecast submissions");
  add_data_flags(score);
  score->add_option("--forecasts", forecasts_path, "CSV: team,region,year,week,value")
      ->required();
  score->add_option("--guidance", guidance_text, "guidance JSON (inline or a file path)")
      ->required();
  score->add_option("--eval-year", eval_year, "calendar year of the scored week")->required();
  score->add_option("--eval-week", eval_week, "epi week of the scored week")->required();
  score->add_option("--report", report_path, "write the JSON report here (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    Settings settings = load_settings(config_path);
    settings.seed = seed;
    settings.jobs = jobs;

    if (ingest->parsed()) return run_ingest(data_path, regions, out_path);
    if (synth->parsed()) {
      if (dip_week >= 0) synth_params.dip_week = dip_week;
      synth_params.seed = seed;
      return run_synth(synth_params, out_path);
    }

    std::vector<int> weeks;
    if (!weeks_range.empty()) {
      weeks = task_weeks_from_range(weeks_range);
    } else if (week_flag >= 0) {
      weeks = {task_week_from_epi(week_flag)};
    }

    if (direct->parsed() || auto_cmd->parsed() || evaluate->parsed()) {
      gf::require(!weeks.empty(), gf::ErrorKind::Precondition,
                  "either --week or --weeks is required");
    }

    if (direct->parsed()) {
      const auto data = load_data(data_path, regions);
      const auto guidances = load_guidances(guidance_text);
      for (const auto& g : guidances) g.validate();
      return run_direct(settings, data, guidances, regions, weeks, report_path, model_path);
    }
    if (auto_cmd->parsed()) {
      const auto data = load_data(data_path, regions);
      const auto guidances = load_guidances(guidance_text);
      gf::require(guidances.size() == 1, gf::ErrorKind::Precondition,
                  "automatic mode searches one guidance");
      gf::modes::AutoGuidanceSpec spec;
      spec.base = guidances[0];
      spec.epsilon_grid = epsilon_grid;
      spec.performance_requirement = requirement;
      return run_auto(settings, data, spec, regions, weeks, report_path, model_path);
    }
    if (evaluate->parsed()) {
      const auto data = load_data(data_path, regions);
      const auto guidances = load_guidances(guidance_text);
      for (const auto& g : guidances) g.validate();
      const auto format = format_name == "csv" ? gf::eval::ReportFormat::Csv
                                               : gf::eval::ReportFormat::Json;
      return run_evaluate(settings, data, guidances, weeks, report_path, format);
    }
    if (score->parsed()) {
      const auto truth = load_data(data_path, regions);
      const auto guidances = load_guidances(guidance_text);
      for (const auto& g : guidances) g.validate();
      return run_score_external(forecasts_path, truth, guidances, eval_year, eval_week,
                                report_path);
    }
  } catch (const gf::Error& e) {
    std::cerr << "gf: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "gf: unexpected: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
