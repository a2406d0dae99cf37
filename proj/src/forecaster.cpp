#include "gf/forecaster.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "gf/rng.hpp"

namespace gf::forecaster {

HistoricalContext summarize(const data::SeasonSet& historical, double normalizer) {
  require(normalizer > 0.0, ErrorKind::Precondition, "normalizer must be positive");
  // Order by (year_label, region) for deterministic tie-breaking.
  std::vector<const data::Season*> order;
  order.reserve(historical.seasons().size());
  for (const auto& s : historical.seasons()) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const data::Season* a, const data::Season* b) {
    return std::tie(a->year_label, a->region) < std::tie(b->year_label, b->region);
  });

  HistoricalContext ctx;
  ctx.stats.reserve(order.size());
  ctx.keys.reserve(order.size());
  std::vector<double> norm;
  for (const auto* s : order) {
    norm.resize(s->values.size());
    for (std::size_t i = 0; i < s->values.size(); ++i) norm[i] = s->values[i] / normalizer;
    ctx.stats.push_back(series_stats(norm));
    ctx.keys.emplace_back(s->year_label, s->region);
  }
  return ctx;
}

ForecastModel init_model(const ModelArch& arch, std::uint64_t seed, double normalizer) {
  arch.validate();
  require(normalizer > 0.0, ErrorKind::Precondition, "normalizer must be positive");
  const int h = arch.hidden;
  const int d = arch.embedding;

  ForecastModel model;
  model.arch = arch;
  model.normalizer = normalizer;
  model.theta.reserve(static_cast<std::size_t>(parameter_count(arch)));

  Rng rng(seed);
  auto fill = [&](int count, double half_width) {
    for (int i = 0; i < count; ++i) model.theta.push_back(rng.uniform(-half_width, half_width));
  };
  // Half-width 1/sqrt(fan-in) per block.
  fill(h, 1.0);                                  // w_in, scalar input
  fill(h * h, 1.0 / std::sqrt(double(h)));       // u_rec
  fill(h, 1.0 / std::sqrt(double(h)));           // b_rec
  fill(d * 4, 0.5);                              // hist_map, 4 statistics
  fill(d, 0.5);                                  // hist_bias
  fill(d * 4, 0.5);                              // cur_map
  fill(d, 0.5);                                  // cur_bias
  fill(h + d, 1.0 / std::sqrt(double(h + d)));   // w_out
  fill(1, 1.0 / std::sqrt(double(h + d)));       // b_out
  model.validate();
  return model;
}

Prediction forward(const ForecastModel& model, const data::Season& season,
                   const data::PredictionTask& task, const data::SeasonSet& historical) {
  model.validate();
  require(!historical.empty(), ErrorKind::Precondition, "historical season set is empty");
  const HistoricalContext ctx = summarize(historical, model.normalizer);
  const auto out = detail::forward_for_season<double>(model.theta, model.arch, model.normalizer,
                                                      season, task, ctx);
  Prediction p;
  p.value = out.y_norm * model.normalizer;
  p.week_index = task.week_index;
  p.region = season.region;
  p.year_label = season.year_label;
  require(std::isfinite(p.value), ErrorKind::Divergence,
          "non-finite prediction for " + season.region + " " + season.year_label);
  return p;
}

double task_loss(const ForecastModel& model, const data::SeasonSet& part,
                 const data::PredictionTask& task, const data::SeasonSet& historical,
                 double beta_weight) {
  model.validate();
  const HistoricalContext ctx = summarize(historical, model.normalizer);
  return detail::task_loss_core<double>(model.theta, model.arch, model.normalizer, part, task,
                                        ctx, beta_weight);
}

TapedLoss taped_task_loss(const ForecastModel& model, const data::SeasonSet& part,
                          const data::PredictionTask& task, const data::SeasonSet& historical,
                          double beta_weight) {
  const ModelArch arch = model.arch;
  const double normalizer = model.normalizer;
  const HistoricalContext ctx = summarize(historical, model.normalizer);
  return [arch, normalizer, part, task, ctx, beta_weight](
             ad::Tape&, std::span<const ad::Value> theta) {
    return detail::task_loss_core<ad::Value>(theta, arch, normalizer, part, task, ctx,
                                             beta_weight);
  };
}

std::pair<double, std::vector<double>> loss_and_grad(const ForecastModel& model,
                                                     const TapedLoss& loss_fn) {
  model.validate();
  ad::Tape tape;
  const std::vector<ad::Value> theta = tape.inputs(model.theta);
  const ad::Value loss = loss_fn(tape, theta);
  require(std::isfinite(loss.value()), ErrorKind::Divergence, "loss is not finite");
  return {loss.value(), tape.gradient(loss, theta)};
}

std::vector<double> grad(const ForecastModel& model, const TapedLoss& loss_fn) {
  return loss_and_grad(model, loss_fn).second;
}

ForecastModel train_step(const ForecastModel& model, const TapedLoss& loss_fn,
                         const TrainConfig& config) {
  config.validate();
  const auto g = grad(model, loss_fn);
  ForecastModel next = model;
  for (std::size_t i = 0; i < next.theta.size(); ++i) {
    const double clipped = std::clamp(g[i], -config.grad_clip, config.grad_clip);
    next.theta[i] -= config.learning_rate * clipped;
  }
  return next;
}

FitResult fit(const ForecastModel& start, const TapedLoss& loss_fn, const TrainConfig& config) {
  config.validate();
  start.validate();

  FitResult result;
  result.model = start;
  result.best_loss = std::numeric_limits<double>::infinity();
  ForecastModel current = start;

  ad::Tape tape;
  for (int epoch = 0; epoch <= config.epochs; ++epoch) {
    tape.clear();
    const std::vector<ad::Value> theta = tape.inputs(current.theta);
    ad::Value loss;
    try {
      loss = loss_fn(tape, theta);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Divergence) {
        fail(ErrorKind::Divergence, std::string(e.what()) + " at epoch " + std::to_string(epoch));
      }
      throw;
    }
    require(std::isfinite(loss.value()), ErrorKind::Divergence,
            "training diverged at epoch " + std::to_string(epoch));
    result.loss_history.push_back(loss.value());
    if (loss.value() < result.best_loss) {
      result.best_loss = loss.value();
      result.model = current;
    }
    if (epoch == config.epochs) break;

    const auto g = tape.gradient(loss, theta);
    for (std::size_t i = 0; i < current.theta.size(); ++i) {
      const double clipped = std::clamp(g[i], -config.grad_clip, config.grad_clip);
      current.theta[i] -= config.learning_rate * clipped;
    }
  }
  return result;
}

double rmse_at_week(const ForecastModel& model, const data::SeasonSet& part,
                    const data::PredictionTask& task, const data::SeasonSet& historical) {
  require(!part.empty(), ErrorKind::Precondition, "RMSE over an empty season set");
  const HistoricalContext ctx = summarize(historical, model.normalizer);
  double sq = 0.0;
  for (const auto& season : part.seasons()) {
    const auto out = detail::forward_for_season<double>(model.theta, model.arch, model.normalizer,
                                                        season, task, ctx);
    const double pred = out.y_norm * model.normalizer;
    const double truth = season.values[static_cast<std::size_t>(task.week_index)];
    sq += (pred - truth) * (pred - truth);
  }
  return std::sqrt(sq / part.size());
}

void save_model(const ForecastModel& model, const std::string& path) {
  model.validate();
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << "guided-forecast-model v1\n";
  out << "hidden " << model.arch.hidden << "\n";
  out << "embedding " << model.arch.embedding << "\n";
  out << "neighbors " << model.arch.neighbors << "\n";
  char buf[64];
  auto write_value = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << "\n";
  };
  out << "normalizer ";
  write_value(model.normalizer);
  out << "theta " << model.theta.size() << "\n";
  for (const double v : model.theta) write_value(v);
  out.flush();
  require(out.good(), ErrorKind::Io, "failed writing '" + path + "'");
}

ForecastModel load_model(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open '" + path + "'");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == "guided-forecast-model v1",
          ErrorKind::Parse, "'" + path + "' is not a guided-forecast-model v1 checkpoint");

  auto read_kv = [&](const std::string& key) {
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::Parse,
            "checkpoint truncated before '" + key + "'");
    std::istringstream ss(line);
    std::string k;
    std::string v;
    ss >> k >> v;
    require(k == key && !v.empty(), ErrorKind::Parse,
            "checkpoint field '" + key + "' malformed: '" + line + "'");
    return v;
  };

  ForecastModel model;
  model.arch.hidden = std::stoi(read_kv("hidden"));
  model.arch.embedding = std::stoi(read_kv("embedding"));
  model.arch.neighbors = std::stoi(read_kv("neighbors"));
  model.normalizer = std::stod(read_kv("normalizer"));
  const int count = std::stoi(read_kv("theta"));
  model.theta.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::Parse,
            "checkpoint truncated at parameter " + std::to_string(i));
    model.theta.push_back(std::stod(line));
  }
  model.validate();
  return model;
}

}  // namespace gf::forecaster
