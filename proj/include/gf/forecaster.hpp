#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gf/ad.hpp"
#include "gf/data.hpp"
#include "gf/error.hpp"

namespace gf::forecaster {

// Architecture of the base forecaster: an Elman recurrent encoder over the
// observed prefix, a season-similarity embedding with softmax attention over
// the nearest historical seasons, and a linear decoder.
struct ModelArch {
  int hidden = 8;     // recurrent state size h
  int embedding = 4;  // season-embedding size d
  int neighbors = 5;  // attended historical seasons k

  void validate() const {
    require(hidden >= 1 && embedding >= 1 && neighbors >= 1, ErrorKind::Precondition,
            "architecture sizes must all be >= 1");
  }
  friend bool operator==(const ModelArch&, const ModelArch&) = default;
};

// Flat parameter layout:
//   w_in[h] | u_rec[h*h] | b_rec[h] | hist_map[d*4] | hist_bias[d]
//   | cur_map[d*4] | cur_bias[d] | w_out[h+d] | b_out
inline int parameter_count(const ModelArch& arch) {
  const int h = arch.hidden;
  const int d = arch.embedding;
  return h * h + 3 * h + 11 * d + 1;
}

struct ForecastModel {
  ModelArch arch;
  double normalizer = 1.0;    // raw wILI divided by this inside the network
  std::vector<double> theta;

  void validate() const {
    arch.validate();
    require(normalizer > 0.0, ErrorKind::Precondition, "normalizer must be positive");
    require(static_cast<int>(theta.size()) == parameter_count(arch), ErrorKind::Precondition,
            "theta length " + std::to_string(theta.size()) + " does not match architecture (" +
                std::to_string(parameter_count(arch)) + ")");
  }
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 150;
  double beta_weight = 0.1;  // weight of the embedding-consistency loss
  std::uint64_t seed = 0;
  double grad_clip = 5.0;

  void validate() const {
    require(learning_rate > 0.0, ErrorKind::Precondition, "learning_rate must be positive");
    require(epochs >= 1, ErrorKind::Precondition, "epochs must be >= 1");
    require(beta_weight >= 0.0, ErrorKind::Precondition, "beta_weight must be >= 0");
    require(grad_clip > 0.0, ErrorKind::Precondition, "grad_clip must be positive");
  }
};

struct Prediction {
  double value = 0.0;  // raw wILI scale
  int week_index = 0;
  std::string region;
  std::string year_label;
};

// Fixed summary of a season feeding the similarity embedding:
// mean, max, peak position / length, last value (normalized scale).
using StatVec = std::array<double, 4>;

inline StatVec series_stats(std::span<const double> xs) {
  double sum = 0.0;
  double mx = xs[0];
  int arg = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    if (xs[i] > mx) {
      mx = xs[i];
      arg = static_cast<int>(i);
    }
  }
  const auto n = static_cast<double>(xs.size());
  return {sum / n, mx, static_cast<double>(arg) / n, xs.back()};
}

// Precomputed full-season summaries for the attention module, ordered by
// (year_label, region) so nearest-neighbour ties break deterministically.
struct HistoricalContext {
  std::vector<StatVec> stats;
  std::vector<std::pair<std::string, std::string>> keys;  // (year_label, region)

  int size() const { return static_cast<int>(stats.size()); }

  // Indices usable when forecasting `season`: everything except the season
  // itself, so a model never attends to the full version of the season it
  // is predicting.
  std::vector<int> usable_for(const data::Season& season) const {
    std::vector<int> out;
    out.reserve(stats.size());
    for (int i = 0; i < size(); ++i) {
      const auto& [year, region] = keys[static_cast<std::size_t>(i)];
      if (year == season.year_label && region == season.region) continue;
      out.push_back(i);
    }
    return out;
  }
};

HistoricalContext summarize(const data::SeasonSet& historical, double normalizer);

namespace detail {

template <class T>
struct ThetaView {
  std::span<const T> w_in, u_rec, b_rec, hist_map, hist_bias, cur_map, cur_bias, w_out;
  const T* b_out;
};

template <class T>
ThetaView<T> view_theta(std::span<const T> theta, const ModelArch& arch) {
  const std::size_t h = static_cast<std::size_t>(arch.hidden);
  const std::size_t d = static_cast<std::size_t>(arch.embedding);
  ThetaView<T> v;
  std::size_t at = 0;
  v.w_in = theta.subspan(at, h); at += h;
  v.u_rec = theta.subspan(at, h * h); at += h * h;
  v.b_rec = theta.subspan(at, h); at += h;
  v.hist_map = theta.subspan(at, d * 4); at += d * 4;
  v.hist_bias = theta.subspan(at, d); at += d;
  v.cur_map = theta.subspan(at, d * 4); at += d * 4;
  v.cur_bias = theta.subspan(at, d); at += d;
  v.w_out = theta.subspan(at, h + d); at += h + d;
  v.b_out = &theta[at];
  return v;
}

template <class T>
struct ForwardOut {
  T y_norm;  // prediction on the normalized scale
  T beta;    // squared distance between current and attended embedding
};

// One forward pass. `history_norm` is the observed prefix divided by the
// normalizer; `usable` indexes the historical seasons the attention may use.
// Neighbour selection happens on primal values so the double and taped paths
// pick identical neighbours.
template <class T>
ForwardOut<T> forward_core(std::span<const T> theta, const ModelArch& arch,
                           std::span<const double> history_norm, const HistoricalContext& ctx,
                           std::span<const int> usable) {
  using gf::ad::primal;
  using std::abs;
  using std::exp;
  using std::tanh;

  require(!history_norm.empty(), ErrorKind::Precondition, "history must have at least one week");
  require(!usable.empty(), ErrorKind::Precondition,
          "historical context is empty; the forecaster needs at least one other season");

  const int h = arch.hidden;
  const int d = arch.embedding;
  const auto tv = view_theta(theta, arch);

  // Recurrent encoder over the observed prefix.
  std::vector<T> state(static_cast<std::size_t>(h), T(0.0));
  std::vector<T> next(static_cast<std::size_t>(h), T(0.0));
  for (const double x : history_norm) {
    for (int j = 0; j < h; ++j) {
      T pre = tv.w_in[static_cast<std::size_t>(j)] * x + tv.b_rec[static_cast<std::size_t>(j)];
      for (int k = 0; k < h; ++k) {
        pre = pre + tv.u_rec[static_cast<std::size_t>(j * h + k)] * state[static_cast<std::size_t>(k)];
      }
      next[static_cast<std::size_t>(j)] = tanh(pre);
    }
    std::swap(state, next);
  }

  // Current-history embedding.
  const StatVec cur_stats = series_stats(history_norm);
  std::vector<T> query(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    T q = tv.cur_bias[static_cast<std::size_t>(j)];
    for (int s = 0; s < 4; ++s) {
      q = q + tv.cur_map[static_cast<std::size_t>(j * 4 + s)] * cur_stats[static_cast<std::size_t>(s)];
    }
    query[static_cast<std::size_t>(j)] = q;
  }

  // Primal-side nearest-neighbour selection.
  std::vector<double> query_p(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) query_p[static_cast<std::size_t>(j)] = primal(query[static_cast<std::size_t>(j)]);
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(usable.size());
  for (const int idx : usable) {
    const StatVec& st = ctx.stats[static_cast<std::size_t>(idx)];
    double dist = 0.0;
    for (int j = 0; j < d; ++j) {
      double e = primal(tv.hist_bias[static_cast<std::size_t>(j)]);
      for (int s = 0; s < 4; ++s) {
        e += primal(tv.hist_map[static_cast<std::size_t>(j * 4 + s)]) * st[static_cast<std::size_t>(s)];
      }
      const double diff = query_p[static_cast<std::size_t>(j)] - e;
      dist += diff * diff;
    }
    ranked.emplace_back(dist, idx);
  }
  // ctx entries are ordered by (year_label, region); stable sort keeps that
  // order among equal distances.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const int kk = std::min<int>(arch.neighbors, static_cast<int>(ranked.size()));

  // Attention over the selected neighbours (constant shift for stability).
  double shift = ranked[0].first;
  std::vector<std::vector<T>> embeds(static_cast<std::size_t>(kk));
  std::vector<T> weights(static_cast<std::size_t>(kk));
  T weight_sum(0.0);
  for (int n = 0; n < kk; ++n) {
    const int idx = ranked[static_cast<std::size_t>(n)].second;
    const StatVec& st = ctx.stats[static_cast<std::size_t>(idx)];
    auto& e = embeds[static_cast<std::size_t>(n)];
    e.resize(static_cast<std::size_t>(d));
    T dist(0.0);
    for (int j = 0; j < d; ++j) {
      T ej = tv.hist_bias[static_cast<std::size_t>(j)];
      for (int s = 0; s < 4; ++s) {
        ej = ej + tv.hist_map[static_cast<std::size_t>(j * 4 + s)] * st[static_cast<std::size_t>(s)];
      }
      e[static_cast<std::size_t>(j)] = ej;
      const T diff = query[static_cast<std::size_t>(j)] - ej;
      dist = dist + diff * diff;
    }
    const T w = exp(T(shift) - dist);
    weights[static_cast<std::size_t>(n)] = w;
    weight_sum = weight_sum + w;
  }

  std::vector<T> attended(static_cast<std::size_t>(d), T(0.0));
  for (int n = 0; n < kk; ++n) {
    const T alpha = weights[static_cast<std::size_t>(n)] / weight_sum;
    for (int j = 0; j < d; ++j) {
      attended[static_cast<std::size_t>(j)] =
          attended[static_cast<std::size_t>(j)] + alpha * embeds[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
    }
  }

  T beta(0.0);
  for (int j = 0; j < d; ++j) {
    const T diff = query[static_cast<std::size_t>(j)] - attended[static_cast<std::size_t>(j)];
    beta = beta + diff * diff;
  }

  // Decoder.
  T y = *tv.b_out;
  for (int j = 0; j < h; ++j) {
    y = y + tv.w_out[static_cast<std::size_t>(j)] * state[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < d; ++j) {
    y = y + tv.w_out[static_cast<std::size_t>(h + j)] * attended[static_cast<std::size_t>(j)];
  }
  return {y, beta};
}

inline std::vector<double> normalized_prefix(const data::Season& season, int week_index,
                                             double normalizer) {
  std::vector<double> out(static_cast<std::size_t>(week_index));
  for (int i = 0; i < week_index; ++i) {
    out[static_cast<std::size_t>(i)] = season.values[static_cast<std::size_t>(i)] / normalizer;
  }
  return out;
}

// Per-season forward pass on an arbitrary scalar type.
template <class T>
ForwardOut<T> forward_for_season(std::span<const T> theta, const ModelArch& arch,
                                 double normalizer, const data::Season& season,
                                 const data::PredictionTask& task, const HistoricalContext& ctx) {
  task.validate_for(season);
  const auto hist = normalized_prefix(season, task.week_index, normalizer);
  const auto usable = ctx.usable_for(season);
  return forward_core<T>(theta, arch, hist, ctx, usable);
}

// Sum of absolute next-week errors on the normalized scale plus the weighted
// mean embedding-consistency term.
template <class T>
T task_loss_core(std::span<const T> theta, const ModelArch& arch, double normalizer,
                 const data::SeasonSet& part, const data::PredictionTask& task,
                 const HistoricalContext& ctx, double beta_weight) {
  using std::abs;
  require(!part.empty(), ErrorKind::Precondition, "task loss over an empty season set");
  T total(0.0);
  T beta_sum(0.0);
  for (const auto& season : part.seasons()) {
    const auto out = forward_for_season<T>(theta, arch, normalizer, season, task, ctx);
    const double target = season.values[static_cast<std::size_t>(task.week_index)] / normalizer;
    total = total + abs(out.y_norm - T(target));
    beta_sum = beta_sum + out.beta;
  }
  if (beta_weight == 0.0) return total;
  return total + beta_weight * (beta_sum / static_cast<double>(part.size()));
}

}  // namespace detail

// A scalar loss built on a tape over the model parameters; the common
// currency between training, gradients and the Seldonian candidate loss.
using TapedLoss = std::function<ad::Value(ad::Tape&, std::span<const ad::Value>)>;

ForecastModel init_model(const ModelArch& arch, std::uint64_t seed, double normalizer = 1.0);

Prediction forward(const ForecastModel& model, const data::Season& season,
                   const data::PredictionTask& task, const data::SeasonSet& historical);

double task_loss(const ForecastModel& model, const data::SeasonSet& part,
                 const data::PredictionTask& task, const data::SeasonSet& historical,
                 double beta_weight = 0.0);

TapedLoss taped_task_loss(const ForecastModel& model, const data::SeasonSet& part,
                          const data::PredictionTask& task, const data::SeasonSet& historical,
                          double beta_weight);

// Exact reverse-mode gradient of an arbitrary taped loss at the model's
// current parameters. Throws Divergence when the loss is not finite.
std::vector<double> grad(const ForecastModel& model, const TapedLoss& loss_fn);
std::pair<double, std::vector<double>> loss_and_grad(const ForecastModel& model,
                                                     const TapedLoss& loss_fn);

// One clipped-SGD update; the input model is untouched.
ForecastModel train_step(const ForecastModel& model, const TapedLoss& loss_fn,
                         const TrainConfig& config);

struct FitResult {
  ForecastModel model;              // parameters with the lowest recorded loss
  double best_loss = 0.0;
  std::vector<double> loss_history; // loss at every evaluation point
};

// Plain training loop with best-so-far checkpointing. The loss is evaluated
// before every step and once after the final step; the returned model is the
// one with the lowest recorded loss.
FitResult fit(const ForecastModel& start, const TapedLoss& loss_fn, const TrainConfig& config);

// Root-mean-square next-week error on the raw scale at one task week.
double rmse_at_week(const ForecastModel& model, const data::SeasonSet& part,
                    const data::PredictionTask& task, const data::SeasonSet& historical);

// Checkpoint format: `guided-forecast-model v1` header, architecture,
// normalizer, then one parameter per line.
void save_model(const ForecastModel& model, const std::string& path);
ForecastModel load_model(const std::string& path);

}  // namespace gf::forecaster
