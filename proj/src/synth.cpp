#include "gf/synth.hpp"

#include <algorithm>
#include <cmath>

#include "gf/rng.hpp"

namespace gf::data {

namespace {
constexpr double kBaseline = 0.4;
constexpr double kAmplitude = 3.1;
constexpr double kCenter = 15.0;
constexpr double kWidth = 4.0;
}  // namespace

double synth_bump(int week_index) {
  const double d = (week_index - kCenter) / kWidth;
  return kBaseline + kAmplitude * std::exp(-0.5 * d * d);
}

SeasonSet synth_seasons(const SynthParams& params) {
  require(params.count >= 1, ErrorKind::Precondition, "season count must be >= 1");
  require(params.dip_depth >= 0.0, ErrorKind::Precondition, "dip_depth must be >= 0");
  require(params.noise_sd >= 0.0, ErrorKind::Precondition, "noise_sd must be >= 0");
  if (params.dip_week) {
    require(*params.dip_week >= 0 && *params.dip_week < kStandardSeasonLength, ErrorKind::Index,
            "dip_week " + std::to_string(*params.dip_week) + " outside week indices 0..29");
  }

  Rng rng(params.seed);
  SeasonSet out;
  for (int s = 0; s < params.count; ++s) {
    Season season;
    season.region = params.region;
    season.year_label = season_label(params.first_year + s);
    season.values.reserve(kStandardSeasonLength);
    for (int i = 0; i < kStandardSeasonLength; ++i) {
      double v = synth_bump(i);
      if (params.dip_week && *params.dip_week == i) v *= 1.0 - params.dip_depth;
      if (params.noise_sd > 0.0) v += rng.normal(0.0, params.noise_sd);
      season.values.push_back(std::max(0.0, v));
    }
    out.add(std::move(season));
  }
  return out;
}

}  // namespace gf::data
