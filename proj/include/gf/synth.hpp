#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gf/data.hpp"

namespace gf::data {

// Synthetic surveillance seasons: a fixed single-peaked bump over 30 weeks
// plus additive Gaussian noise, clipped at zero. When dip_week is set, that
// week's value is scaled by (1 - dip_depth) before noise is added, mimicking
// the holiday reporting artifact.
struct SynthParams {
  int count = 1;
  std::optional<int> dip_week;  // week index, 0-based
  double dip_depth = 0.0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  std::string region = "synth";
  int first_year = 2000;
};

SeasonSet synth_seasons(const SynthParams& params);

// The noiseless curve underlying the generator.
double synth_bump(int week_index);

}  // namespace gf::data
