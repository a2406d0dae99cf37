#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>

#include "gf/data.hpp"

namespace gf::data {

// Reads the wILI CSV schema `region,year,week,wili` into full seasons.
// Rows outside epi weeks 40..17 are dropped, week 53 is dropped (seasons are
// truncated to the standard 30 weeks), and a missing week inside a season is
// a hard error. With a region filter, only the named regions are kept.
SeasonSet ingest_wili(const std::string& path,
                      const std::optional<std::set<std::string>>& region_filter = std::nullopt);

SeasonSet read_wili_csv(std::istream& in,
                        const std::optional<std::set<std::string>>& region_filter = std::nullopt);

// Emits the same schema; re-ingesting the output recovers the set exactly.
void write_wili(const SeasonSet& data, const std::string& path);
void write_wili_csv(const SeasonSet& data, std::ostream& out);

}  // namespace gf::data
