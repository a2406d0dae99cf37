#include "gf/ingest.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace gf::data {

namespace {

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int parse_int(const std::string& text, int line_no, const char* what) {
  int value = 0;
  const auto* begin = text.data();
  const auto* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  require(ec == std::errc() && ptr == end, ErrorKind::Parse,
          std::string("line ") + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
  return value;
}

double parse_double(const std::string& text, int line_no, const char* what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    require(used == text.size(), ErrorKind::Parse,
            std::string("line ") + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
    return value;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorKind::Parse,
         std::string("line ") + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
  }
}

// Calendar weeks belonging to a standard season, in season order.
std::array<int, kStandardSeasonLength> season_week_sequence() {
  std::array<int, kStandardSeasonLength> weeks{};
  for (int i = 0; i < kStandardSeasonLength; ++i) weeks[static_cast<std::size_t>(i)] = i <= 12 ? 40 + i : i - 12;
  return weeks;
}

}  // namespace

SeasonSet read_wili_csv(std::istream& in,
                        const std::optional<std::set<std::string>>& region_filter) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::Parse, "empty file, expected header");
  require(strip_cr(line) == "region,year,week,wili", ErrorKind::Parse,
          "line 1: expected header 'region,year,week,wili', got '" + strip_cr(line) + "'");

  struct Key {
    std::string region;
    int start_year;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::map<int, double>> groups;  // inner key: epi week

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    require(fields.size() == 4, ErrorKind::Parse,
            "line " + std::to_string(line_no) + ": expected 4 fields, got " +
                std::to_string(fields.size()));
    const std::string& region = fields[0];
    require(!region.empty(), ErrorKind::Parse,
            "line " + std::to_string(line_no) + ": empty region");
    const int year = parse_int(fields[1], line_no, "year");
    const int week = parse_int(fields[2], line_no, "week");
    require(week >= 1 && week <= 53, ErrorKind::Parse,
            "line " + std::to_string(line_no) + ": week " + std::to_string(week) +
                " outside 1..53");
    const double wili = parse_double(fields[3], line_no, "wili");
    require(std::isfinite(wili) && wili >= 0.0, ErrorKind::Validation,
            "line " + std::to_string(line_no) + ": negative or non-finite wILI " + fields[3]);

    if (region_filter && !region_filter->contains(region)) continue;
    if (week > 17 && week < 40) continue;  // off-season rows
    if (week == 53) continue;              // seasons truncated to 30 weeks

    const Key key{region, season_start_year(year, week)};
    auto [it, inserted] = groups[key].emplace(week, wili);
    (void)it;
    require(inserted, ErrorKind::Parse,
            "line " + std::to_string(line_no) + ": duplicate row for " + region + " year " +
                std::to_string(year) + " week " + std::to_string(week));
  }

  const auto sequence = season_week_sequence();
  SeasonSet out;
  for (const auto& [key, weeks] : groups) {
    Season season;
    season.region = key.region;
    season.year_label = season_label(key.start_year);
    season.values.reserve(kStandardSeasonLength);
    for (int w : sequence) {
      const auto it = weeks.find(w);
      const int calendar_year = w >= 40 ? key.start_year : key.start_year + 1;
      require(it != weeks.end(), ErrorKind::Gap,
              "season " + key.region + " " + season.year_label + " is missing week " +
                  std::to_string(w) + " of " + std::to_string(calendar_year));
      season.values.push_back(it->second);
    }
    season.validate_alignment();
    out.add(std::move(season));
  }
  return out;
}

SeasonSet ingest_wili(const std::string& path,
                      const std::optional<std::set<std::string>>& region_filter) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open '" + path + "'");
  return read_wili_csv(in, region_filter);
}

void write_wili_csv(const SeasonSet& data, std::ostream& out) {
  out << "region,year,week,wili\n";
  char buf[64];
  for (const auto& season : data.seasons()) {
    season.validate_alignment();
    const int start_year = std::stoi(season.year_label.substr(0, season.year_label.find('/')));
    for (int i = 0; i < season.length(); ++i) {
      const int week = season.epi_week(i);
      const int year = week >= 40 ? start_year : start_year + 1;
      const auto res = std::to_chars(buf, buf + sizeof(buf), season.values[static_cast<std::size_t>(i)]);
      out << season.region << ',' << year << ',' << week << ','
          << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
    }
  }
}

void write_wili(const SeasonSet& data, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_wili_csv(data, out);
  out.flush();
  require(out.good(), ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace gf::data
