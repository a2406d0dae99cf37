#include "gf/log.hpp"

#include <cstdlib>
#include <string>

namespace gf::log {

static Level parse_level(const char* text) {
  if (text == nullptr) return Level::Warn;
  std::string s(text);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "silent" || s == "0") return Level::Silent;
  if (s == "error" || s == "1") return Level::Error;
  if (s == "warn" || s == "2") return Level::Warn;
  if (s == "info" || s == "3") return Level::Info;
  if (s == "debug" || s == "4") return Level::Debug;
  return Level::Warn;
}

Level level() {
  static const Level lvl = parse_level(std::getenv("GF_LOG"));
  return lvl;
}

}  // namespace gf::log
