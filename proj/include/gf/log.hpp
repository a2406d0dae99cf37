#pragma once

#include <iostream>
#include <sstream>
#include <string>

namespace gf::log {

enum class Level { Silent = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

// Verbosity comes from the GF_LOG environment variable
// (silent|error|warn|info|debug, or 0..4). Default: warn.
Level level();

inline bool enabled(Level lvl) { return static_cast<int>(lvl) <= static_cast<int>(level()); }

namespace detail {
inline void write(Level lvl, const std::string& msg) {
  static const char* tags[] = {"", "error", "warn", "info", "debug"};
  std::cerr << "gf[" << tags[static_cast<int>(lvl)] << "] " << msg << "\n";
}
template <class... Args>
void emit(Level lvl, Args&&... args) {
  if (!enabled(lvl)) return;
  std::ostringstream os;
  (os << ... << args);
  write(lvl, os.str());
}
}  // namespace detail

template <class... Args> void error(Args&&... args) { detail::emit(Level::Error, args...); }
template <class... Args> void warn(Args&&... args) { detail::emit(Level::Warn, args...); }
template <class... Args> void info(Args&&... args) { detail::emit(Level::Info, args...); }
template <class... Args> void debug(Args&&... args) { detail::emit(Level::Debug, args...); }

}  // namespace gf::log
