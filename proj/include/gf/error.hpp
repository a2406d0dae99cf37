#pragma once

#include <stdexcept>
#include <string>

namespace gf {

enum class ErrorKind {
  Parse,        // malformed input text
  Validation,   // value outside its documented domain
  Gap,          // missing week inside a season
  Sizing,       // not enough data for the requested operation
  Index,        // out-of-range week or season index
  Precondition, // caller broke an operation contract
  Divergence,   // non-finite loss or gradient during training
  Alignment,    // mismatched week lists between paired inputs
  Io,           // file system failure
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Gap: return "gap";
    case ErrorKind::Sizing: return "sizing";
    case ErrorKind::Index: return "index";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

// The toolkit's single exception type. `kind` lets the CLI and tests branch
// without matching message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool ok, ErrorKind kind, const std::string& message) {
  if (!ok) fail(kind, message);
}

}  // namespace gf
