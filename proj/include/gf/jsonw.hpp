#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace gf::jsonw {

// Deterministic JSON emission for report files: callers write keys in sorted
// order, reals are fixed at six decimals, NaN becomes null. Parsing is left
// to a real JSON library; this only has to be byte-stable.
class Writer {
 public:
  void begin_object() { open('{'); }
  void end_object() { close('}'); }
  void begin_array() { open('['); }
  void end_array() { close(']'); }

  void key(std::string_view k) {
    comma();
    quote(k);
    out_ += ':';
    pending_value_ = true;
  }

  void string(std::string_view v) {
    comma();
    quote(v);
  }

  void number(double v) {
    comma();
    if (!std::isfinite(v)) {
      out_ += "null";
      return;
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    out_ += buf;
  }

  void integer(long long v) {
    comma();
    out_ += std::to_string(v);
  }

  void boolean(bool v) {
    comma();
    out_ += v ? "true" : "false";
  }

  void null() {
    comma();
    out_ += "null";
  }

  const std::string& str() const { return out_; }

 private:
  void open(char c) {
    comma();
    out_ += c;
    first_.push_back(true);
  }

  void close(char c) {
    out_ += c;
    first_.pop_back();
  }

  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (!first_.empty()) {
      if (!first_.back()) out_ += ',';
      first_.back() = false;
    }
  }

  void quote(std::string_view s) {
    out_ += '"';
    for (const char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  std::vector<bool> first_;
  bool pending_value_ = false;
};

}  // namespace gf::jsonw
