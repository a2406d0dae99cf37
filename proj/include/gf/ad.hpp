#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace gf::ad {

class Tape;

// A scalar tracked on a Tape. A default-constructed or double-initialised
// Value is a constant: it carries no tape and no derivative.
class Value {
 public:
  Value() = default;
  Value(double v) : value_(v) {}  // NOLINT: implicit by design, constants mix freely
  Value(Tape* tape, int index, double value) : tape_(tape), index_(index), value_(value) {}

  double value() const { return value_; }
  int index() const { return index_; }
  Tape* tape() const { return tape_; }
  bool tracked() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int index_ = -1;
  double value_ = 0.0;
};

inline double primal(double x) { return x; }
inline double primal(const Value& x) { return x.value(); }

// Wengert list: every tracked scalar records up to two parents and the local
// partials; adjoints() runs the reverse sweep in one pass.
class Tape {
 public:
  Value input(double v) { return Value(this, push(kNone, kNone, 0.0, 0.0), v); }

  std::vector<Value> inputs(std::span<const double> values) {
    std::vector<Value> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(input(v));
    return out;
  }

  Value unary(const Value& a, double w, double v) {
    if (!a.tracked()) return Value(v);
    return Value(this, push(a.index(), kNone, w, 0.0), v);
  }

  Value binary(const Value& a, double wa, const Value& b, double wb, double v) {
    if (!a.tracked()) return unary(b, wb, v);
    if (!b.tracked()) return unary(a, wa, v);
    return Value(this, push(a.index(), b.index(), wa, wb), v);
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // d(root)/d(node) for every node on the tape.
  std::vector<double> adjoints(const Value& root) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    if (!root.tracked() || root.tape() != this) return adj;
    adj[static_cast<std::size_t>(root.index())] = 1.0;
    for (int i = root.index(); i >= 0; --i) {
      const double a = adj[static_cast<std::size_t>(i)];
      if (a == 0.0) continue;
      const Node& n = nodes_[static_cast<std::size_t>(i)];
      if (n.p0 != kNone) adj[static_cast<std::size_t>(n.p0)] += n.w0 * a;
      if (n.p1 != kNone) adj[static_cast<std::size_t>(n.p1)] += n.w1 * a;
    }
    return adj;
  }

  std::vector<double> gradient(const Value& root, std::span<const Value> wrt) const {
    const auto adj = adjoints(root);
    std::vector<double> out(wrt.size(), 0.0);
    for (std::size_t i = 0; i < wrt.size(); ++i) {
      if (wrt[i].tracked() && wrt[i].tape() == this)
        out[i] = adj[static_cast<std::size_t>(wrt[i].index())];
    }
    return out;
  }

 private:
  static constexpr int kNone = -1;
  struct Node {
    int p0, p1;
    double w0, w1;
  };

  int push(int p0, int p1, double w0, double w1) {
    nodes_.push_back(Node{p0, p1, w0, w1});
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
};

inline Tape* tape_of(const Value& a, const Value& b) {
  return a.tracked() ? a.tape() : b.tape();
}

inline Value operator+(const Value& a, const Value& b) {
  const double v = a.value() + b.value();
  Tape* t = tape_of(a, b);
  return t ? t->binary(a, 1.0, b, 1.0, v) : Value(v);
}

inline Value operator-(const Value& a, const Value& b) {
  const double v = a.value() - b.value();
  Tape* t = tape_of(a, b);
  return t ? t->binary(a, 1.0, b, -1.0, v) : Value(v);
}

inline Value operator-(const Value& a) {
  const double v = -a.value();
  return a.tracked() ? a.tape()->unary(a, -1.0, v) : Value(v);
}

inline Value operator*(const Value& a, const Value& b) {
  const double v = a.value() * b.value();
  Tape* t = tape_of(a, b);
  return t ? t->binary(a, b.value(), b, a.value(), v) : Value(v);
}

inline Value operator/(const Value& a, const Value& b) {
  const double bv = b.value();
  const double v = a.value() / bv;
  Tape* t = tape_of(a, b);
  return t ? t->binary(a, 1.0 / bv, b, -a.value() / (bv * bv), v) : Value(v);
}

inline Value& operator+=(Value& a, const Value& b) { return a = a + b; }
inline Value& operator-=(Value& a, const Value& b) { return a = a - b; }
inline Value& operator*=(Value& a, const Value& b) { return a = a * b; }

inline Value tanh(const Value& a) {
  const double t = std::tanh(a.value());
  return a.tracked() ? a.tape()->unary(a, 1.0 - t * t, t) : Value(t);
}

inline Value exp(const Value& a) {
  const double e = std::exp(a.value());
  return a.tracked() ? a.tape()->unary(a, e, e) : Value(e);
}

inline Value log(const Value& a) {
  const double v = std::log(a.value());
  return a.tracked() ? a.tape()->unary(a, 1.0 / a.value(), v) : Value(v);
}

inline Value sqrt(const Value& a) {
  const double s = std::sqrt(a.value());
  const double w = s > 0.0 ? 0.5 / s : 0.0;
  return a.tracked() ? a.tape()->unary(a, w, s) : Value(s);
}

inline Value abs(const Value& a) {
  const double v = a.value();
  const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return a.tracked() ? a.tape()->unary(a, sign, std::fabs(v)) : Value(std::fabs(v));
}

inline Value max(const Value& a, const Value& b) {
  const Value& pick = b.value() > a.value() ? b : a;
  Tape* t = tape_of(a, b);
  return t ? t->unary(pick, 1.0, pick.value()) : Value(pick.value());
}

inline Value min(const Value& a, const Value& b) {
  const Value& pick = b.value() < a.value() ? b : a;
  Tape* t = tape_of(a, b);
  return t ? t->unary(pick, 1.0, pick.value()) : Value(pick.value());
}

}  // namespace gf::ad
