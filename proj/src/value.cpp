#include "utree/value.hpp"

#include <cmath>
#include <functional>

#include "utree/errors.hpp"

namespace utree {

const char* mode_name(Mode m) { return m == Mode::exact ? "exact" : "float"; }

Mode parse_mode(const std::string& s) {
  if (s == "exact") return Mode::exact;
  if (s == "float" || s == "floating") return Mode::floating;
  throw ParseError("unknown mode '" + s + "'");
}

Value Value::zero(std::size_t m, Mode mode) {
  if (mode == Mode::exact) return Value(std::vector<CRational>(m));
  return Value(std::vector<std::complex<double>>(m));
}

Value Value::constant(std::size_t m, const CRational& c, Mode mode) {
  if (mode == Mode::exact) return Value(std::vector<CRational>(m, c));
  return Value(std::vector<std::complex<double>>(m, c.to_complex()));
}

void Value::check_compatible(const Value& o) const {
  if (mode_ != o.mode_) throw ModeError("exact and floating values mixed");
  if (dim() != o.dim()) throw ModeError("value dimensions differ");
}

Value& Value::operator+=(const Value& o) {
  check_compatible(o);
  if (mode_ == Mode::exact)
    for (std::size_t i = 0; i < exact_.size(); ++i) exact_[i] += o.exact_[i];
  else
    for (std::size_t i = 0; i < approx_.size(); ++i) approx_[i] += o.approx_[i];
  return *this;
}

Value& Value::operator-=(const Value& o) {
  check_compatible(o);
  if (mode_ == Mode::exact)
    for (std::size_t i = 0; i < exact_.size(); ++i) exact_[i] -= o.exact_[i];
  else
    for (std::size_t i = 0; i < approx_.size(); ++i) approx_[i] -= o.approx_[i];
  return *this;
}

Value& Value::operator*=(const CRational& a) {
  if (mode_ == Mode::exact) {
    for (auto& c : exact_) c *= a;
  } else {
    auto s = a.to_complex();
    for (auto& c : approx_) c *= s;
  }
  return *this;
}

bool operator==(const Value& a, const Value& b) {
  if (a.mode_ != b.mode_) return false;
  return a.mode_ == Mode::exact ? a.exact_ == b.exact_ : a.approx_ == b.approx_;
}

bool Value::is_zero() const {
  if (mode_ == Mode::exact) {
    for (const auto& c : exact_)
      if (!c.is_zero()) return false;
    return true;
  }
  for (const auto& c : approx_)
    if (c != std::complex<double>{}) return false;
  return true;
}

double Value::norm() const {
  double acc = 0.0;
  if (mode_ == Mode::exact) {
    for (const auto& c : exact_) acc = std::hypot(acc, to_double(c.re), to_double(c.im));
  } else {
    for (const auto& c : approx_) acc = std::hypot(acc, c.real(), c.imag());
  }
  return acc;
}

Value Value::slice(std::size_t first, std::size_t count) const {
  if (first + count > dim()) throw ArgumentError("value slice out of range");
  if (mode_ == Mode::exact)
    return Value(std::vector<CRational>(exact_.begin() + first, exact_.begin() + first + count));
  return Value(std::vector<std::complex<double>>(approx_.begin() + first,
                                                 approx_.begin() + first + count));
}

Value Value::stack(const std::vector<Value>& parts) {
  if (parts.empty()) throw ArgumentError("stacking no values");
  Mode mode = parts.front().mode();
  Value out = Value::zero(0, mode);
  for (const auto& p : parts) {
    if (p.mode() != mode) throw ModeError("exact and floating values mixed");
    if (mode == Mode::exact)
      out.exact_.insert(out.exact_.end(), p.exact_.begin(), p.exact_.end());
    else
      out.approx_.insert(out.approx_.end(), p.approx_.begin(), p.approx_.end());
  }
  return out;
}

Value Value::to_floating() const {
  if (mode_ == Mode::floating) return *this;
  std::vector<std::complex<double>> c;
  c.reserve(exact_.size());
  for (const auto& x : exact_) c.push_back(x.to_complex());
  return Value(std::move(c));
}

std::size_t Value::hash() const {
  std::size_t h = 0x84222325u;
  if (mode_ == Mode::exact) {
    for (const auto& c : exact_) {
      h = h * 31 + hash_rational(c.re);
      h = h * 31 + hash_rational(c.im);
    }
  } else {
    for (const auto& c : approx_) {
      h = h * 31 + std::hash<double>{}(c.real());
      h = h * 31 + std::hash<double>{}(c.imag());
    }
  }
  return h;
}

double distance(const Value& a, const Value& b) {
  if (a.mode() != b.mode()) throw ModeError("exact and floating values mixed");
  if (a.dim() != b.dim()) throw ModeError("value dimensions differ");
  double acc = 0.0;
  if (a.mode() == Mode::exact) {
    for (std::size_t i = 0; i < a.dim(); ++i) {
      const auto& x = a.exact()[i];
      const auto& y = b.exact()[i];
      acc = std::hypot(acc, to_double(x.re - y.re), to_double(x.im - y.im));
    }
  } else {
    for (std::size_t i = 0; i < a.dim(); ++i) acc = std::hypot(acc, std::abs(a.approx()[i] - b.approx()[i]));
  }
  return acc;
}

}  // namespace utree
