#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "utree/rational.hpp"

namespace utree {

enum class Mode { exact, floating };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

/// Point of E = C^m. Exact values hold Gaussian rationals; floating values
/// hold double pairs. Arithmetic never mixes the two (ModeError).
class Value {
 public:
  Value() = default;
  explicit Value(std::vector<CRational> coords)
      : mode_(Mode::exact), exact_(std::move(coords)) {}
  explicit Value(std::vector<std::complex<double>> coords)
      : mode_(Mode::floating), approx_(std::move(coords)) {}

  static Value zero(std::size_t m, Mode mode);
  /// Every coordinate equal to c.
  static Value constant(std::size_t m, const CRational& c, Mode mode);

  Mode mode() const { return mode_; }
  std::size_t dim() const { return mode_ == Mode::exact ? exact_.size() : approx_.size(); }
  const std::vector<CRational>& exact() const { return exact_; }
  const std::vector<std::complex<double>>& approx() const { return approx_; }
  std::vector<CRational>& exact() { return exact_; }
  std::vector<std::complex<double>>& approx() { return approx_; }

  Value& operator+=(const Value& o);
  Value& operator-=(const Value& o);
  Value& operator*=(const CRational& a);
  friend Value operator+(Value a, const Value& b) { return a += b; }
  friend Value operator-(Value a, const Value& b) { return a -= b; }
  friend Value operator*(const CRational& a, Value v) { return v *= a; }
  friend bool operator==(const Value& a, const Value& b);

  bool is_zero() const;
  /// Euclidean norm, saturating to +inf for magnitudes beyond double range.
  double norm() const;
  /// Coordinates [first, first + count) as a new value.
  Value slice(std::size_t first, std::size_t count) const;
  /// Concatenation.
  static Value stack(const std::vector<Value>& parts);
  Value to_floating() const;
  std::size_t hash() const;

 private:
  void check_compatible(const Value& o) const;

  Mode mode_ = Mode::exact;
  std::vector<CRational> exact_;
  std::vector<std::complex<double>> approx_;
};

/// d(a, b) = |a - b|.
double distance(const Value& a, const Value& b);

}  // namespace utree
