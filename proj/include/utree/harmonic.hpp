#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "utree/simple_function.hpp"

namespace utree {

/// Values on every vertex of depth <= depth, breadth-first order.
struct HarmonicTruncation {
  int depth = 0;
  std::size_t m = 1;
  Mode mode = Mode::exact;
  std::vector<Value> values;

  const Value& at(const LevelLayout& layout, int n, std::size_t i) const {
    return values[layout.level_offset(n) + i];
  }
  Value& at(const LevelLayout& layout, int n, std::size_t i) {
    return values[layout.level_offset(n) + i];
  }
};

/// Absolute per-vertex tolerance of the harmonic identity in floating mode.
inline constexpr double kFloatHarmonicTolerance = 1e-9;

HarmonicTruncation constant_truncation(const TreeConfig& config, int depth, const Value& c);
void check_shape(const LevelLayout& layout, const HarmonicTruncation& f);

struct HarmonicViolation {
  VertexId vertex;
  std::uint64_t bfs_index = 0;
  double residual = 0.0;  // |f(x) - sum w f(y)|
};

struct HarmonicityReport {
  std::size_t vertices_checked = 0;
  std::vector<HarmonicViolation> violations;
  bool pass() const { return violations.empty(); }
};

/// Checks f(x) = sum_y w(x,y) f(y) at every vertex above the last level:
/// exactly in exact mode, within kFloatHarmonicTolerance otherwise.
HarmonicityReport is_harmonic(const TreeConfig& config, const HarmonicTruncation& f);

/// Reads f on level n as a simple function.
SimpleFunction level_projection(const TreeConfig& config, const HarmonicTruncation& f, int n);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Pointwise-convergence distance over the breadth-first enumeration,
/// truncated to the vertices both functions share; hi adds the 2^-M tail.
Interval pointwise_metric(const TreeConfig& config, const HarmonicTruncation& f,
                          const HarmonicTruncation& g);

/// Deeper levels copy the father's value.
HarmonicTruncation constant_extend(const TreeConfig& config, const HarmonicTruncation& f,
                                   int to_depth);

struct CorrectionPolicy {
  enum class Kind { lightest, fixed } kind = Kind::lightest;
  std::size_t index = 0;  // for Kind::fixed

  static CorrectionPolicy lightest() { return {}; }
  static CorrectionPolicy fixed(std::size_t i) { return {Kind::fixed, i}; }
  std::size_t pick(const LocalRule& rule) const;
};

struct CorrectedExtension {
  HarmonicTruncation f;
  /// Sum of the sector measures of the correction children.
  Rational correction_measure;
  /// Per level-depth vertex, the chosen correction child.
  std::vector<std::size_t> correction_children;
};

/// One more level: every child takes its target except the correction child,
/// whose value is forced by the harmonic identity.
CorrectedExtension corrected_extend(const TreeConfig& config, const HarmonicTruncation& f,
                                    const SimpleFunction& targets,
                                    CorrectionPolicy policy = CorrectionPolicy::lightest());

/// Interior values obtained by averaging upward from h's level; constant below.
HarmonicTruncation harmonic_lift(const TreeConfig& config, const SimpleFunction& h, int depth);

HarmonicTruncation add(const HarmonicTruncation& a, const HarmonicTruncation& b);
HarmonicTruncation subtract(const HarmonicTruncation& a, const HarmonicTruncation& b);
HarmonicTruncation scale(const CRational& c, HarmonicTruncation f);
/// Restriction to a smaller depth.
HarmonicTruncation truncate(const TreeConfig& config, const HarmonicTruncation& f, int depth);
/// sum_i coefficients[i] * parts[i] on the common depth.
HarmonicTruncation linear_combination(const TreeConfig& config,
                                      const std::vector<CRational>& coefficients,
                                      const std::vector<HarmonicTruncation>& parts);

/// Least j with 2^(1-j) < 1/n: the enumeration prefix whose tail weight is
/// below 1/n.
std::uint64_t flatten_index(std::uint64_t n);
/// Depth of the flatten_index(n)-th vertex in breadth-first order.
int flatten_depth(const TreeConfig& config, std::uint64_t n);

struct FlattenResult {
  HarmonicTruncation g;
  int flat_depth = 0;          // N(n)
  std::uint64_t prefix = 0;    // j0(n)
  Interval to_difference;      // distance(phi - f, g)
  Interval sum_to_target;      // distance(f + g, phi)
  Interval sum_to_offset;      // distance(f + g, g), recorded for reference
  bool flat_below = false;     // projections below N(n) repeat level N(n)
  bool pass(std::uint64_t n) const;
};

/// g = phi - f up to depth N(n), constant beyond; the checks are recorded.
FlattenResult flatten_perturbation(const TreeConfig& config, const HarmonicTruncation& f,
                                   const HarmonicTruncation& phi, std::uint64_t n);

struct MartingaleReport {
  std::size_t sectors_checked = 0;
  std::vector<VertexId> violations;
  bool pass() const { return violations.empty(); }
};

/// With w = q: the integral of the level n+1 projection over B_x equals
/// p(B_x) f(x), checked exactly per sector. Exact mode only.
MartingaleReport martingale_check(const TreeConfig& config, const HarmonicTruncation& f);

}  // namespace utree
