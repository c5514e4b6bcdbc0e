#pragma once

#include <cstdint>
#include <vector>

#include "utree/tree.hpp"
#include "utree/value.hpp"

namespace utree {

/// Function on the boundary that is constant on every level-n sector:
/// one value per level-n vertex in canonical order.
struct SimpleFunction {
  int level = 0;
  std::vector<Value> values;

  std::size_t dim() const { return values.empty() ? 0 : values.front().dim(); }
  Mode mode() const { return values.empty() ? Mode::exact : values.front().mode(); }

  static SimpleFunction constant(const TreeConfig& config, int level, const Value& v);
};

/// Throws unless sf has one value per level vertex and uniform dim/mode.
void check_shape(const LevelLayout& layout, const SimpleFunction& sf);

/// Same function expressed at a deeper level.
SimpleFunction refine(const TreeConfig& config, const SimpleFunction& sf, int level);

/// Convergence-in-probability distance: the sector sum of
/// p(B_x) d/(1+d) at the common refinement level. Always in [0, 1).
double probability_metric(const TreeConfig& config, const SimpleFunction& a,
                          const SimpleFunction& b);

SimpleFunction add(const TreeConfig& config, const SimpleFunction& a, const SimpleFunction& b);
SimpleFunction subtract(const TreeConfig& config, const SimpleFunction& a,
                        const SimpleFunction& b);
SimpleFunction scale(const CRational& c, SimpleFunction sf);

/// Equality as elements of L0: compared sector-wise at the common refinement.
bool same_element(const TreeConfig& config, const SimpleFunction& a, const SimpleFunction& b);

/// A different element within distance eps: shifts the first coordinate by 1
/// on the first sector (shallowest level, canonical order) of measure < eps.
SimpleFunction perturb(const TreeConfig& config, const SimpleFunction& sf, const Rational& eps);

/// Value alphabet of height r: Gaussian rationals whose parts have
/// denominator <= r and absolute value <= r. Zero comes first.
std::vector<CRational> gaussian_alphabet(int r);

/// Deterministic enumeration (1-based) of simple functions with Gaussian
/// rational coordinates. Stage t lists levels k = 0..t-1 with height t-k,
/// each stage in lexicographic assignment order.
SimpleFunction dense_family(const TreeConfig& config, std::size_t m, std::uint64_t index);

}  // namespace utree
