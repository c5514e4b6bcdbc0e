#include "utree/harmonic.hpp"

#include <cmath>

#include "utree/errors.hpp"

namespace utree {

HarmonicTruncation constant_truncation(const TreeConfig& config, int depth, const Value& c) {
  LevelLayout layout(config, depth);
  return HarmonicTruncation{depth, c.dim(), c.mode(), std::vector<Value>(layout.total(), c)};
}

void check_shape(const LevelLayout& layout, const HarmonicTruncation& f) {
  if (f.depth != layout.depth()) throw ArgumentError("truncation depth does not match layout");
  if (f.values.size() != layout.total())
    throw ArgumentError("truncation of depth " + std::to_string(f.depth) + " has " +
                        std::to_string(f.values.size()) + " values, expected " +
                        std::to_string(layout.total()));
  for (const auto& v : f.values)
    if (v.mode() != f.mode || v.dim() != f.m) throw ModeError("truncation value of wrong shape");
}

namespace {

void check_pair(const HarmonicTruncation& a, const HarmonicTruncation& b) {
  if (a.mode != b.mode) throw ModeError("exact and floating truncations mixed");
  if (a.m != b.m) throw ModeError("truncation dimensions differ");
}

// f(x) - sum_y w(x,y) f(y)
Value residual_at(const LevelLayout& layout, const HarmonicTruncation& f, int n, std::size_t i) {
  const LocalRule& r = layout.rule(n, i);
  Value res = f.at(layout, n, i);
  const std::size_t first = layout.child_begin(n, i);
  for (std::size_t c = 0; c < r.branching(); ++c) res -= r.w[c] * f.at(layout, n + 1, first + c);
  return res;
}

}  // namespace

HarmonicityReport is_harmonic(const TreeConfig& config, const HarmonicTruncation& f) {
  LevelLayout layout(config, f.depth);
  check_shape(layout, f);
  HarmonicityReport rep;
  for (int n = 0; n < f.depth; ++n) {
    for (std::size_t i = 0; i < layout.level_size(n); ++i) {
      Value res = residual_at(layout, f, n, i);
      ++rep.vertices_checked;
      const bool ok = f.mode == Mode::exact ? res.is_zero() : res.norm() <= kFloatHarmonicTolerance;
      if (!ok)
        rep.violations.push_back(
            {layout.vertex(n, i), layout.level_offset(n) + i + 1, res.norm()});
    }
  }
  return rep;
}

SimpleFunction level_projection(const TreeConfig& config, const HarmonicTruncation& f, int n) {
  if (n < 0 || n > f.depth)
    throw ArgumentError("projection level " + std::to_string(n) + " outside truncation depth " +
                        std::to_string(f.depth));
  LevelLayout layout(config, f.depth);
  check_shape(layout, f);
  SimpleFunction out;
  out.level = n;
  auto first = f.values.begin() + static_cast<std::ptrdiff_t>(layout.level_offset(n));
  out.values.assign(first, first + static_cast<std::ptrdiff_t>(layout.level_size(n)));
  return out;
}

Interval pointwise_metric(const TreeConfig& config, const HarmonicTruncation& f,
                          const HarmonicTruncation& g) {
  check_pair(f, g);
  const int depth = std::min(f.depth, g.depth);
  LevelLayout layout(config, depth);
  const std::size_t count = layout.total();
  double lo = 0.0;
  for (std::size_t k = 0; k < count && k < 1100; ++k)
    lo += std::ldexp(bounded_ratio(distance(f.values[k], g.values[k])), -static_cast<int>(k + 1));
  double tail = count > 1100 ? 0.0 : std::ldexp(1.0, -static_cast<int>(count));
  return Interval{lo, lo + tail};
}

HarmonicTruncation constant_extend(const TreeConfig& config, const HarmonicTruncation& f,
                                   int to_depth) {
  if (to_depth < f.depth)
    throw ArgumentError("cannot extend depth " + std::to_string(f.depth) + " to " +
                        std::to_string(to_depth));
  LevelLayout layout(config, to_depth);
  HarmonicTruncation out = f;
  out.depth = to_depth;
  out.values.reserve(layout.total());
  for (int n = f.depth + 1; n <= to_depth; ++n)
    for (std::size_t i = 0; i < layout.level_size(n); ++i) {
      Value v = out.at(layout, n - 1, layout.parent(n, i));
      out.values.push_back(std::move(v));
    }
  return out;
}

std::size_t CorrectionPolicy::pick(const LocalRule& rule) const {
  if (kind == Kind::lightest) return rule.lightest_child();
  if (index >= rule.branching()) throw ArgumentError("correction child index out of range");
  return index;
}

CorrectedExtension corrected_extend(const TreeConfig& config, const HarmonicTruncation& f,
                                    const SimpleFunction& targets, CorrectionPolicy policy) {
  const int n = f.depth;
  if (targets.level != n + 1)
    throw ArgumentError("targets must sit at level " + std::to_string(n + 1));
  LevelLayout layout(config, n + 1);
  check_shape(layout, targets);
  if (targets.mode() != f.mode || targets.dim() != f.m) throw ModeError("target shape mismatch");

  CorrectedExtension out;
  out.f = f;
  out.f.depth = n + 1;
  out.f.values.resize(layout.total());
  out.correction_measure = 0;
  out.correction_children.resize(layout.level_size(n));
  for (std::size_t i = 0; i < layout.level_size(n); ++i) {
    const LocalRule& r = layout.rule(n, i);
    const std::size_t first = layout.child_begin(n, i);
    const std::size_t star = policy.pick(r);
    Value forced = f.at(layout, n, i);
    for (std::size_t c = 0; c < r.branching(); ++c) {
      if (c == star) continue;
      out.f.at(layout, n + 1, first + c) = targets.values[first + c];
      forced -= r.w[c] * targets.values[first + c];
    }
    forced *= r.w[star].inverse();
    out.f.at(layout, n + 1, first + star) = std::move(forced);
    out.correction_children[i] = star;
    out.correction_measure += layout.measure(n + 1, first + star);
  }
  return out;
}

HarmonicTruncation harmonic_lift(const TreeConfig& config, const SimpleFunction& h, int depth) {
  const int k = h.level;
  LevelLayout layout(config, std::max(depth, k));
  check_shape(layout, h);
  HarmonicTruncation f;
  f.depth = k;
  f.m = h.dim();
  f.mode = h.mode();
  f.values.assign(layout.level_offset(k) + layout.level_size(k), Value::zero(f.m, f.mode));
  for (std::size_t i = 0; i < layout.level_size(k); ++i) f.at(layout, k, i) = h.values[i];
  for (int n = k - 1; n >= 0; --n)
    for (std::size_t i = 0; i < layout.level_size(n); ++i) {
      const LocalRule& r = layout.rule(n, i);
      const std::size_t first = layout.child_begin(n, i);
      Value acc = Value::zero(f.m, f.mode);
      for (std::size_t c = 0; c < r.branching(); ++c) acc += r.w[c] * f.at(layout, n + 1, first + c);
      f.at(layout, n, i) = std::move(acc);
    }
  if (depth >= k) return constant_extend(config, f, depth);
  return truncate(config, f, depth);
}

HarmonicTruncation add(const HarmonicTruncation& a, const HarmonicTruncation& b) {
  check_pair(a, b);
  if (a.depth != b.depth) throw ArgumentError("truncation depths differ");
  HarmonicTruncation out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += b.values[k];
  return out;
}

HarmonicTruncation subtract(const HarmonicTruncation& a, const HarmonicTruncation& b) {
  check_pair(a, b);
  if (a.depth != b.depth) throw ArgumentError("truncation depths differ");
  HarmonicTruncation out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] -= b.values[k];
  return out;
}

HarmonicTruncation scale(const CRational& c, HarmonicTruncation f) {
  for (auto& v : f.values) v *= c;
  return f;
}

HarmonicTruncation truncate(const TreeConfig& config, const HarmonicTruncation& f, int depth) {
  if (depth > f.depth) throw ArgumentError("truncation deeper than the source");
  LevelLayout layout(config, depth);
  HarmonicTruncation out = f;
  out.depth = depth;
  out.values.resize(layout.total());
  return out;
}

HarmonicTruncation linear_combination(const TreeConfig& config,
                                      const std::vector<CRational>& coefficients,
                                      const std::vector<HarmonicTruncation>& parts) {
  if (parts.empty() || coefficients.size() > parts.size())
    throw ArgumentError("combination needs at most one coefficient per part");
  int depth = parts.front().depth;
  for (const auto& p : parts) depth = std::min(depth, p.depth);
  HarmonicTruncation out = constant_truncation(config, depth, Value::zero(parts[0].m, parts[0].mode));
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (coefficients[i].is_zero()) continue;
    check_pair(out, parts[i]);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] += coefficients[i] * parts[i].values[k];
  }
  return out;
}

std::uint64_t flatten_index(std::uint64_t n) {
  if (n == 0) throw ArgumentError("flatten index needs n >= 1");
  std::uint64_t j = 1;
  while ((std::uint64_t{1} << (j - 1)) <= n) ++j;
  return j;
}

int flatten_depth(const TreeConfig& config, std::uint64_t n) {
  const std::uint64_t j0 = flatten_index(n);
  for (int d = 0; d <= config.depth_cap(); ++d) {
    LevelLayout layout(config, d);
    if (layout.total() >= j0) return d;
  }
  throw CapError("vertex " + std::to_string(j0) + " of the enumeration lies beyond the depth cap");
}

bool FlattenResult::pass(std::uint64_t n) const {
  const double bound = 1.0 / static_cast<double>(n);
  return flat_below && to_difference.hi < bound && sum_to_target.hi < bound;
}

FlattenResult flatten_perturbation(const TreeConfig& config, const HarmonicTruncation& f,
                                   const HarmonicTruncation& phi, std::uint64_t n) {
  check_pair(f, phi);
  FlattenResult out;
  out.prefix = flatten_index(n);
  out.flat_depth = flatten_depth(config, n);
  const int work = std::min(f.depth, phi.depth);
  if (out.flat_depth > work)
    throw CapError("flattening depth " + std::to_string(out.flat_depth) +
                   " exceeds the available depth " + std::to_string(work));
  HarmonicTruncation f_w = truncate(config, f, work);
  HarmonicTruncation phi_w = truncate(config, phi, work);
  HarmonicTruncation diff = subtract(phi_w, f_w);
  out.g = constant_extend(config, truncate(config, diff, out.flat_depth), work);

  HarmonicTruncation sum = add(f_w, out.g);
  out.to_difference = pointwise_metric(config, diff, out.g);
  out.sum_to_target = pointwise_metric(config, sum, phi_w);
  out.sum_to_offset = pointwise_metric(config, sum, out.g);

  out.flat_below = true;
  const SimpleFunction base = level_projection(config, out.g, out.flat_depth);
  for (int k = out.flat_depth + 1; k <= work; ++k)
    if (!same_element(config, level_projection(config, out.g, k), base)) out.flat_below = false;
  return out;
}

MartingaleReport martingale_check(const TreeConfig& config, const HarmonicTruncation& f) {
  if (!config.harmonic_weights_are_measure())
    throw ArgumentError("martingale identity needs harmonic weights equal to measure weights");
  if (f.mode != Mode::exact) throw ModeError("martingale identity is checked in exact mode");
  LevelLayout layout(config, f.depth);
  check_shape(layout, f);
  MartingaleReport rep;
  for (int n = 0; n < f.depth; ++n)
    for (std::size_t i = 0; i < layout.level_size(n); ++i) {
      const std::size_t first = layout.child_begin(n, i);
      Value integral = Value::zero(f.m, f.mode);
      for (std::size_t c = 0; c < layout.branching(n, i); ++c)
        integral += CRational(layout.measure(n + 1, first + c)) * f.at(layout, n + 1, first + c);
      ++rep.sectors_checked;
      if (!(integral == CRational(layout.measure(n, i)) * f.at(layout, n, i)))
        rep.violations.push_back(layout.vertex(n, i));
    }
  return rep;
}

}  // namespace utree
