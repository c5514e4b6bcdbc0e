#include "utree/simple_function.hpp"

#include <map>

#include <numeric>

#include "utree/errors.hpp"

namespace utree {

SimpleFunction SimpleFunction::constant(const TreeConfig& config, int level, const Value& v) {
  LevelLayout layout(config, level);
  return SimpleFunction{level, std::vector<Value>(layout.level_size(level), v)};
}

void check_shape(const LevelLayout& layout, const SimpleFunction& sf) {
  if (sf.level < 0 || sf.level > layout.depth()) throw ArgumentError("simple function level out of range");
  if (sf.values.size() != layout.level_size(sf.level))
    throw ArgumentError("simple function at level " + std::to_string(sf.level) + " has " +
                        std::to_string(sf.values.size()) + " values, expected " +
                        std::to_string(layout.level_size(sf.level)));
  for (const auto& v : sf.values) {
    if (v.mode() != sf.mode()) throw ModeError("mixed modes within a simple function");
    if (v.dim() != sf.dim()) throw ModeError("mixed dimensions within a simple function");
  }
}

namespace {

SimpleFunction refine_in(const LevelLayout& layout, const SimpleFunction& sf, int level) {
  if (level < sf.level)
    throw ArgumentError("cannot refine level " + std::to_string(sf.level) + " to coarser level " +
                        std::to_string(level));
  if (level == sf.level) return sf;
  SimpleFunction out;
  out.level = level;
  out.values.reserve(layout.level_size(level));
  for (std::size_t i = 0; i < layout.level_size(level); ++i)
    out.values.push_back(sf.values[layout.ancestor(level, i, sf.level)]);
  return out;
}

void check_pair(const SimpleFunction& a, const SimpleFunction& b) {
  if (a.mode() != b.mode()) throw ModeError("exact and floating simple functions mixed");
  if (a.dim() != b.dim()) throw ModeError("simple function dimensions differ");
}

}  // namespace

SimpleFunction refine(const TreeConfig& config, const SimpleFunction& sf, int level) {
  LevelLayout layout(config, std::max(level, sf.level));
  check_shape(layout, sf);
  return refine_in(layout, sf, level);
}

double probability_metric(const TreeConfig& config, const SimpleFunction& a,
                          const SimpleFunction& b) {
  check_pair(a, b);
  const int L = std::max(a.level, b.level);
  LevelLayout layout(config, L);
  check_shape(layout, a);
  check_shape(layout, b);
  // exact measure per distinct distance, summed in increasing order
  std::map<double, Rational> mass;
  for (std::size_t i = 0; i < layout.level_size(L); ++i) {
    const Value& x = a.values[layout.ancestor(L, i, a.level)];
    const Value& y = b.values[layout.ancestor(L, i, b.level)];
    mass[distance(x, y)] += layout.measure(L, i);
  }
  double sum = 0.0;
  for (const auto& [d, p] : mass) sum += to_double(p) * bounded_ratio(d);
  return sum;
}

namespace {
template <class Op>
SimpleFunction pointwise(const TreeConfig& config, const SimpleFunction& a,
                         const SimpleFunction& b, Op op) {
  check_pair(a, b);
  const int L = std::max(a.level, b.level);
  LevelLayout layout(config, L);
  check_shape(layout, a);
  check_shape(layout, b);
  SimpleFunction out = refine_in(layout, a, L);
  for (std::size_t i = 0; i < out.values.size(); ++i)
    op(out.values[i], b.values[layout.ancestor(L, i, b.level)]);
  return out;
}
}  // namespace

SimpleFunction add(const TreeConfig& config, const SimpleFunction& a, const SimpleFunction& b) {
  return pointwise(config, a, b, [](Value& x, const Value& y) { x += y; });
}

SimpleFunction subtract(const TreeConfig& config, const SimpleFunction& a,
                        const SimpleFunction& b) {
  return pointwise(config, a, b, [](Value& x, const Value& y) { x -= y; });
}

SimpleFunction scale(const CRational& c, SimpleFunction sf) {
  for (auto& v : sf.values) v *= c;
  return sf;
}

bool same_element(const TreeConfig& config, const SimpleFunction& a, const SimpleFunction& b) {
  check_pair(a, b);
  const int L = std::max(a.level, b.level);
  LevelLayout layout(config, L);
  check_shape(layout, a);
  check_shape(layout, b);
  for (std::size_t i = 0; i < layout.level_size(L); ++i)
    if (!(a.values[layout.ancestor(L, i, a.level)] == b.values[layout.ancestor(L, i, b.level)]))
      return false;
  return true;
}

SimpleFunction perturb(const TreeConfig& config, const SimpleFunction& sf, const Rational& eps) {
  if (sgn(eps) <= 0 || eps >= 1) throw ArgumentError("perturbation size must lie in (0, 1)");
  if (sf.dim() == 0) throw ArgumentError("perturbing an empty simple function");
  for (int n = sf.level; n <= config.depth_cap(); ++n) {
    LevelLayout layout(config, n);
    check_shape(layout, sf);
    for (std::size_t i = 0; i < layout.level_size(n); ++i) {
      if (layout.measure(n, i) < eps) {
        SimpleFunction out = refine_in(layout, sf, n);
        Value shift = Value::zero(sf.dim(), sf.mode());
        if (shift.mode() == Mode::exact)
          shift.exact()[0] = CRational(1);
        else
          shift.approx()[0] = 1.0;
        out.values[i] += shift;
        return out;
      }
    }
  }
  throw CapError("no sector of measure below " + format_rational(eps) + " within depth cap " +
                 std::to_string(config.depth_cap()));
}

std::vector<CRational> gaussian_alphabet(int r) {
  if (r < 1) throw ArgumentError("alphabet height must be positive");
  std::vector<Rational> reals{Rational(0)};
  for (long q = 1; q <= r; ++q)
    for (long p = 1; p <= r * q; ++p)
      if (std::gcd(p, q) == 1) {
        reals.emplace_back(p, q);
        reals.emplace_back(-p, q);
      }
  for (auto& x : reals) x.canonicalize();
  std::vector<CRational> out;
  out.reserve(reals.size() * reals.size());
  for (const auto& re : reals)
    for (const auto& im : reals) out.emplace_back(re, im);
  return out;
}

SimpleFunction dense_family(const TreeConfig& config, std::size_t m, std::uint64_t index) {
  if (index == 0) throw ArgumentError("dense family is indexed from 1");
  if (m == 0) throw ArgumentError("value dimension must be positive");
  Integer remaining = Integer(std::to_string(index - 1), 10);
  for (int stage = 1;; ++stage) {
    for (int k = 0; k < stage; ++k) {
      const int r = stage - k;
      LevelLayout layout(config, k);
      const std::size_t digits = layout.level_size(k) * m;
      const auto alphabet = gaussian_alphabet(r);
      Integer size;
      mpz_ui_pow_ui(size.get_mpz_t(), alphabet.size(), digits);
      if (remaining >= size) {
        remaining -= size;
        continue;
      }
      // Most significant digit = first vertex, first coordinate.
      std::vector<CRational> coords(digits);
      Integer base = static_cast<unsigned long>(alphabet.size());
      for (std::size_t d = digits; d-- > 0;) {
        Integer digit = remaining % base;
        remaining /= base;
        coords[d] = alphabet[digit.get_ui()];
      }
      SimpleFunction out;
      out.level = k;
      for (std::size_t v = 0; v < layout.level_size(k); ++v)
        out.values.emplace_back(std::vector<CRational>(coords.begin() + v * m,
                                                       coords.begin() + (v + 1) * m));
      return out;
    }
  }
}

}  // namespace utree
