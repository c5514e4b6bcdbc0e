#include "utree/builder.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "utree/errors.hpp"

namespace utree {

void AuditReport::fail(std::string msg) {
  ++failure_count;
  if (failures.size() < 20) failures.push_back(std::move(msg));
}

namespace {

double quotient_to_double(const Integer& num, const Integer& den) {
  if (sgn(num) == 0) return 0.0;
  long en = 0;
  long ed = 0;
  double mn = mpz_get_d_2exp(&en, num.get_mpz_t());
  double md = mpz_get_d_2exp(&ed, den.get_mpz_t());
  return std::ldexp(mn / md, static_cast<int>(std::max(-2000L, std::min(2000L, en - ed))));
}

constexpr long kHugeBits = 80;
constexpr long kSmallBits = 60;

bool coordinate_is_huge(const CRational& c) {
  return (sgn(c.re) != 0 && magnitude_bits(c.re) > kHugeBits) ||
         (sgn(c.im) != 0 && magnitude_bits(c.im) > kHugeBits);
}

bool coordinate_is_small(const CRational& c) {
  return (sgn(c.re) == 0 || magnitude_bits(c.re) < kSmallBits) &&
         (sgn(c.im) == 0 || magnitude_bits(c.im) < kSmallBits);
}

// |v - t|, skipping the exact subtraction when v dwarfs t: the bounded
// ratio of such a distance rounds to 1 in double precision anyway.
double class_distance(const Value& v, const Value& t) {
  if (v.mode() == Mode::exact) {
    for (std::size_t i = 0; i < v.dim(); ++i)
      if (coordinate_is_huge(v.exact()[i]) && coordinate_is_small(t.exact()[i]))
        return std::numeric_limits<double>::infinity();
  }
  return distance(v, t);
}

// x <- t + (x - t) * s, in place.
void force_coordinate(CRational& x, const CRational& t, const CRational& s) {
  if (!s.is_real()) {
    x -= t;
    x *= s;
    x += t;
    return;
  }
  const bool integral_scale = s.re.get_den() == 1;
  auto step = [&](Rational& a, const Rational& b) {
    if (integral_scale && a.get_den() == 1 && b.get_den() == 1) {
      mpz_ptr n = a.get_num_mpz_t();
      mpz_sub(n, n, b.get_num_mpz_t());
      mpz_mul(n, n, s.re.get_num_mpz_t());
      mpz_add(n, n, b.get_num_mpz_t());
      return;
    }
    mpq_sub(a.get_mpq_t(), a.get_mpq_t(), b.get_mpq_t());
    mpq_mul(a.get_mpq_t(), a.get_mpq_t(), s.re.get_mpq_t());
    mpq_add(a.get_mpq_t(), a.get_mpq_t(), b.get_mpq_t());
  };
  step(x.re, t.re);
  if (sgn(x.im) != 0 || sgn(t.im) != 0) step(x.im, t.im);
}

class Merger {
 public:
  Merger(LevelProfile& out, std::size_t expected) : out_(out) {
    std::size_t cap = 16;
    while (cap < 2 * expected + 8) cap <<= 1;
    slots_.assign(cap, Slot{});
  }

  template <class V>
  std::uint32_t add(std::uint32_t anchor, V&& value, Integer weight) {
    const std::size_t h = value.hash() * 0x9e3779b97f4a7c15ULL ^ anchor;
    std::size_t pos = h & (slots_.size() - 1);
    for (;; pos = (pos + 1) & (slots_.size() - 1)) {
      Slot& slot = slots_[pos];
      if (slot.index == kEmpty) break;
      if (slot.hash != h) continue;
      ValueClass& c = out_.classes[slot.index];
      if (c.anchor == anchor && c.value == value) {
        c.weight += weight;
        return slot.index;
      }
    }
    const auto idx = static_cast<std::uint32_t>(out_.classes.size());
    out_.classes.push_back(ValueClass{anchor, Value(std::forward<V>(value)), std::move(weight)});
    slots_[pos] = Slot{h, idx};
    if (2 * out_.classes.size() > slots_.size()) grow();
    return idx;
  }

 private:
  static constexpr std::uint32_t kEmpty = 0xffffffffu;
  struct Slot {
    std::size_t hash = 0;
    std::uint32_t index = kEmpty;
  };

  void grow() {
    std::vector<Slot> old(slots_.size() * 2, Slot{});
    old.swap(slots_);
    for (const auto& s : old) {
      if (s.index == kEmpty) continue;
      std::size_t pos = s.hash & (slots_.size() - 1);
      while (slots_[pos].index != kEmpty) pos = (pos + 1) & (slots_.size() - 1);
      slots_[pos] = s;
    }
  }

  LevelProfile& out_;
  std::vector<Slot> slots_;
};

LevelProfile advance(const LevelProfile& prev, const LocalRule& rule,
                     const std::vector<Value>* target_by_anchor, const CorrectionPolicy& policy,
                     Lineage& link) {
  const Integer den = rule.q_denominator();
  std::vector<Integer> qint;
  qint.reserve(rule.branching());
  for (const auto& q : rule.q) qint.push_back(q.get_num() * (den / q.get_den()));
  const std::size_t star = policy.pick(rule);
  const CRational inv_star = rule.w[star].inverse();

  LevelProfile next;
  next.level = prev.level + 1;
  next.denominator = prev.denominator * den;
  next.classes.reserve(prev.classes.size() + 4);
  link.child_class.assign(prev.classes.size(), {});
  Merger merger(next, prev.classes.size() + 4);
  const Integer rest = den - qint[star];
  for (std::size_t ci = 0; ci < prev.classes.size(); ++ci) {
    const ValueClass& c = prev.classes[ci];
    auto& children = link.child_class[ci];
    children.resize(rule.branching());
    if (!target_by_anchor || c.value == (*target_by_anchor)[c.anchor]) {
      const auto idx = merger.add(c.anchor, c.value, c.weight * den);
      std::fill(children.begin(), children.end(), idx);
      continue;
    }
    const Value& t = (*target_by_anchor)[c.anchor];
    // Sum of the non-correction harmonic weights is 1 - w*, so the forced
    // value is t + (v - t) / w*.
    Value forced = c.value;
    if (forced.mode() == Mode::exact) {
      for (std::size_t i = 0; i < forced.dim(); ++i)
        force_coordinate(forced.exact()[i], t.exact()[i], inv_star);
    } else {
      forced -= t;
      forced *= inv_star;
      forced += t;
    }
    const auto matched = merger.add(c.anchor, t, c.weight * rest);
    const auto corrected = merger.add(c.anchor, std::move(forced), c.weight * qint[star]);
    for (std::size_t i = 0; i < rule.branching(); ++i) children[i] = i == star ? corrected : matched;
  }
  return next;
}

}  // namespace

double profile_distance(const LevelProfile& profile, const std::vector<Value>& target_by_anchor) {
  double sum = 0.0;
  for (const auto& c : profile.classes)
    sum += quotient_to_double(c.weight, profile.denominator) *
           bounded_ratio(class_distance(c.value, target_by_anchor[c.anchor]));
  return sum;
}

std::vector<std::vector<Value>> anchor_targets(const TreeConfig& config,
                                               std::span<const Target> targets, int anchor_depth) {
  LevelLayout layout(config, anchor_depth);
  std::vector<std::vector<Value>> out;
  for (const auto& t : targets) {
    if (t.h.level > anchor_depth) throw ArgumentError("target level above the anchor level");
    check_shape(layout, t.h);
    std::vector<Value> row;
    row.reserve(layout.level_size(anchor_depth));
    for (std::size_t a = 0; a < layout.level_size(anchor_depth); ++a)
      row.push_back(t.h.values[layout.ancestor(anchor_depth, a, t.h.level)]);
    out.push_back(std::move(row));
  }
  return out;
}

BuildResult build(const TreeConfig& config, std::span<const Target> targets,
                  const Schedule& schedule, const Value& initial, const BuildOptions& options) {
  validate(config, schedule, targets);
  for (const auto& t : targets)
    if (t.h.mode() != initial.mode() || t.h.dim() != initial.dim())
      throw ModeError("target '" + t.label + "' does not match the initial value's shape");

  const std::uint64_t H = schedule.horizon;
  int A = std::max(options.min_anchor_depth, config.homogeneous_depth());
  for (const auto& t : targets) A = std::max(A, t.h.level);
  if (A > config.depth_cap()) throw CapError("anchor level exceeds the depth cap");
  const int dense = static_cast<int>(std::min<std::uint64_t>(H, std::max(A, options.dense_depth)));

  BuildResult result;
  result.horizon = H;
  result.anchor_depth = A;
  result.log.resize(H);
  for (std::uint64_t n = 1; n <= H; ++n) result.log[n - 1].level = n;
  for (std::size_t k = 0; k < targets.size(); ++k) result.tolerances.push_back(schedule.tolerance(k));

  // Dense prefix.
  HarmonicTruncation f = constant_truncation(config, 0, initial);
  for (int n = 1; n <= dense; ++n) {
    auto block = schedule.block_at(static_cast<std::uint64_t>(n));
    if (block) {
      const Target& t = targets[schedule.blocks[*block].target];
      f = corrected_extend(config, f, refine(config, t.h, n), options.policy).f;
    } else {
      f = constant_extend(config, f, n);
    }
  }
  result.prefix = f;

  // Log of the levels above the anchor, read off the dense prefix.
  if (A > 0 && dense > 0) {
    LevelLayout layout(config, dense);
    for (int n = 1; n < A && n <= dense; ++n) {
      LevelRecord& rec = result.log[n - 1];
      rec.block = schedule.block_at(static_cast<std::uint64_t>(n));
      const SimpleFunction proj = level_projection(config, f, n);
      for (const auto& t : targets) rec.distance.push_back(probability_metric(config, proj, t.h));
      if (rec.block) {
        const SimpleFunction tgt = refine(config, targets[schedule.blocks[*rec.block].target].h, n);
        Rational un = 0;
        for (std::size_t i = 0; i < layout.level_size(n); ++i)
          if (!(proj.values[i] == tgt.values[i])) un += layout.measure(n, i);
        rec.unmatched = un;
      }
    }
  }

  if (static_cast<std::uint64_t>(A) > H) return result;

  const auto by_anchor = anchor_targets(config, targets, A);
  std::unique_ptr<Auditor> auditor;
  std::vector<LevelObserver*> observers;
  if (options.audit) {
    auditor = std::make_unique<Auditor>(config, targets, A);
    observers.push_back(auditor.get());
  }
  observers.insert(observers.end(), options.observers.begin(), options.observers.end());

  auto fill_record = [&](const LevelProfile& p) -> LevelRecord* {
    if (p.level == 0) return nullptr;
    LevelRecord& rec = result.log[p.level - 1];
    rec.block = schedule.block_at(p.level);
    rec.distance.clear();
    for (const auto& row : by_anchor) rec.distance.push_back(profile_distance(p, row));
    if (rec.block) {
      const auto& row = by_anchor[schedule.blocks[*rec.block].target];
      Integer un = 0;
      for (const auto& c : p.classes)
        if (!(c.value == row[c.anchor])) un += c.weight;
      rec.unmatched = Rational(un, p.denominator);
      rec.unmatched->canonicalize();
    }
    return &rec;
  };

  // Anchor-level profile: one class per anchor vertex.
  LevelProfile current;
  {
    LevelLayout layout(config, A);
    current.level = static_cast<std::uint64_t>(A);
    Integer den = 1;
    for (std::size_t a = 0; a < layout.level_size(A); ++a)
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), layout.measure(A, a).get_den_mpz_t());
    current.denominator = den;
    for (std::size_t a = 0; a < layout.level_size(A); ++a) {
      const Rational& p = layout.measure(A, a);
      current.classes.push_back(ValueClass{static_cast<std::uint32_t>(a), f.at(layout, A, a),
                                           p.get_num() * (den / p.get_den())});
    }
  }
  {
    LevelRecord* rec = fill_record(current);
    for (auto* o : observers) o->observe(nullptr, nullptr, current, rec);
    result.profiles.push_back(current);
  }

  for (std::uint64_t n = static_cast<std::uint64_t>(A) + 1; n <= H; ++n) {
    auto block = schedule.block_at(n);
    const std::vector<Value>* tgt = block ? &by_anchor[schedule.blocks[*block].target] : nullptr;
    Lineage link;
    LevelProfile next = advance(current, config.depth_rule(static_cast<int>(n - 1)), tgt,
                                options.policy, link);
    LevelRecord* rec = fill_record(next);
    for (auto* o : observers) o->observe(&current, &link, next, rec);
    if (options.keep_profiles || n <= static_cast<std::uint64_t>(dense)) {
      result.lineages.push_back(std::move(link));
      result.profiles.push_back(next);
    }
    current = std::move(next);
  }

  result.final_profile = std::move(current);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    std::vector<std::uint64_t> hits;
    if (result.tolerances[k]) {
      const double eps = to_double(*result.tolerances[k]);
      for (const auto& rec : result.log)
        if (rec.distance.size() > k && rec.distance[k] < eps) hits.push_back(rec.level);
    }
    result.visits.emplace_back(std::move(hits), H);
  }
  if (auditor) result.audit = auditor->report();
  return result;
}

}  // namespace utree
