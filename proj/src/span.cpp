#include "utree/span.hpp"

#include <climits>
#include <cmath>
#include <limits>
#include <sstream>

#include "utree/errors.hpp"

namespace utree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Bits = MagnitudeBits;

Bits bits_of(const CRational& x) {
  if (x.is_zero()) return {};
  long b = LONG_MIN;
  if (sgn(x.re) != 0) b = magnitude_bits(x.re);
  if (sgn(x.im) != 0) b = std::max(b, magnitude_bits(x.im));
  return {b - 1, b + 2, false};
}

double modulus(const CRational& c) { return std::abs(c.to_complex()); }

class Scratch {
 public:
  // |v - t| over coordinates [first, first + count).
  double range_distance(const Value& v, const Value& t, std::size_t first, std::size_t count) {
    double acc = 0.0;
    if (v.mode() == Mode::floating) {
      for (std::size_t j = first; j < first + count; ++j) acc = std::hypot(acc, std::abs(v.approx()[j] - t.approx()[j]));
      return acc;
    }
    for (std::size_t j = first; j < first + count; ++j) {
      const CRational& x = v.exact()[j];
      const CRational& y = t.exact()[j];
      const Bits bx = bits_of(x);
      const Bits by = bits_of(y);
      if (!bx.zero && bx.lo >= 80 && (by.zero || by.hi <= bx.lo - 4)) return kInf;
      mpq_sub(d_re_.get_mpq_t(), x.re.get_mpq_t(), y.re.get_mpq_t());
      mpq_sub(d_im_.get_mpq_t(), x.im.get_mpq_t(), y.im.get_mpq_t());
      acc = std::hypot(acc, to_double(d_re_), to_double(d_im_));
    }
    return acc;
  }

  // Caches coordinate magnitudes of one class and its target.
  void prepare(const Value& v, const Value& t) {
    if (v.mode() != Mode::exact) return;
    bv_.resize(v.dim());
    bt_.resize(v.dim());
    for (std::size_t j = 0; j < v.dim(); ++j) {
      bv_[j] = bits_of(v.exact()[j]);
      bt_[j] = bits_of(t.exact()[j]);
    }
  }

  // |sum_i a_i (v_i - t_i)| where v_i, t_i are the m-blocks of stacked values.
  // prepare(v, t) must have been called; `ba` holds the bits of `a`.
  double combo_distance(const Value& v, const Value& t, const std::vector<CRational>& a,
                        const std::vector<Bits>& ba, std::size_t m) {
    if (v.mode() == Mode::floating) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        std::complex<double> z;
        for (std::size_t i = 0; i < a.size(); ++i)
          z += a[i].to_complex() * (v.approx()[i * m + j] - t.approx()[i * m + j]);
        acc = std::hypot(acc, std::abs(z));
      }
      return acc;
    }
    for (std::size_t j = 0; j < m; ++j)
      if (dominated(ba, m, j)) return kInf;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      mpq_set_ui(z_re_.get_mpq_t(), 0, 1);
      mpq_set_ui(z_im_.get_mpq_t(), 0, 1);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        const CRational& x = v.exact()[i * m + j];
        const CRational& y = t.exact()[i * m + j];
        mpq_sub(d_re_.get_mpq_t(), x.re.get_mpq_t(), y.re.get_mpq_t());
        mpq_sub(d_im_.get_mpq_t(), x.im.get_mpq_t(), y.im.get_mpq_t());
        mul_add(a[i].re, d_re_, z_re_);
        mul_sub(a[i].im, d_im_, z_re_);
        mul_add(a[i].re, d_im_, z_im_);
        mul_add(a[i].im, d_re_, z_im_);
      }
      acc = std::hypot(acc, to_double(z_re_), to_double(z_im_));
    }
    return acc;
  }

 private:
  void mul_add(const Rational& c, const Rational& d, Rational& acc) {
    if (sgn(c) == 0 || sgn(d) == 0) return;
    mpq_mul(p_.get_mpq_t(), c.get_mpq_t(), d.get_mpq_t());
    mpq_add(acc.get_mpq_t(), acc.get_mpq_t(), p_.get_mpq_t());
  }
  void mul_sub(const Rational& c, const Rational& d, Rational& acc) {
    if (sgn(c) == 0 || sgn(d) == 0) return;
    mpq_mul(p_.get_mpq_t(), c.get_mpq_t(), d.get_mpq_t());
    mpq_sub(acc.get_mpq_t(), acc.get_mpq_t(), p_.get_mpq_t());
  }

  // One term outweighs the others so much that |z_j| >= 2^64, where the
  // bounded ratio rounds to exactly 1.
  bool dominated(const std::vector<Bits>& ba, std::size_t m, std::size_t j) const {
    long best_lo = LONG_MIN;
    long best_upper = LONG_MIN;
    long second_upper = LONG_MIN;
    std::size_t best = ba.size();
    for (std::size_t i = 0; i < ba.size(); ++i) {
      if (ba[i].zero) continue;
      const Bits& bx = bv_[i * m + j];
      const Bits& by = bt_[i * m + j];
      if (bx.zero && by.zero) continue;
      const long upper = ba[i].hi + std::max(bx.zero ? LONG_MIN : bx.hi, by.zero ? LONG_MIN : by.hi) + 1;
      long lo = LONG_MIN;
      if (!bx.zero && (by.zero || by.hi <= bx.lo - 4)) lo = ba[i].lo + bx.lo - 1;
      if (lo > best_lo) {
        if (best != ba.size()) second_upper = std::max(second_upper, best_upper);
        best_lo = lo;
        best_upper = upper;
        best = i;
      } else {
        second_upper = std::max(second_upper, upper);
      }
    }
    if (best == ba.size()) return false;
    const long spread = static_cast<long>(std::ceil(std::log2(static_cast<double>(ba.size())))) + 1;
    if (second_upper != LONG_MIN && best_lo < second_upper + spread) return false;
    return best_lo - 1 >= 64;
  }

  std::vector<Bits> bv_, bt_;
  Rational d_re_, d_im_, z_re_, z_im_, p_;
};

double measure_to_double(const Integer& weight, const Integer& den, Integer& scaled, Integer& q) {
  mpz_mul_2exp(scaled.get_mpz_t(), weight.get_mpz_t(), 64);
  mpz_tdiv_q(q.get_mpz_t(), scaled.get_mpz_t(), den.get_mpz_t());
  return std::ldexp(q.get_d(), -64);
}

HarmonicTruncation slice(const HarmonicTruncation& f, std::size_t first, std::size_t count) {
  HarmonicTruncation out{f.depth, count, f.mode, {}};
  out.values.reserve(f.values.size());
  for (const auto& v : f.values) out.values.push_back(v.slice(first, count));
  return out;
}

HarmonicTruncation to_mode(HarmonicTruncation f, Mode mode) {
  if (f.mode == mode) return f;
  for (auto& v : f.values) v = v.to_floating();
  f.mode = mode;
  return f;
}

SimpleFunction to_mode(SimpleFunction f, Mode mode) {
  if (f.mode() == mode) return f;
  for (auto& v : f.values) v = v.to_floating();
  return f;
}

}  // namespace

std::vector<JointTarget> pattern_targets(std::span<const Target> base, std::size_t coordinates,
                                         std::size_t position) {
  if (position >= coordinates) throw ArgumentError("pattern position beyond the coordinates");
  std::vector<JointTarget> out;
  for (const auto& t : base) {
    JointTarget jt;
    const Value zero = Value::zero(t.h.dim(), t.h.mode());
    for (std::size_t i = 0; i < coordinates; ++i)
      jt.parts.push_back(i == position ? t.h : SimpleFunction{0, {zero}});
    jt.label = t.label + "@" + std::to_string(position + 1);
    out.push_back(std::move(jt));
  }
  return out;
}

std::vector<JointTarget> dense_tuples(const TreeConfig& config, std::size_t m,
                                      std::size_t coordinates, std::uint64_t first,
                                      std::size_t count) {
  std::vector<JointTarget> out;
  for (std::size_t t = 0; t < count; ++t) {
    JointTarget jt;
    const std::uint64_t start = first + t * coordinates;
    for (std::size_t i = 0; i < coordinates; ++i) jt.parts.push_back(dense_family(config, m, start + i));
    jt.label = "dense" + std::to_string(start);
    out.push_back(std::move(jt));
  }
  return out;
}

bool Combo::is_zero() const {
  for (const auto& c : a)
    if (!c.is_zero()) return false;
  return true;
}

std::string Combo::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) out += ", ";
    out += format_rational(a[i].re);
    if (!a[i].is_real()) out += (sgn(a[i].im) < 0 ? "-" : "+") + format_rational(abs(a[i].im)) + "i";
  }
  return out + ")";
}

double scaling_bound(const CRational& c, double beta) { return std::max(1.0, modulus(c)) * beta; }

double coordinate_tolerance(const Combo& c, double epsilon, std::size_t i) {
  if (c.s() == 0) throw ArgumentError("empty combination");
  return epsilon / (static_cast<double>(c.s()) * std::max(1.0, modulus(c.a.at(i))));
}

HarmonicTruncation JointFamily::coordinate(std::size_t i) const {
  if (i >= coordinates) throw ArgumentError("coordinate index out of range");
  const HarmonicTruncation& prefix = build.prefix;
  HarmonicTruncation part = slice(prefix, i * m, m);
  const HarmonicTruncation& g = offsets[i].g;
  HarmonicTruncation offset = g.depth >= prefix.depth ? truncate(config, g, prefix.depth)
                                                      : constant_extend(config, g, prefix.depth);
  return add(part, offset);
}

Interval dense_closeness(const JointFamily& family, std::size_t i) {
  HarmonicTruncation f = family.coordinate(i);
  const HarmonicTruncation& phi = family.dense.at(i);
  const int depth = std::min(f.depth, phi.depth);
  return pointwise_metric(family.config, truncate(family.config, f, depth),
                          truncate(family.config, phi, depth));
}

HarmonicTruncation combo(const JointFamily& family, const Combo& c) {
  if (c.s() > family.coordinates)
    throw ArgumentError("combination uses " + std::to_string(c.s()) + " coordinates, family has " +
                        std::to_string(family.coordinates));
  if (c.s() == 0) return constant_truncation(family.config, family.build.prefix.depth,
                                             Value::zero(family.m, family.mode));
  std::vector<HarmonicTruncation> parts;
  for (std::size_t i = 0; i < c.s(); ++i) parts.push_back(family.coordinate(i));
  return linear_combination(family.config, c.a, parts);
}

CertificateObserver::CertificateObserver(const JointFamily& family, std::vector<Combo> combos,
                                         Rational epsilon)
    : family_(family), combos_(std::move(combos)), epsilon_(std::move(epsilon)) {
  eps_ = to_double(epsilon_);
  for (const auto& c : combos_)
    if (c.s() > family.coordinates)
      throw ArgumentError("combination uses more coordinates than the family has");
  stacked_by_anchor_ = anchor_targets(family.config, family.stacked_targets, family.anchor_depth);
  for (const auto& c : combos_) {
    std::vector<Bits> bits;
    for (const auto& x : c.a) bits.push_back(bits_of(x));
    combo_bits_.push_back(std::move(bits));
  }
  entries_.resize(combos_.size());
  entry_targets_.resize(combos_.size());
  beta_.resize(family.schedule.horizon);
}

void CertificateObserver::observe(const LevelProfile*, const Lineage*, const LevelProfile& current,
                                  const LevelRecord*) {
  const std::uint64_t n = current.level;
  if (n == 0) return;
  const auto block = family_.schedule.block_at(n);
  if (!block) return;
  const std::size_t k = family_.schedule.blocks[*block].target;
  const auto& targets = stacked_by_anchor_[k];
  const std::size_t J = family_.coordinates;
  const std::size_t m = family_.m;

  Integer scaled, q;
  std::vector<double> measure(current.classes.size());
  for (std::size_t c = 0; c < current.classes.size(); ++c)
    measure[c] = measure_to_double(current.classes[c].weight, current.denominator, scaled, q);

  Scratch scratch;
  std::vector<double>& beta = beta_[n - 1];
  beta.assign(J, 0.0);
  for (std::size_t c = 0; c < current.classes.size(); ++c) {
    const ValueClass& cls = current.classes[c];
    for (std::size_t i = 0; i < J; ++i)
      beta[i] += measure[c] * bounded_ratio(scratch.range_distance(cls.value, targets[cls.anchor], i * m, m));
  }

  std::vector<std::size_t> active;
  std::vector<double> predicted(combos_.size(), 0.0);
  std::vector<double> measured(combos_.size(), 0.0);
  for (std::size_t ci = 0; ci < combos_.size(); ++ci) {
    const Combo& combo = combos_[ci];
    if (combo.is_zero()) continue;
    for (std::size_t i = 0; i < combo.s(); ++i) predicted[ci] += scaling_bound(combo.a[i], beta[i]);
    if (predicted[ci] < eps_) active.push_back(ci);
  }
  if (!active.empty()) {
    for (std::size_t c = 0; c < current.classes.size(); ++c) {
      const ValueClass& cls = current.classes[c];
      scratch.prepare(cls.value, targets[cls.anchor]);
      for (auto ci : active)
        measured[ci] += measure[c] * bounded_ratio(scratch.combo_distance(
                                         cls.value, targets[cls.anchor], combos_[ci].a, combo_bits_[ci], m));
    }
  }
  for (auto ci : active) {
    CertificateEntry e;
    e.level = n;
    e.predicted_bound = predicted[ci];
    e.measured = measured[ci];
    e.target_label = family_.targets[k].label;
    e.sound = e.measured < eps_ && e.measured <= e.predicted_bound + 1e-12;
    entries_[ci].push_back(std::move(e));
    entry_targets_[ci].push_back(k);
  }
}

std::vector<SpanCertificate> CertificateObserver::finish() const {
  std::vector<SpanCertificate> out;
  const std::uint64_t H = family_.schedule.horizon;
  for (std::size_t ci = 0; ci < combos_.size(); ++ci) {
    SpanCertificate cert;
    cert.combo = combos_[ci];
    cert.epsilon = epsilon_;
    cert.entries = entries_[ci];
    std::vector<std::uint64_t> levels;
    std::vector<std::vector<std::uint64_t>> split(family_.targets.size());
    for (std::size_t e = 0; e < cert.entries.size(); ++e) {
      levels.push_back(cert.entries[e].level);
      split[entry_targets_[ci][e]].push_back(cert.entries[e].level);
      if (!cert.entries[e].sound) ++cert.unsound;
    }
    cert.levels = IndexSet(std::move(levels), H);
    for (auto& s : split) cert.by_target.emplace_back(std::move(s), H);
    out.push_back(std::move(cert));
  }
  return out;
}

JointFamily joint_build(const TreeConfig& config, std::vector<JointTarget> targets,
                        const Schedule& schedule, const JointOptions& options) {
  if (targets.empty()) throw ArgumentError("joint build needs at least one joint target");
  JointFamily fam(config);
  fam.coordinates = targets.front().parts.size();
  if (fam.coordinates == 0) throw ArgumentError("joint targets need at least one coordinate");
  fam.m = targets.front().parts.front().dim();
  fam.mode = targets.front().parts.front().mode();
  for (const auto& jt : targets) {
    if (jt.parts.size() != fam.coordinates)
      throw ArgumentError("joint target '" + jt.label + "' has the wrong number of coordinates");
    for (const auto& p : jt.parts)
      if (p.dim() != fam.m || p.mode() != fam.mode)
        throw ModeError("joint target '" + jt.label + "' mixes shapes or modes");
  }
  fam.targets = std::move(targets);
  fam.schedule = schedule;

  // Offsets: g_i flattens the i-th dense element against the constant start.
  const Value zero = Value::zero(fam.m, fam.mode);
  int flat = 0;
  for (std::size_t i = 0; i < fam.coordinates; ++i) flat = std::max(flat, flatten_depth(config, i + 1));
  fam.flat_depth = flat;
  for (std::size_t i = 0; i < fam.coordinates; ++i) {
    SimpleFunction element = to_mode(dense_family(config, fam.m, i + 1), fam.mode);
    const int depth = std::max(flat, element.level);
    HarmonicTruncation phi = to_mode(harmonic_lift(config, element, depth), fam.mode);
    HarmonicTruncation start = constant_truncation(config, depth, zero);
    fam.offsets.push_back(flatten_perturbation(config, start, phi, i + 1));
    fam.dense.push_back(std::move(phi));
  }

  int A = std::max(config.homogeneous_depth(), flat);
  for (const auto& jt : fam.targets)
    for (const auto& p : jt.parts) A = std::max(A, p.level);
  fam.anchor_depth = A;
  for (const auto& b : schedule.blocks)
    if (b.transition_start <= static_cast<std::uint64_t>(flat) ||
        b.transition_start < static_cast<std::uint64_t>(A))
      throw ScheduleError("joint schedules must leave levels up to " +
                          std::to_string(std::max(flat, A - 1)) + " unscheduled");

  // Stacked targets u_i - omega(g_i), at a level where both are measurable.
  for (const auto& jt : fam.targets) {
    int level = 0;
    for (std::size_t i = 0; i < fam.coordinates; ++i)
      level = std::max({level, jt.parts[i].level, fam.offsets[i].flat_depth});
    LevelLayout layout(config, level);
    std::vector<SimpleFunction> shifted;
    for (std::size_t i = 0; i < fam.coordinates; ++i) {
      const auto& off = fam.offsets[i];
      SimpleFunction g = refine(config, level_projection(config, off.g, off.flat_depth), level);
      shifted.push_back(subtract(config, refine(config, jt.parts[i], level), g));
    }
    SimpleFunction stacked{level, {}};
    for (std::size_t x = 0; x < layout.level_size(level); ++x) {
      std::vector<Value> parts;
      for (const auto& s : shifted) parts.push_back(s.values[x]);
      stacked.values.push_back(Value::stack(parts));
    }
    fam.stacked_targets.push_back(Target{std::move(stacked), jt.label});
  }

  {
    LevelLayout layout(config, A);
    fam.anchor_offsets_.resize(fam.coordinates);
    for (std::size_t i = 0; i < fam.coordinates; ++i) {
      const auto& off = fam.offsets[i];
      for (std::size_t a = 0; a < layout.level_size(A); ++a)
        fam.anchor_offsets_[i].push_back(off.g.at(layout, off.flat_depth, layout.ancestor(A, a, off.flat_depth)));
    }
  }

  CertificateObserver observer(fam, options.combos, options.certificate_epsilon);
  BuildOptions bo = options.build;
  bo.min_anchor_depth = std::max(bo.min_anchor_depth, A);
  bo.observers.push_back(&observer);
  std::vector<Value> zeros(fam.coordinates, zero);
  BuildResult result = build(config, fam.stacked_targets, schedule, Value::stack(zeros), bo);
  if (result.anchor_depth != A) throw ArgumentError("anchor level moved during the joint build");
  fam.beta = observer.beta();
  fam.certificates = observer.finish();
  fam.build = std::move(result);
  return fam;
}

std::vector<SpanCertificate> span_certificates(const JointFamily& family,
                                               const std::vector<Combo>& combos,
                                               const Rational& epsilon) {
  CertificateObserver observer(family, combos, epsilon);
  const auto& b = family.build;
  const std::uint64_t first = static_cast<std::uint64_t>(family.anchor_depth);
  const bool stored = b.horizon >= first && b.profiles.size() == b.horizon - first + 1;
  if (stored) {
    for (const auto& p : b.profiles) observer.observe(nullptr, nullptr, p, nullptr);
  } else {
    BuildOptions bo;
    bo.audit = false;
    bo.dense_depth = 0;
    bo.min_anchor_depth = family.anchor_depth;
    bo.observers.push_back(&observer);
    std::vector<Value> zeros(family.coordinates, Value::zero(family.m, family.mode));
    build(family.config, family.stacked_targets, family.schedule, Value::stack(zeros), bo);
  }
  return observer.finish();
}

SpanCertificate span_certificate(const JointFamily& family, const Combo& c,
                                 const Rational& epsilon) {
  return span_certificates(family, {c}, epsilon).front();
}

}  // namespace utree
