#include <cmath>
#include <map>
#include <sstream>

#include "utree/builder.hpp"
#include "utree/errors.hpp"

namespace utree {

namespace {

// |v - t| through exact coordinate differences held in a reused temporary.
double exact_difference_norm(const Value& v, const Value& t, Rational& tmp) {
  if (v.mode() != Mode::exact) return distance(v, t);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    mpq_sub(tmp.get_mpq_t(), v.exact()[i].re.get_mpq_t(), t.exact()[i].re.get_mpq_t());
    const double re = to_double(tmp);
    mpq_sub(tmp.get_mpq_t(), v.exact()[i].im.get_mpq_t(), t.exact()[i].im.get_mpq_t());
    acc = std::hypot(acc, re, to_double(tmp));
  }
  return acc;
}

// Checks parent = sum_i w_i * child_i exactly. Integer-valued operands use
// the harmonic weights scaled to integers by their common denominator.
class HarmonicChecker {
 public:
  explicit HarmonicChecker(const LocalRule& rule) : rule_(rule) {
    for (const auto& w : rule.w) {
      mpz_lcm(scale_.get_mpz_t(), scale_.get_mpz_t(), w.re.get_den_mpz_t());
      mpz_lcm(scale_.get_mpz_t(), scale_.get_mpz_t(), w.im.get_den_mpz_t());
    }
    for (const auto& w : rule.w) {
      kre_.push_back(w.re.get_num() * (scale_ / w.re.get_den()));
      kim_.push_back(w.im.get_num() * (scale_ / w.im.get_den()));
    }
  }

  bool holds(const Value& parent, const std::vector<const Value*>& children) {
    if (parent.mode() != Mode::exact || !integral(parent, children)) {
      Value acc = Value::zero(parent.dim(), parent.mode());
      for (std::size_t i = 0; i < children.size(); ++i) acc += rule_.w[i] * *children[i];
      if (parent.mode() != Mode::exact) return distance(acc, parent) <= kFloatHarmonicTolerance;
      return acc == parent;
    }
    for (std::size_t j = 0; j < parent.dim(); ++j) {
      mpz_set_ui(re_.get_mpz_t(), 0);
      mpz_set_ui(im_.get_mpz_t(), 0);
      for (std::size_t i = 0; i < children.size(); ++i) {
        const CRational& x = children[i]->exact()[j];
        mpz_addmul(re_.get_mpz_t(), kre_[i].get_mpz_t(), x.re.get_num_mpz_t());
        mpz_submul(re_.get_mpz_t(), kim_[i].get_mpz_t(), x.im.get_num_mpz_t());
        mpz_addmul(im_.get_mpz_t(), kre_[i].get_mpz_t(), x.im.get_num_mpz_t());
        mpz_addmul(im_.get_mpz_t(), kim_[i].get_mpz_t(), x.re.get_num_mpz_t());
      }
      const CRational& p = parent.exact()[j];
      mpz_submul(re_.get_mpz_t(), scale_.get_mpz_t(), p.re.get_num_mpz_t());
      mpz_submul(im_.get_mpz_t(), scale_.get_mpz_t(), p.im.get_num_mpz_t());
      if (sgn(re_) != 0 || sgn(im_) != 0) return false;
    }
    return true;
  }

 private:
  static bool integral(const Value& v) {
    for (const auto& c : v.exact())
      if (c.re.get_den() != 1 || c.im.get_den() != 1) return false;
    return true;
  }
  static bool integral(const Value& parent, const std::vector<const Value*>& children) {
    if (!integral(parent)) return false;
    for (const auto* c : children)
      if (!integral(*c)) return false;
    return true;
  }

  const LocalRule& rule_;
  Integer scale_ = 1;
  std::vector<Integer> kre_, kim_;
  Integer re_, im_;
};

// weight / den in double via a reused integer quotient.
class MeasureConverter {
 public:
  double operator()(const Integer& weight, const Integer& den) {
    mpz_mul_2exp(scaled_.get_mpz_t(), weight.get_mpz_t(), 64);
    mpz_tdiv_q(q_.get_mpz_t(), scaled_.get_mpz_t(), den.get_mpz_t());
    return std::ldexp(q_.get_d(), -64);
  }

 private:
  Integer scaled_, q_;
};

std::string level_tag(std::uint64_t n) { return "level " + std::to_string(n) + ": "; }

}  // namespace

Auditor::Auditor(const TreeConfig& config, std::span<const Target> targets, int anchor_depth)
    : config_(config), anchor_targets_(utree::anchor_targets(config, targets, anchor_depth)) {
  LevelLayout layout(config, anchor_depth);
  for (std::size_t a = 0; a < layout.level_size(anchor_depth); ++a)
    anchor_measure_.push_back(layout.measure(anchor_depth, a));
}

void Auditor::observe(const LevelProfile* previous, const Lineage* link,
                      const LevelProfile& current, const LevelRecord* record) {
  const std::string tag = level_tag(current.level);
  ++report_.levels_checked;
  report_.classes_checked += current.classes.size();

  std::vector<Integer> per_anchor(anchor_measure_.size());
  Integer total = 0;
  for (const auto& c : current.classes) {
    if (c.anchor >= per_anchor.size()) {
      report_.fail(tag + "class anchor out of range");
      return;
    }
    if (sgn(c.weight) <= 0) report_.fail(tag + "non-positive class weight");
    per_anchor[c.anchor] += c.weight;
    total += c.weight;
  }
  if (total != current.denominator) report_.fail(tag + "total measure differs from 1");
  for (std::size_t a = 0; a < per_anchor.size(); ++a) {
    const Rational& m = anchor_measure_[a];
    if (per_anchor[a] * m.get_den() != m.get_num() * current.denominator)
      report_.fail(tag + "measure below anchor " + std::to_string(a) + " not conserved");
  }

  if (previous && link) {
    const LocalRule& rule = config_.depth_rule(static_cast<int>(previous->level));
    const Integer den = rule.q_denominator();
    if (current.denominator != previous->denominator * den)
      report_.fail(tag + "denominator does not follow the local rule");
    if (link->child_class.size() != previous->classes.size()) {
      report_.fail(tag + "lineage size mismatch");
      return;
    }
    std::vector<Integer> qint;
    for (const auto& q : rule.q) qint.push_back(q.get_num() * (den / q.get_den()));
    std::vector<Integer> expected(current.classes.size());
    std::vector<const Value*> children(rule.branching());
    HarmonicChecker checker(rule);
    for (std::size_t ci = 0; ci < previous->classes.size(); ++ci) {
      const ValueClass& parent = previous->classes[ci];
      const auto& kids = link->child_class[ci];
      if (kids.size() != rule.branching()) {
        report_.fail(tag + "lineage branching mismatch");
        continue;
      }
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (kids[i] >= current.classes.size()) {
          report_.fail(tag + "lineage points past the class list");
          return;
        }
        const ValueClass& child = current.classes[kids[i]];
        if (child.anchor != parent.anchor) report_.fail(tag + "child class changes anchor");
        mpz_addmul(expected[kids[i]].get_mpz_t(), parent.weight.get_mpz_t(), qint[i].get_mpz_t());
        children[i] = &child.value;
      }
      if (!checker.holds(parent.value, children)) report_.fail(tag + "harmonic identity fails");
    }
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (expected[i] != current.classes[i].weight)
        report_.fail(tag + "class weight differs from inherited measure");
  }

  if (record) {
    if (record->distance.size() != anchor_targets_.size()) {
      report_.fail(tag + "distance log has the wrong number of targets");
      return;
    }
    Rational tmp;
    MeasureConverter to_measure;
    for (std::size_t k = 0; k < anchor_targets_.size(); ++k) {
      double sum = 0.0;
      for (const auto& c : current.classes)
        sum += to_measure(c.weight, current.denominator) *
               bounded_ratio(exact_difference_norm(c.value, anchor_targets_[k][c.anchor], tmp));
      const double err = std::abs(sum - record->distance[k]);
      report_.max_distance_error = std::max(report_.max_distance_error, err);
      if (err > 1e-12) report_.fail(tag + "logged distance disagrees with recomputation");
    }
  }
}

bool VerifyReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

VerifyReport verify(const TreeConfig& config, std::span<const Target> targets,
                    const Schedule& schedule, const BuildResult& result) {
  VerifyReport out;
  auto add = [&](std::string name, bool pass, std::string detail) {
    out.checks.push_back(CheckEntry{std::move(name), pass, std::move(detail)});
  };

  {
    const auto rep = is_harmonic(config, result.prefix);
    add("prefix harmonic", rep.pass(),
        std::to_string(rep.vertices_checked) + " vertices, " + std::to_string(rep.violations.size()) +
            " violations");
  }

  if (result.audit.levels_checked > 0) {
    std::string detail = std::to_string(result.audit.levels_checked) + " levels, " +
                         std::to_string(result.audit.classes_checked) + " classes";
    if (!result.audit.failures.empty()) detail += "; " + result.audit.failures.front();
    add("streamed audit", result.audit.pass(), detail);
  }

  if (!result.profiles.empty()) {
    Auditor again(config, targets, result.anchor_depth);
    for (std::size_t i = 0; i < result.profiles.size(); ++i) {
      const auto& p = result.profiles[i];
      const LevelRecord* rec = p.level > 0 ? &result.log[p.level - 1] : nullptr;
      if (i == 0)
        again.observe(nullptr, nullptr, p, rec);
      else
        again.observe(&result.profiles[i - 1], &result.lineages[i - 1], p, rec);
    }
    const auto& r = again.report();
    std::string detail = std::to_string(r.levels_checked) + " stored levels";
    if (!r.failures.empty()) detail += "; " + r.failures.front();
    add("stored profiles re-audit", r.pass(), detail);
  }

  {
    const int depth = result.prefix.depth;
    bool ok = true;
    double worst = 0.0;
    std::string detail;
    if (depth > 0) {
      LevelLayout layout(config, depth);
      for (int n = 1; n <= depth && static_cast<std::uint64_t>(n) <= result.horizon; ++n) {
        const SimpleFunction proj = level_projection(config, result.prefix, n);
        const LevelRecord& rec = result.log[n - 1];
        for (std::size_t k = 0; k < targets.size(); ++k) {
          const double d = probability_metric(config, proj, targets[k].h);
          const double err = std::abs(d - rec.distance.at(k));
          worst = std::max(worst, err);
          if (err > 1e-12) ok = false;
        }
        if (n < result.anchor_depth) continue;
        const std::size_t pi = static_cast<std::size_t>(n - result.anchor_depth);
        if (pi >= result.profiles.size() || result.profiles[pi].level != static_cast<std::uint64_t>(n))
          continue;
        const LevelProfile& prof = result.profiles[pi];
        std::vector<Rational> got(prof.classes.size());
        for (std::size_t i = 0; i < layout.level_size(n); ++i) {
          const auto a = layout.ancestor(n, i, result.anchor_depth);
          bool found = false;
          for (std::size_t c = 0; c < prof.classes.size(); ++c) {
            if (prof.classes[c].anchor == a && prof.classes[c].value == proj.values[i]) {
              got[c] += layout.measure(n, i);
              found = true;
              break;
            }
          }
          if (!found) {
            ok = false;
            detail = level_tag(n) + "dense vertex has no matching class";
          }
        }
        for (std::size_t c = 0; c < prof.classes.size(); ++c)
          if (got[c] != prof.measure(prof.classes[c])) {
            ok = false;
            detail = level_tag(n) + "class measure differs from the dense route";
          }
      }
    }
    std::ostringstream os;
    os << "max |dense - logged| = " << worst;
    if (!detail.empty()) os << "; " << detail;
    add("dense route agreement", ok, os.str());
  }

  {
    bool ok = true;
    std::string detail;
    std::uint64_t holds = 0;
    for (const auto& b : schedule.blocks) {
      const double eps = to_double(b.epsilon);
      for (std::uint64_t n = b.hold_start; n <= b.hold_end && n <= result.horizon; ++n) {
        ++holds;
        const double d = result.log[n - 1].distance.at(b.target);
        if (!(d < eps)) {
          ok = false;
          if (detail.empty()) {
            std::ostringstream os;
            os << level_tag(n) << "distance " << d << " >= " << eps;
            detail = os.str();
          }
        }
      }
    }
    add("hold tolerance", ok, std::to_string(holds) + " hold levels" + (detail.empty() ? "" : "; " + detail));
  }

  {
    const Rational& mu = config.contraction();
    bool ok = true;
    std::string detail;
    for (const auto& b : schedule.blocks) {
      Rational bound = mu;  // mu^(n - transition_start + 1)
      Rational loose = 1;   // mu^(n - transition_start)
      std::optional<Rational> prev;
      for (std::uint64_t n = b.transition_start; n <= b.hold_end && n <= result.horizon; ++n) {
        const auto& un = result.log[n - 1].unmatched;
        if (!un) {
          ok = false;
          detail = level_tag(n) + "no unmatched measure logged";
          break;
        }
        if (*un > bound || *un > loose || (prev && *un > mu * *prev)) {
          ok = false;
          if (detail.empty()) detail = level_tag(n) + "unmatched measure above the contraction bound";
        }
        prev = *un;
        loose = bound;
        bound *= mu;
      }
    }
    add("contraction bound", ok, detail.empty() ? "mu = " + format_rational(mu) : detail);
  }

  {
    bool ok = result.visits.size() == targets.size();
    for (std::size_t k = 0; ok && k < targets.size(); ++k) {
      std::vector<std::uint64_t> hits;
      if (result.tolerances.at(k)) {
        const double eps = to_double(*result.tolerances[k]);
        for (const auto& rec : result.log)
          if (rec.distance.at(k) < eps) hits.push_back(rec.level);
      }
      if (!(IndexSet(std::move(hits), result.horizon) == result.visits[k])) ok = false;
      out.densities.push_back(density_profile(result.visits[k]));
    }
    add("visit sets", ok, std::to_string(targets.size()) + " targets");
  }
  return out;
}

}  // namespace utree
