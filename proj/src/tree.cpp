#include "utree/tree.hpp"

#include <algorithm>
#include <numeric>

#include "utree/errors.hpp"

namespace utree {

std::size_t LocalRule::lightest_child() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] < q[best]) best = i;
  return best;
}

Integer LocalRule::q_denominator() const {
  Integer l = 1;
  for (const auto& x : q) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  return l;
}

LocalRule LocalRule::make(std::vector<Rational> q, std::vector<CRational> w,
                          const std::string& where) {
  auto fail = [&](const std::string& msg) {
    return ValidationError(msg + " at vertex " + where, where);
  };
  if (q.size() < 2) throw fail("fewer than two children");
  Rational sum_q = 0;
  for (const auto& x : q) {
    if (sgn(x) <= 0) throw fail("non-positive measure weight " + format_rational(x));
    sum_q += x;
  }
  if (sum_q != 1) throw fail("measure weights sum to " + format_rational(sum_q));
  if (w.empty()) w.assign(q.begin(), q.end());
  if (w.size() != q.size()) throw fail("harmonic weight count differs from branching");
  CRational sum_w;
  for (const auto& x : w) {
    if (x.is_zero()) throw fail("zero harmonic weight");
    sum_w += x;
  }
  if (!(sum_w == CRational(1)))
    throw fail("harmonic weights sum to " + format_rational(sum_w.re) + " + " +
               format_rational(sum_w.im) + "i");
  return LocalRule{std::move(q), std::move(w)};
}

VertexId VertexId::child(std::uint32_t i) const {
  auto p = path_;
  p.push_back(i);
  return VertexId(std::move(p));
}

VertexId VertexId::parent() const {
  if (path_.empty()) throw ArgumentError("the root has no father");
  return VertexId(std::vector<std::uint32_t>(path_.begin(), path_.end() - 1));
}

std::string VertexId::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(path_[i]);
  }
  return s + "]";
}

TreeConfig TreeConfig::finish(Data d) {
  if (d.depth_cap < 0) throw ArgumentError("negative depth cap");
  if (d.phases.empty()) throw ArgumentError("tree has no default rule");
  auto visit = [&](const LocalRule& r) {
    const Rational& lightest = r.q[r.lightest_child()];
    if (lightest > d.contraction) d.contraction = lightest;
    for (std::size_t i = 0; i < r.q.size(); ++i)
      if (!(r.w[i] == CRational(r.q[i]))) d.w_equals_q = false;
  };
  d.contraction = 0;
  for (const auto& r : d.phases) visit(r);
  d.homogeneous_depth = 0;
  for (const auto& [v, r] : d.nodes) {
    visit(r);
    d.homogeneous_depth = std::max(d.homogeneous_depth, v.depth() + 1);
  }
  return TreeConfig(std::make_shared<const Data>(std::move(d)));
}

TreeConfig TreeConfig::uniform(LocalRule rule, int depth_cap) {
  Data d;
  d.kind = RuleKind::uniform;
  d.depth_cap = depth_cap;
  d.phases.push_back(std::move(rule));
  return finish(std::move(d));
}

TreeConfig TreeConfig::periodic(std::vector<LocalRule> phases, int depth_cap) {
  Data d;
  d.kind = RuleKind::periodic;
  d.depth_cap = depth_cap;
  d.phases = std::move(phases);
  return finish(std::move(d));
}

TreeConfig TreeConfig::explicit_prefix(std::map<VertexId, LocalRule> nodes,
                                       std::vector<LocalRule> default_phases, int depth_cap) {
  Data d;
  d.kind = RuleKind::explicit_prefix;
  d.depth_cap = depth_cap;
  d.phases = std::move(default_phases);
  d.nodes = std::move(nodes);
  TreeConfig c = finish(std::move(d));
  // Listed vertices must be reachable through the rules of their ancestors.
  for (const auto& [v, r] : c.explicit_nodes()) c.check_address(v);
  return c;
}

TreeConfig TreeConfig::with_depth_cap(int cap) const {
  Data d = *data_;
  d.depth_cap = cap;
  return TreeConfig(std::make_shared<const Data>(std::move(d)));
}

const LocalRule& TreeConfig::depth_rule(int depth) const {
  return data_->phases[static_cast<std::size_t>(depth) % data_->phases.size()];
}

const LocalRule& TreeConfig::rule_at(const VertexId& v) const {
  if (v.depth() < data_->homogeneous_depth) {
    auto it = data_->nodes.find(v);
    if (it != data_->nodes.end()) return it->second;
  }
  return depth_rule(v.depth());
}

void TreeConfig::check_address(const VertexId& v) const {
  VertexId cur;
  for (auto idx : v.path()) {
    if (idx >= rule_at(cur).branching())
      throw AddressError("vertex " + v.to_string() + " does not exist: child index " +
                         std::to_string(idx) + " out of range at " + cur.to_string());
    cur = cur.child(idx);
  }
}

std::vector<Child> children(const TreeConfig& config, const VertexId& v) {
  config.check_address(v);
  if (v.depth() + 1 > config.depth_cap())
    throw CapError("children of " + v.to_string() + " lie beyond depth cap " +
                   std::to_string(config.depth_cap()));
  const LocalRule& r = config.rule_at(v);
  std::vector<Child> out;
  out.reserve(r.branching());
  for (std::size_t i = 0; i < r.branching(); ++i)
    out.push_back(Child{v.child(static_cast<std::uint32_t>(i)), r.q[i], r.w[i]});
  return out;
}

Rational sector_measure(const TreeConfig& config, const VertexId& v) {
  config.check_address(v);
  Rational p = 1;
  VertexId cur;
  for (auto idx : v.path()) {
    p *= config.rule_at(cur).q[idx];
    cur = cur.child(idx);
  }
  return p;
}

std::vector<VertexId> level(const TreeConfig& config, int n) {
  LevelLayout layout(config, n);
  std::vector<VertexId> out;
  out.reserve(layout.level_size(n));
  for (std::size_t i = 0; i < layout.level_size(n); ++i) out.push_back(layout.vertex(n, i));
  return out;
}

ConsistencyReport consistency_check(const TreeConfig& config, int n) {
  LevelLayout layout(config, n + 1);
  ConsistencyReport rep;
  rep.level = n;
  for (std::size_t i = 0; i < layout.level_size(n); ++i) {
    Rational sum = 0;
    std::size_t first = layout.child_begin(n, i);
    for (std::size_t c = 0; c < layout.branching(n, i); ++c) sum += layout.measure(n + 1, first + c);
    ++rep.vertices_checked;
    if (sum != layout.measure(n, i))
      rep.violations.push_back({layout.vertex(n, i), layout.measure(n, i), sum});
  }
  return rep;
}

std::uint64_t bfs_index(const TreeConfig& config, const VertexId& v) {
  config.check_address(v);
  LevelLayout layout(config, v.depth());
  return layout.level_offset(v.depth()) + layout.index_of(v) + 1;
}

LevelLayout::LevelLayout(const TreeConfig& config, int depth) : config_(config) {
  if (depth < 0) throw ArgumentError("negative depth");
  if (depth > config.depth_cap())
    throw CapError("depth " + std::to_string(depth) + " exceeds depth cap " +
                   std::to_string(config.depth_cap()));
  const int homog = config.homogeneous_depth();
  levels_.resize(static_cast<std::size_t>(depth) + 1);
  levels_[0].size = 1;
  levels_[0].parent = {0};
  levels_[0].measure = {Rational(1)};
  if (homog > 0) levels_[0].rules = {&config.rule_at(VertexId{})};
  total_ = 1;
  for (int n = 0; n < depth; ++n) {
    Level& cur = levels_[n];
    Level& next = levels_[n + 1];
    next.offset = cur.offset + cur.size;
    cur.child_begin.resize(cur.size);
    std::size_t running = 0;
    for (std::size_t i = 0; i < cur.size; ++i) {
      cur.child_begin[i] = running;
      running += rule(n, i).branching();
    }
    total_ += running;
    if (total_ > kEnumerationBudget)
      throw CapError("enumerating depth " + std::to_string(depth) + " exceeds the vertex budget");
    next.size = running;
    next.parent.resize(running);
    next.measure.resize(running);
    for (std::size_t i = 0; i < cur.size; ++i) {
      const LocalRule& r = rule(n, i);
      for (std::size_t c = 0; c < r.branching(); ++c) {
        next.parent[cur.child_begin[i] + c] = i;
        next.measure[cur.child_begin[i] + c] = cur.measure[i] * r.q[c];
      }
    }
    if (n + 1 < homog) {
      next.rules.resize(running);
      for (std::size_t j = 0; j < running; ++j) next.rules[j] = &config_.rule_at(vertex(n + 1, j));
    }
  }
}

const LocalRule& LevelLayout::rule(int n, std::size_t i) const {
  if (n < config_.homogeneous_depth()) return *levels_[n].rules[i];
  return config_.depth_rule(n);
}

std::size_t LevelLayout::ancestor(int n, std::size_t i, int k) const {
  while (n > k) {
    i = levels_[n].parent[i];
    --n;
  }
  return i;
}

VertexId LevelLayout::vertex(int n, std::size_t i) const {
  std::vector<std::uint32_t> path(static_cast<std::size_t>(n));
  while (n > 0) {
    std::size_t p = levels_[n].parent[i];
    path[n - 1] = static_cast<std::uint32_t>(i - levels_[n - 1].child_begin[p]);
    i = p;
    --n;
  }
  return VertexId(std::move(path));
}

std::size_t LevelLayout::index_of(const VertexId& v) const {
  if (v.depth() > depth()) throw CapError("vertex deeper than layout");
  std::size_t idx = 0;
  for (int j = 0; j < v.depth(); ++j) {
    auto c = v.path()[j];
    if (c >= branching(j, idx)) throw AddressError("vertex " + v.to_string() + " does not exist");
    idx = levels_[j].child_begin[idx] + c;
  }
  return idx;
}

}  // namespace utree
