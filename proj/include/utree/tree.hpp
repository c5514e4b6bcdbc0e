#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "utree/rational.hpp"

namespace utree {

/// Hard ceiling on how many vertices a single enumeration may materialize.
inline constexpr std::size_t kEnumerationBudget = std::size_t{1} << 24;

/// Transition weights leaving one vertex: measure weights q (positive,
/// summing to 1) and harmonic weights w (nonzero complex, summing to 1).
struct LocalRule {
  std::vector<Rational> q;
  std::vector<CRational> w;

  std::size_t branching() const { return q.size(); }
  /// Child with the smallest q, ties broken by the lowest index.
  std::size_t lightest_child() const;
  /// lcm of the denominators of q.
  Integer q_denominator() const;

  /// Validates the invariants; `where` names the vertex (class) in errors.
  /// When `w` is empty it defaults to q.
  static LocalRule make(std::vector<Rational> q, std::vector<CRational> w,
                        const std::string& where);
};

/// Address of a vertex: the child indices taken from the root.
class VertexId {
 public:
  VertexId() = default;
  explicit VertexId(std::vector<std::uint32_t> path) : path_(std::move(path)) {}

  int depth() const { return static_cast<int>(path_.size()); }
  const std::vector<std::uint32_t>& path() const { return path_; }
  bool is_root() const { return path_.empty(); }
  VertexId child(std::uint32_t i) const;
  /// Father; the root has none.
  VertexId parent() const;
  std::string to_string() const;

  friend auto operator<=>(const VertexId&, const VertexId&) = default;

 private:
  std::vector<std::uint32_t> path_;
};

enum class RuleKind { uniform, periodic, explicit_prefix };

/// Finitely presented infinite rooted tree with its two weight systems.
/// Immutable; copies share storage.
class TreeConfig {
 public:
  static TreeConfig uniform(LocalRule rule, int depth_cap);
  /// Rule at depth d is phases[d % phases.size()].
  static TreeConfig periodic(std::vector<LocalRule> phases, int depth_cap);
  /// Listed vertices use their own rule; every other vertex falls back to the
  /// periodic default.
  static TreeConfig explicit_prefix(std::map<VertexId, LocalRule> nodes,
                                    std::vector<LocalRule> default_phases, int depth_cap);

  RuleKind kind() const { return data_->kind; }
  int depth_cap() const { return data_->depth_cap; }
  TreeConfig with_depth_cap(int cap) const;

  /// Rule of v, assuming v is a valid address.
  const LocalRule& rule_at(const VertexId& v) const;
  /// Default rule for vertices at `depth`.
  const LocalRule& depth_rule(int depth) const;
  /// Every vertex at depth >= this value uses depth_rule(depth).
  int homogeneous_depth() const { return data_->homogeneous_depth; }
  /// max over vertex classes of min_y q(x, y).
  const Rational& contraction() const { return data_->contraction; }
  /// True iff w == q at every vertex class.
  bool harmonic_weights_are_measure() const { return data_->w_equals_q; }

  const std::vector<LocalRule>& phases() const { return data_->phases; }
  const std::map<VertexId, LocalRule>& explicit_nodes() const { return data_->nodes; }

  /// Throws AddressError unless every index of v exists.
  void check_address(const VertexId& v) const;

 private:
  struct Data {
    RuleKind kind = RuleKind::uniform;
    int depth_cap = 0;
    std::vector<LocalRule> phases;
    std::map<VertexId, LocalRule> nodes;
    int homogeneous_depth = 0;
    Rational contraction;
    bool w_equals_q = true;
  };
  explicit TreeConfig(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  static TreeConfig finish(Data d);

  std::shared_ptr<const Data> data_;
};

struct Child {
  VertexId id;
  Rational q;
  CRational w;
};

std::vector<Child> children(const TreeConfig& config, const VertexId& v);
Rational sector_measure(const TreeConfig& config, const VertexId& v);
std::vector<VertexId> level(const TreeConfig& config, int n);

struct ConsistencyViolation {
  VertexId vertex;
  Rational parent_measure;
  Rational children_sum;
};

struct ConsistencyReport {
  int level = 0;
  std::size_t vertices_checked = 0;
  std::vector<ConsistencyViolation> violations;
  bool pass() const { return violations.empty(); }
};

/// Checks that each level-n sector measure equals the sum of its children's.
ConsistencyReport consistency_check(const TreeConfig& config, int n);

/// 1-based breadth-first position, lexicographic within a level.
std::uint64_t bfs_index(const TreeConfig& config, const VertexId& v);

/// Dense breadth-first addressing of all vertices of depth <= N.
class LevelLayout {
 public:
  LevelLayout(const TreeConfig& config, int depth);

  const TreeConfig& config() const { return config_; }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  std::size_t level_size(int n) const { return levels_[n].size; }
  /// 0-based BFS offset of the first vertex at level n.
  std::size_t level_offset(int n) const { return levels_[n].offset; }
  std::size_t total() const { return total_; }

  std::size_t parent(int n, std::size_t i) const { return levels_[n].parent[i]; }
  std::size_t child_begin(int n, std::size_t i) const { return levels_[n].child_begin[i]; }
  std::size_t branching(int n, std::size_t i) const { return rule(n, i).branching(); }
  const LocalRule& rule(int n, std::size_t i) const;
  const Rational& measure(int n, std::size_t i) const { return levels_[n].measure[i]; }
  /// Index at level k of the ancestor of vertex (n, i); k <= n.
  std::size_t ancestor(int n, std::size_t i, int k) const;
  VertexId vertex(int n, std::size_t i) const;
  /// Index of v within its level.
  std::size_t index_of(const VertexId& v) const;

 private:
  struct Level {
    std::size_t size = 0;
    std::size_t offset = 0;
    std::vector<std::size_t> parent;
    std::vector<std::size_t> child_begin;
    std::vector<Rational> measure;
    std::vector<const LocalRule*> rules;  // only below the homogeneous depth
  };
  TreeConfig config_;
  std::vector<Level> levels_;
  std::size_t total_ = 0;
};

}  // namespace utree
