#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "utree/harmonic.hpp"
#include "utree/schedule.hpp"

namespace utree {

/// All level-n vertices below one anchor vertex that carry the same value.
/// Its measure is weight / LevelProfile::denominator.
struct ValueClass {
  std::uint32_t anchor = 0;  // index within the anchor level
  Value value;
  Integer weight;
};

/// Compressed description of a level projection below the anchor level:
/// vertices are grouped by (anchor, value). Valid because below the anchor
/// level every vertex of a given depth uses the same local rule.
struct LevelProfile {
  std::uint64_t level = 0;
  Integer denominator = 1;
  std::vector<ValueClass> classes;

  Rational measure(const ValueClass& c) const {
    Rational r(c.weight, denominator);
    r.canonicalize();
    return r;
  }
};

/// child_class[c][i]: class at the next level containing child i of the
/// vertices of class c.
struct Lineage {
  std::vector<std::vector<std::uint32_t>> child_class;
};

struct LevelRecord {
  std::uint64_t level = 0;
  std::optional<std::size_t> block;
  /// Probability-metric distance from the level projection to each target.
  std::vector<double> distance;
  /// Measure of the sectors not yet equal to the active block's target.
  std::optional<Rational> unmatched;
};

struct AuditReport {
  std::uint64_t levels_checked = 0;
  std::uint64_t classes_checked = 0;
  double max_distance_error = 0.0;
  std::vector<std::string> failures;  // first few only
  std::uint64_t failure_count = 0;
  bool pass() const { return failure_count == 0; }
  void fail(std::string msg);
};

/// Receives every class-level step of a build as it happens.
class LevelObserver {
 public:
  virtual ~LevelObserver() = default;
  /// `previous`/`link` are null for the first profile (the anchor level).
  virtual void observe(const LevelProfile* previous, const Lineage* link,
                       const LevelProfile& current, const LevelRecord* record) = 0;
};

struct BuildOptions {
  /// Depth of the materialized prefix truncation.
  int dense_depth = 12;
  /// Lower bound for the anchor level (it is also at least every target
  /// level and the depth where the tree becomes depth-homogeneous).
  int min_anchor_depth = 0;
  /// Keep every level profile (memory grows with horizon x classes).
  bool keep_profiles = false;
  /// Run the streaming auditor during the build.
  bool audit = true;
  CorrectionPolicy policy = CorrectionPolicy::lightest();
  std::vector<LevelObserver*> observers;
};

struct BuildResult {
  std::uint64_t horizon = 0;
  int anchor_depth = 0;
  /// Exactly materialized truncation of depth min(horizon, max(anchor, dense_depth)).
  HarmonicTruncation prefix;
  std::vector<LevelRecord> log;  // levels 1..horizon
  std::vector<std::optional<Rational>> tolerances;  // per target
  std::vector<IndexSet> visits;                     // per target: levels with distance < tolerance
  /// Profiles for levels anchor..min(horizon, prefix depth), or every level
  /// when keep_profiles is set; lineages[i] links profiles[i] to profiles[i+1].
  std::vector<LevelProfile> profiles;
  std::vector<Lineage> lineages;
  std::optional<LevelProfile> final_profile;
  AuditReport audit;
};

/// Level-by-level construction. Levels inside a block are produced by
/// corrected extension toward the block's target; all other levels by
/// constant extension.
BuildResult build(const TreeConfig& config, std::span<const Target> targets,
                  const Schedule& schedule, const Value& initial, const BuildOptions& options = {});

/// Target value seen from each anchor vertex, per target.
std::vector<std::vector<Value>> anchor_targets(const TreeConfig& config,
                                               std::span<const Target> targets, int anchor_depth);

/// Distance of a profile to per-anchor target values (fast path for
/// values whose magnitude dwarfs the target).
double profile_distance(const LevelProfile& profile, const std::vector<Value>& target_by_anchor);

/// Streaming verification of class steps: exact harmonic identity along the
/// lineage, measure conservation, and an independent recomputation of every
/// logged distance.
class Auditor : public LevelObserver {
 public:
  Auditor(const TreeConfig& config, std::span<const Target> targets, int anchor_depth);
  void observe(const LevelProfile* previous, const Lineage* link, const LevelProfile& current,
               const LevelRecord* record) override;
  const AuditReport& report() const { return report_; }

 private:
  TreeConfig config_;
  std::vector<std::vector<Value>> anchor_targets_;
  std::vector<Rational> anchor_measure_;
  AuditReport report_;
};

struct CheckEntry {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckEntry> checks;
  std::vector<DensityReport> densities;  // per target, over the realized visits
  bool pass() const;
};

/// Re-checks a build after the fact: prefix harmonicity, the streamed audit,
/// stored profiles (re-audited), the dense route for early levels, every
/// scheduled tolerance and contraction bound, and the visit sets.
VerifyReport verify(const TreeConfig& config, std::span<const Target> targets,
                    const Schedule& schedule, const BuildResult& result);

}  // namespace utree
