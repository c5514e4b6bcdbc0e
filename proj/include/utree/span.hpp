#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "utree/builder.hpp"

namespace utree {

/// One target per coordinate: (u_1, ..., u_J).
struct JointTarget {
  std::vector<SimpleFunction> parts;
  std::string label;
};

/// Tuples (0, ..., 0, h) with h in coordinate `position` (0-based) and zero
/// elsewhere, one per base target.
std::vector<JointTarget> pattern_targets(std::span<const Target> base, std::size_t coordinates,
                                         std::size_t position);

/// Tuples of consecutive dense-family elements: tuple t holds elements
/// first + t*J, ..., first + t*J + J - 1.
std::vector<JointTarget> dense_tuples(const TreeConfig& config, std::size_t m,
                                      std::size_t coordinates, std::uint64_t first,
                                      std::size_t count);

/// Coefficients a_1..a_s of a combination of the first s coordinates.
struct Combo {
  std::vector<CRational> a;
  std::size_t s() const { return a.size(); }
  bool is_zero() const;
  std::string to_string() const;
};

/// max(1, |c|) * beta.
double scaling_bound(const CRational& c, double beta);

/// epsilon / (s * max(1, |a_i|)): per-coordinate tolerance under which the
/// combination's bound stays below epsilon.
double coordinate_tolerance(const Combo& c, double epsilon, std::size_t i);

struct CertificateEntry {
  std::uint64_t level = 0;
  double predicted_bound = 0.0;
  double measured = 0.0;
  std::string target_label;
  bool sound = true;  // measured < epsilon and measured <= predicted
};

struct SpanCertificate {
  Combo combo;
  Rational epsilon;
  IndexSet levels;
  std::vector<CertificateEntry> entries;
  std::size_t unsound = 0;
  /// Certified levels split by the joint target active there.
  std::vector<IndexSet> by_target;
  bool pass() const { return unsound == 0; }
};

struct JointFamily {
  explicit JointFamily(TreeConfig c) : config(std::move(c)) {}

  TreeConfig config;
  std::size_t coordinates = 0;  // J
  std::size_t m = 0;            // dimension of one coordinate
  Mode mode = Mode::exact;
  int anchor_depth = 0;
  /// Deepest flattening depth; levels up to it are left unscheduled.
  int flat_depth = 0;
  std::vector<JointTarget> targets;
  Schedule schedule;
  /// Flattening offsets g_i, one per coordinate, and the dense elements they
  /// move toward.
  std::vector<FlattenResult> offsets;
  std::vector<HarmonicTruncation> dense;
  /// Targets handed to the stacked build: u_i minus the level projection of g_i.
  std::vector<Target> stacked_targets;
  BuildResult build;
  /// beta[n-1][i]: distance of coordinate i at level n to its part of the
  /// active tuple (empty outside blocks).
  std::vector<std::vector<double>> beta;
  /// Certificates requested through JointOptions, computed during the build.
  std::vector<SpanCertificate> certificates;

  /// Coordinate i (0-based) of the materialized prefix, offset included.
  HarmonicTruncation coordinate(std::size_t i) const;
  /// Offset g_i restricted to the anchor level, per anchor vertex.
  const std::vector<Value>& anchor_offset(std::size_t i) const { return anchor_offsets_[i]; }
  std::vector<std::vector<Value>> anchor_offsets_;
};

struct JointOptions {
  BuildOptions build;
  /// Combos certified while the build streams its levels.
  std::vector<Combo> combos;
  Rational certificate_epsilon{1, 10};
};

/// Builds all coordinates in one pass over values stacked into C^(m*J).
/// Levels up to the deepest flattening depth must stay unscheduled.
JointFamily joint_build(const TreeConfig& config, std::vector<JointTarget> targets,
                        const Schedule& schedule, const JointOptions& options = {});

/// Pointwise distance between coordinate i and the dense element its offset
/// moves toward.
Interval dense_closeness(const JointFamily& family, std::size_t i);

/// sum_i a_i f_i on the materialized prefix.
HarmonicTruncation combo(const JointFamily& family, const Combo& c);

/// 2^lo < |x| < 2^hi for a nonzero complex rational x.
struct MagnitudeBits {
  long lo = 0;
  long hi = 0;
  bool zero = true;
};

/// Streams class profiles of a stacked build and certifies every combo at
/// every level where the predicted bound is below epsilon.
class CertificateObserver : public LevelObserver {
 public:
  CertificateObserver(const JointFamily& family, std::vector<Combo> combos, Rational epsilon);
  void observe(const LevelProfile* previous, const Lineage* link, const LevelProfile& current,
               const LevelRecord* record) override;
  std::vector<SpanCertificate> finish() const;
  /// Per-level coordinate distances seen so far (levels from the anchor on).
  const std::vector<std::vector<double>>& beta() const { return beta_; }

 private:
  const JointFamily& family_;
  std::vector<Combo> combos_;
  Rational epsilon_;
  double eps_ = 0.0;
  std::vector<std::vector<Value>> stacked_by_anchor_;  // [target][anchor]
  std::vector<std::vector<MagnitudeBits>> combo_bits_;
  std::vector<std::vector<CertificateEntry>> entries_;
  std::vector<std::vector<std::size_t>> entry_targets_;
  std::vector<std::vector<double>> beta_;  // [level - 1][coordinate]
};

/// Certificate from the family's stored profiles.
SpanCertificate span_certificate(const JointFamily& family, const Combo& c,
                                 const Rational& epsilon);

/// Certificates for many combos, either replayed from stored profiles or
/// recomputed by a fresh streaming build.
std::vector<SpanCertificate> span_certificates(const JointFamily& family,
                                               const std::vector<Combo>& combos,
                                               const Rational& epsilon);

}  // namespace utree
