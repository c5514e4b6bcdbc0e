#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "utree/rational.hpp"

namespace utree {

/// Strictly increasing positive integers, all at most `horizon`.
class IndexSet {
 public:
  IndexSet() = default;
  /// Sorts and deduplicates; throws ArgumentError on 0 or entries > horizon.
  IndexSet(std::vector<std::uint64_t> indices, std::uint64_t horizon);

  std::uint64_t horizon() const { return horizon_; }
  const std::vector<std::uint64_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool contains(std::uint64_t n) const;
  /// |A ∩ [1, N]|
  std::uint64_t count_up_to(std::uint64_t n) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::uint64_t> indices_;
  std::uint64_t horizon_ = 0;
};

/// |A ∩ [1, N]| / N, exact. Requires 1 <= N <= horizon.
Rational counting_density(const IndexSet& a, std::uint64_t n);

struct DensityCheckpoint {
  std::uint64_t n = 0;
  std::uint64_t count = 0;
  Rational density() const {
    Rational r(Integer(std::to_string(count)), Integer(std::to_string(n)));
    r.canonicalize();
    return r;
  }
};

/// Finite-horizon counting-density profile. The running minimum and maximum
/// are finite-horizon statistics only, not lower or upper densities.
struct DensityReport {
  std::uint64_t horizon = 0;
  std::uint64_t window_start = 0;
  std::vector<DensityCheckpoint> profile;  // every N in [window_start, horizon]
  DensityCheckpoint finite_horizon_min;
  DensityCheckpoint finite_horizon_max;

  /// Plain-text table with columns N, count, density.
  std::string table() const;
};

/// Window start 0 selects the default horizon / 2 (at least 1).
DensityReport density_profile(const IndexSet& a, std::uint64_t window_start = 0);

}  // namespace utree
