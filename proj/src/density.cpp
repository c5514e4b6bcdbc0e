#include "utree/density.hpp"

#include <algorithm>
#include <cstdio>

#include "utree/errors.hpp"

namespace utree {

IndexSet::IndexSet(std::vector<std::uint64_t> indices, std::uint64_t horizon)
    : indices_(std::move(indices)), horizon_(horizon) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && (indices_.front() == 0 || indices_.back() > horizon_))
    throw ArgumentError("index set entries must lie in [1, horizon]");
}

bool IndexSet::contains(std::uint64_t n) const {
  return std::binary_search(indices_.begin(), indices_.end(), n);
}

std::uint64_t IndexSet::count_up_to(std::uint64_t n) const {
  return static_cast<std::uint64_t>(std::upper_bound(indices_.begin(), indices_.end(), n) -
                                    indices_.begin());
}

Rational counting_density(const IndexSet& a, std::uint64_t n) {
  if (n == 0 || n > a.horizon())
    throw ArgumentError("density checkpoint " + std::to_string(n) + " outside [1, " +
                        std::to_string(a.horizon()) + "]");
  return DensityCheckpoint{n, a.count_up_to(n)}.density();
}

DensityReport density_profile(const IndexSet& a, std::uint64_t window_start) {
  if (a.horizon() == 0) throw ArgumentError("density profile of an empty horizon");
  if (window_start == 0) window_start = std::max<std::uint64_t>(1, a.horizon() / 2);
  if (window_start > a.horizon())
    throw ArgumentError("window start beyond the horizon");
  DensityReport rep;
  rep.horizon = a.horizon();
  rep.window_start = window_start;
  rep.profile.reserve(a.horizon() - window_start + 1);
  std::uint64_t count = a.count_up_to(window_start - 1);
  std::size_t next = count;
  const auto& idx = a.indices();
  for (std::uint64_t n = window_start; n <= a.horizon(); ++n) {
    while (next < idx.size() && idx[next] <= n) {
      ++count;
      ++next;
    }
    rep.profile.push_back({n, count});
  }
  // count/n comparisons by cross-multiplication.
  auto less = [](const DensityCheckpoint& x, const DensityCheckpoint& y) {
    return static_cast<unsigned __int128>(x.count) * y.n <
           static_cast<unsigned __int128>(y.count) * x.n;
  };
  rep.finite_horizon_min = rep.finite_horizon_max = rep.profile.front();
  for (const auto& c : rep.profile) {
    if (less(c, rep.finite_horizon_min)) rep.finite_horizon_min = c;
    if (less(rep.finite_horizon_max, c)) rep.finite_horizon_max = c;
  }
  return rep;
}

std::string DensityReport::table() const {
  std::string out = "# finite-horizon counting density\n# N\tcount\tdensity\n";
  char buf[96];
  for (const auto& c : profile) {
    std::snprintf(buf, sizeof buf, "%llu\t%llu\t%.12f\n", static_cast<unsigned long long>(c.n),
                  static_cast<unsigned long long>(c.count),
                  static_cast<double>(c.count) / static_cast<double>(c.n));
    out += buf;
  }
  return out;
}

}  // namespace utree
