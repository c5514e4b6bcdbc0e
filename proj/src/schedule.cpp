#include "utree/schedule.hpp"

#include <algorithm>

#include "utree/errors.hpp"

namespace utree {

std::optional<std::size_t> Schedule::block_at(std::uint64_t n) const {
  auto it = std::upper_bound(blocks.begin(), blocks.end(), n,
                             [](std::uint64_t v, const Block& b) { return v < b.transition_start; });
  if (it == blocks.begin()) return std::nullopt;
  --it;
  if (n > it->hold_end) return std::nullopt;
  return static_cast<std::size_t>(it - blocks.begin());
}

IndexSet Schedule::hold_levels(std::size_t target) const {
  std::vector<std::uint64_t> out;
  for (const auto& b : blocks)
    if (b.target == target)
      for (auto n = b.hold_start; n <= b.hold_end; ++n) out.push_back(n);
  return IndexSet(std::move(out), horizon);
}

std::optional<Rational> Schedule::tolerance(std::size_t target) const {
  std::optional<Rational> eps;
  for (const auto& b : blocks)
    if (b.target == target && (!eps || b.epsilon < *eps)) eps = b.epsilon;
  return eps;
}

std::uint64_t transition_length(const TreeConfig& config, const Rational& eps) {
  if (sgn(eps) <= 0 || eps >= 1) throw ArgumentError("tolerance must lie in (0, 1)");
  const Rational& mu = config.contraction();
  Rational power = mu;
  std::uint64_t j = 1;
  while (power > eps) {
    power *= mu;
    ++j;
  }
  return j;
}

void validate(const TreeConfig& config, const Schedule& schedule, std::span<const Target> targets) {
  if (schedule.horizon > static_cast<std::uint64_t>(config.depth_cap()))
    throw CapError("horizon " + std::to_string(schedule.horizon) + " exceeds depth cap " +
                   std::to_string(config.depth_cap()));
  std::uint64_t prev_end = 0;
  for (std::size_t i = 0; i < schedule.blocks.size(); ++i) {
    const Block& b = schedule.blocks[i];
    const std::string where = "block " + std::to_string(i + 1);
    if (b.target >= targets.size()) throw ScheduleError(where + ": unknown target");
    if (b.transition_start == 0) throw ScheduleError(where + ": levels start at 1");
    if (b.transition_end + 1 != b.hold_start)
      throw ScheduleError(where + ": hold must follow the transition directly");
    if (b.hold_end < b.hold_start) throw ScheduleError(where + ": empty hold");
    if (b.hold_end > schedule.horizon) throw ScheduleError(where + ": hold beyond the horizon");
    if (i > 0 && b.transition_start != prev_end + 1)
      throw ScheduleError(where + ": blocks must tile consecutive levels");
    if (b.transition_start < static_cast<std::uint64_t>(targets[b.target].h.level))
      throw ScheduleError(where + ": starts above the target's level " +
                          std::to_string(targets[b.target].h.level));
    const std::uint64_t need = transition_length(config, b.epsilon);
    const std::uint64_t have = b.hold_start - b.transition_start + 1;
    if (have < need)
      throw ScheduleError(where + ": transition budget violated: tolerance " +
                          format_rational(b.epsilon) + " needs " + std::to_string(need) +
                          " corrected levels before the first hold, block provides " +
                          std::to_string(have));
    prev_end = b.hold_end;
  }
}

unsigned two_adic_valuation(std::uint64_t n) {
  if (n == 0) throw ArgumentError("valuation of zero");
  return static_cast<unsigned>(__builtin_ctzll(n));
}

Schedule make_x_schedule(const TreeConfig& config, std::span<const Target> targets,
                         std::uint64_t horizon, const XScheduleOptions& options) {
  const std::size_t K = targets.size();
  if (K == 0) throw ArgumentError("X schedule needs at least one target");
  if (options.first_boundary == 0) throw ArgumentError("first block boundary must be positive");
  const std::uint64_t L = transition_length(config, options.epsilon);
  Schedule s;
  s.horizon = horizon;
  std::uint64_t prev = 0;
  std::uint64_t boundary = options.first_boundary;
  for (std::uint64_t j = 1; prev < horizon; ++j) {
    if (j > 1) {
      if (boundary > horizon / j + 1) boundary = horizon + 1;  // saturate
      else boundary *= j;
    }
    const std::uint64_t lo = prev + 1;
    const std::uint64_t hi = std::min(boundary, horizon);
    const std::size_t target = static_cast<std::size_t>((j - 1) % K);
    prev = hi;
    if (hi <= options.skip_until) continue;
    const bool fits = lo >= static_cast<std::uint64_t>(targets[target].h.level) && lo + L - 1 <= hi;
    if (!fits) {
      if (s.blocks.empty()) continue;
      s.blocks.back().hold_end = hi;  // a truncated final block joins the previous hold
      continue;
    }
    Block b;
    b.target = target;
    b.epsilon = options.epsilon;
    b.transition_start = lo;
    b.hold_start = lo + L - 1;
    b.transition_end = b.hold_start - 1;
    b.hold_end = hi;
    s.blocks.push_back(b);
  }
  for (std::size_t k = 0; k < K; ++k)
    if (std::none_of(s.blocks.begin(), s.blocks.end(), [&](const Block& b) { return b.target == k; }))
      throw ScheduleError("horizon " + std::to_string(horizon) + " too small for " +
                          std::to_string(K) + " blocks: target " + std::to_string(k + 1) +
                          " receives none (transition budget " + std::to_string(L) + ")");
  validate(config, s, targets);
  return s;
}

double x_block_end_bound(const Block& b, std::uint64_t transition_len) {
  const double end = static_cast<double>(b.hold_end);
  return 1.0 - static_cast<double>(b.transition_start - 1) / end -
         static_cast<double>(transition_len) / end;
}

Schedule make_fm_schedule(const TreeConfig& config, std::span<const Target> targets,
                          const std::vector<Rational>& epsilons, std::uint64_t stride,
                          std::uint64_t horizon, std::uint64_t first_level) {
  if (first_level == 0) throw ArgumentError("first corrected level must be at least 1");
  const std::size_t K = targets.size();
  if (K == 0 || epsilons.size() != K) throw ArgumentError("one tolerance per target required");
  if (stride == 0) throw ScheduleError("stride must be positive");
  std::uint64_t need = 0;
  for (const auto& e : epsilons) need = std::max(need, transition_length(config, e));
  if (stride < need)
    throw ScheduleError("stride " + std::to_string(stride) + " below the transition budget " +
                        std::to_string(need) + " of the smallest tolerance");
  Schedule s;
  s.horizon = horizon;
  for (std::uint64_t n = 1; n * stride <= horizon; ++n) {
    const std::uint64_t v = n * stride;
    Block b;
    b.target = std::min<std::size_t>(two_adic_valuation(n), K - 1);
    b.epsilon = epsilons[b.target];
    b.transition_start = std::max(v - stride + 1, first_level);
    if (b.transition_start > v) continue;
    b.transition_end = v - 1;
    b.hold_start = b.hold_end = v;
    s.blocks.push_back(b);
  }
  for (std::size_t k = 0; k < K; ++k)
    if (std::none_of(s.blocks.begin(), s.blocks.end(), [&](const Block& b) { return b.target == k; }))
      throw ScheduleError("horizon " + std::to_string(horizon) + " too small: target " +
                          std::to_string(k + 1) + " is never visited at stride " +
                          std::to_string(stride));
  validate(config, s, targets);
  return s;
}

}  // namespace utree
