#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "utree/density.hpp"
#include "utree/simple_function.hpp"

namespace utree {

/// A ball center: a simple function at its measurability level.
struct Target {
  SimpleFunction h;
  std::string label;
};

/// One scheduled visit window. Levels in [transition_start, hold_end] are
/// driven toward `target`; hold levels must be within `epsilon`.
/// An empty transition has transition_end = transition_start - 1.
struct Block {
  std::size_t target = 0;  // 0-based
  Rational epsilon;
  std::uint64_t transition_start = 0;
  std::uint64_t transition_end = 0;
  std::uint64_t hold_start = 0;
  std::uint64_t hold_end = 0;

  std::uint64_t hold_length() const { return hold_end - hold_start + 1; }
  bool in_hold(std::uint64_t n) const { return n >= hold_start && n <= hold_end; }
};

struct Schedule {
  std::uint64_t horizon = 0;
  std::vector<Block> blocks;

  /// Block whose window [transition_start, hold_end] contains level n.
  std::optional<std::size_t> block_at(std::uint64_t n) const;
  /// Union of the hold levels assigned to `target`.
  IndexSet hold_levels(std::size_t target) const;
  /// Smallest tolerance among blocks for `target`, if any.
  std::optional<Rational> tolerance(std::size_t target) const;
};

/// Smallest j >= 1 with mu^j <= eps, mu the tree's contraction factor.
std::uint64_t transition_length(const TreeConfig& config, const Rational& eps);

/// A block's first hold level may sit at most transition_length - 1 levels
/// after its first corrected level: hold_start - transition_start + 1 >= L.
/// Throws ScheduleError naming the violated budget.
void validate(const TreeConfig& config, const Schedule& schedule, std::span<const Target> targets);

/// 2-adic valuation.
unsigned two_adic_valuation(std::uint64_t n);

struct XScheduleOptions {
  Rational epsilon{1, 10};
  /// N_1; later boundaries follow N_j = j * N_{j-1}.
  std::uint64_t first_boundary = 1;
  /// Blocks ending at or before this level stay in the constant prefix.
  std::uint64_t skip_until = 0;
};

/// Growing blocks (N_{j-1}, N_j], block j assigned target (j-1) mod K.
Schedule make_x_schedule(const TreeConfig& config, std::span<const Target> targets,
                         std::uint64_t horizon, const XScheduleOptions& options = {});

/// Finite-horizon lower bound guaranteed at the end of block `b`:
/// 1 - (transition_start - 1)/hold_end - L/hold_end.
double x_block_end_bound(const Block& b, std::uint64_t transition_len);

/// One-level holds at stride * n; target k (0-based) takes the n with
/// 2-adic valuation k, the last target takes every valuation >= K - 1.
/// Transitions are clipped so no level below `first_level` is corrected.
Schedule make_fm_schedule(const TreeConfig& config, std::span<const Target> targets,
                          const std::vector<Rational>& epsilons, std::uint64_t stride,
                          std::uint64_t horizon, std::uint64_t first_level = 1);

}  // namespace utree
