#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tickwork/clock_model.hpp"

namespace tickwork {

/// Tick arrival times of a single simulated clock run.
struct TickRecord {
  std::string clock_id;
  std::vector<double> tick_times;  // strictly increasing, all <= horizon
  double horizon = 0;

  int count_at(double t) const;
};

struct PairEvent {
  char label = 'A';  // 'A' or 'B'
  double time = 0;
};

/// Time-ordered ticks of two clocks written to a shared append-only record.
struct TickSequence {
  std::vector<PairEvent> entries;
  double horizon = 0;

  TickRecord extract(char label) const;
  /// Number of label-B ticks strictly before the n-th A tick (n >= 1).
  int b_count_before_a(int n) const;
};

/// Empirical pmf of the B-tick count at A's n-th tick, with Wilson intervals.
struct RelativeCountDistribution {
  int n = 0;
  std::vector<double> pmf, lower, upper;
  long samples = 0;
};

/// Single quantum-jump unraveling run. Jump times come from the squared-norm
/// survival function of the no-jump evolution; channels are drawn with weight
/// rate * |L psi|^2. Deterministic in (spec, horizon, seed).
TickRecord sample_trajectory(const ClockSpec& spec, double horizon, std::uint64_t seed,
                             const std::string& clock_id = "clock");

/// `count` independent runs with per-run seeds split from `master_seed`.
/// The parallel and serial variants produce bitwise identical output.
std::vector<TickRecord> sample_ensemble(const ClockSpec& spec, double horizon,
                                        std::uint64_t master_seed, int count, int threads);
std::vector<TickRecord> sample_ensemble_serial(const ClockSpec& spec, double horizon,
                                               std::uint64_t master_seed, int count);

/// Merge of two independent runs; equal times (never observed in practice)
/// order A before B.
TickSequence sample_pair(const ClockSpec& spec_a, const ClockSpec& spec_b, double horizon,
                         std::uint64_t seed);
std::vector<TickSequence> sample_pair_ensemble(const ClockSpec& spec_a, const ClockSpec& spec_b,
                                               double horizon, std::uint64_t master_seed,
                                               int count, int threads);

RelativeCountDistribution relative_counts(const std::vector<TickSequence>& seqs, int n);

}  // namespace tickwork
