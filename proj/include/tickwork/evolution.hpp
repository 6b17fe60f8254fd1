#pragma once

#include <map>
#include <vector>

#include "tickwork/clock_model.hpp"

namespace tickwork {

/// Finite window of register values 0..n_max; mass shifted past either end
/// accumulates in the boundary bin instead of leaving the window.
struct TruncatedRegister {
  int n_max = 0;
};

/// State conditioned on the tick count: components[n] is the unnormalized
/// clockwork matrix accompanying register value n, so Tr components[n] is the
/// probability of having counted n ticks.
struct ClockState {
  double time = 0.0;
  int dim = 0;
  std::vector<CMatrix> components;

  int n_max() const { return static_cast<int>(components.size()) - 1; }
  double total_trace() const;
  std::vector<double> probabilities() const;
  double mean() const;
  double variance() const;
};

ClockState initial_state(const ClockSpec& spec, TruncatedRegister reg);

struct TickNumberDistribution {
  double time = 0.0;
  std::vector<double> p;
};

TickNumberDistribution tick_distribution(const ClockState& state);

/// Register-resolved split of the generator: l0 fixes the register (Hamiltonian
/// commutator, every anticommutator, and the sandwich parts of delta = 0
/// jumps); l_shift[d] is the completely positive part routing mass n -> n + d.
struct GeneratorParts {
  SuperOperator l0;
  std::map<int, SuperOperator> l_shift;

  int dim() const { return l0.dim; }
  SuperOperator tilted(double chi) const;
};

GeneratorParts split_generator(const ClockSpec& spec);

/// Counting-field generator on the clockwork alone:
/// build_generator(spec, chi) = l0 + sum_d e^{i d chi} l_shift[d].
SuperOperator build_generator(const ClockSpec& spec, double chi);

/// Propagates a conditioned state by dt >= 0 with matrix-exponential substeps
/// on the exact block-routed generator. Trace is conserved to 1e-9, otherwise
/// an integration error is raised.
ClockState evolve(const ClockSpec& spec, const ClockState& state, double dt);

struct MomentSeries {
  std::vector<double> times, mean, variance;
};

/// Tick-number mean and variance along `times` (ascending, all >= from.time).
/// If the absorbing top bin holds more than 1e-8 mass at the final time, a
/// truncation error suggesting a larger n_max is raised.
MomentSeries tick_number_moments(const ClockSpec& spec, const ClockState& from,
                                 std::vector<double> times);

/// Density of the n-th tick's arrival time on `grid`, from the analytic rate
/// at which mass crosses the n-ticks threshold (no finite differences).
/// Requires irreversible ticks and n <= the state's n_max.
std::vector<double> time_of_arrival_density(const ClockSpec& spec, const ClockState& from,
                                            int n, const std::vector<double>& grid);

// Dense clockwork-and-register helpers for structural cross-checks; register
// blocks of size dim are laid out contiguously (index = n * dim + i).

CMatrix full_initial_density(const ClockSpec& spec, int n_max);
/// Evolves a full density matrix under the truncated-register Lindbladian.
CMatrix evolve_full_density(const ClockSpec& spec, const CMatrix& rho, int n_max, double dt);
/// The same Lindbladian as an explicit superoperator matrix; only sensible for
/// small windows (dim * (n_max + 1) <= 16 or so).
SuperOperator full_register_generator(const ClockSpec& spec, int n_max);
std::vector<double> register_probabilities(const CMatrix& rho, int dim);
/// Projective register readout: zeroes every block off-diagonal in n.
CMatrix dephase_register(const CMatrix& rho, int dim);
/// Largest Frobenius norm among the off-diagonal register blocks.
double off_block_norm(const CMatrix& rho, int dim);

}  // namespace tickwork
