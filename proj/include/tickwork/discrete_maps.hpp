#pragma once

#include <vector>

#include "tickwork/clock_model.hpp"

namespace tickwork {

/// Two-outcome instrument for one interval of width delta: m0 carries the
/// no-tick branch, m1 the at-least-one-tick branch. m0 + m1 is trace
/// preserving and m1 is completely positive.
struct DiscreteStep {
  double delta = 0.0;
  SuperOperator m0, m1;
};

enum class StepOrder {
  first,  // m0 = 1 + delta L0, m1 = delta L+
  exact,  // m0 = e^{L0 delta}, m1 = e^{L delta} - e^{L0 delta}
};

/// Builds the tick/no-tick split of the interval-delta evolution. Requires an
/// elementary spec; first order additionally requires delta * max jump weight
/// < 0.5, otherwise a stability error.
DiscreteStep build_step(const ClockSpec& spec, double delta, StepOrder order);

/// Register readout after k intervals, reduced to the first-tick position.
struct FirstTickDistribution {
  double delta = 0.0;
  std::vector<double> pmf;  // pmf[j] = P(first tick in interval j+1)
  double residual = 0.0;    // no-tick mass left after k intervals
};

/// pmf over the first-tick interval: P(j) = Tr[m1 m0^{j-1} rho]. The k
/// intervals must leave no more than 1e-6 unticked mass, otherwise a horizon
/// error.
FirstTickDistribution bitstring_distribution(const DiscreteStep& step, const CMatrix& reset_state,
                                             int k);

/// Readout record of k interval registers. Only the first-tick position is
/// ever encoded; later intervals belong to the next tick's record.
struct BitString {
  std::vector<int> bits;
  double delta = 0.0;
};

/// The length-k string with its single 1 at `slot` (1-based); slot 0 encodes
/// the all-zero string.
BitString first_tick_string(int slot, int k, double delta);

}  // namespace tickwork
