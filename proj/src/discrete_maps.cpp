#include "tickwork/discrete_maps.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "tickwork/evolution.hpp"
#include "tickwork/numerics.hpp"

namespace tickwork {

DiscreteStep build_step(const ClockSpec& spec, double delta, StepOrder order) {
  if (!validate_elementary(spec).elementary())
    fail("precondition", "build_step: spec must satisfy all four clock properties");
  if (!(delta > 0) || !std::isfinite(delta))
    fail("precondition", "build_step: delta must be positive and finite");

  const GeneratorParts parts = split_generator(spec);
  SuperOperator lplus = SuperOperator::zero(spec.dim);
  for (const auto& [d, part] : parts.l_shift)
    if (d > 0) lplus += part;

  DiscreteStep step;
  step.delta = delta;
  if (order == StepOrder::first) {
    CMatrix weight = CMatrix::Zero(spec.dim, spec.dim);
    for (const auto& j : spec.jumps) weight += j.rate * (j.op.adjoint() * j.op).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> ew(weight);
    const double wmax = ew.eigenvalues().maxCoeff();
    if (delta * wmax >= 0.5)
      fail("stability", "build_step: delta * max jump weight = " + std::to_string(delta * wmax) +
                            ", first order needs < 0.5");
    step.m0 = SuperOperator::identity(spec.dim);
    step.m0.action += delta * parts.l0.action;
    step.m1 = lplus * delta;
  } else {
    step.m0.dim = spec.dim;
    step.m0.action = matrix_exponential(parts.l0.action, delta);
    step.m1.dim = spec.dim;
    step.m1.action = matrix_exponential(build_generator(spec, 0.0).action, delta) - step.m0.action;
  }
  return step;
}

FirstTickDistribution bitstring_distribution(const DiscreteStep& step, const CMatrix& reset_state,
                                             int k) {
  const int dim = step.m0.dim;
  if (dim <= 0 || !(step.delta > 0))
    fail("precondition", "bitstring_distribution: step is not initialized");
  if (k < 1) fail("precondition", "bitstring_distribution: need at least one interval");
  if (reset_state.rows() != dim || reset_state.cols() != dim)
    fail("dimension", "bitstring_distribution: reset state is not dim x dim");
  if (!is_hermitian(reset_state) || !is_psd(reset_state, 1e-10) ||
      std::abs(reset_state.trace().real() - 1.0) > 1e-10)
    fail("validation", "bitstring_distribution: reset state is not a density operator");

  FirstTickDistribution out;
  out.delta = step.delta;
  out.pmf.resize(k);
  CMatrix rho = reset_state;
  for (int j = 0; j < k; ++j) {
    const double p = step.m1.apply(rho).trace().real();
    if (p < -1e-10)
      fail("numerical", "bitstring_distribution: interval weight " + std::to_string(p) +
                            " at slot " + std::to_string(j + 1));
    out.pmf[j] = std::max(p, 0.0);
    rho = step.m0.apply(rho);
  }
  out.residual = rho.trace().real();
  if (out.residual > 1e-6)
    fail("horizon", "bitstring_distribution: " + std::to_string(out.residual) +
                        " of the tick mass lies past k * delta, extend k");
  return out;
}

BitString first_tick_string(int slot, int k, double delta) {
  if (k < 1 || slot < 0 || slot > k)
    fail("precondition", "first_tick_string: need 0 <= slot <= k and k >= 1");
  BitString s;
  s.delta = delta;
  s.bits.assign(k, 0);
  if (slot > 0) s.bits[slot - 1] = 1;
  return s;
}

}  // namespace tickwork
