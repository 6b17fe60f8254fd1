#pragma once

#include <vector>

#include "tickwork/clock_model.hpp"
#include "tickwork/trajectories.hpp"

namespace tickwork {

/// Asymptotic tick-count cumulant rates: <N_t> ~ nu t and Var N_t ~ sigma_rate t.
struct AsymptoticRates {
  double nu = 0;          // mean tick rate
  double sigma_rate = 0;  // variance growth rate
  double r1 = 0;          // nu / sigma_rate, the inverse Fano factor
};

enum class RateMethod { eig_derivative, slope_fit };

/// Extracts the cumulant rates either from counting-field derivatives of the
/// leading generator eigenvalue (central differences at 1e-3 and 5e-4 with
/// Richardson extrapolation) or from a linear fit of the register moments
/// over a late window spanning roughly ticks 20 to 40. Requires a unique
/// stationary state.
AsymptoticRates fcs_rates(const ClockSpec& spec, RateMethod method);

struct RateCrossCheck {
  AsymptoticRates eig, slope;
  double nu_rel_diff = 0, sigma_rel_diff = 0;
};

/// Runs both extraction methods; relative disagreement above 1e-3 raises a
/// consistency error.
RateCrossCheck fcs_cross_check(const ClockSpec& spec);

/// Density of the interval between consecutive ticks, tabulated on `grid`,
/// with moments from adaptive quadrature.
struct WaitingTimeDistribution {
  std::vector<double> grid, density;
  double mu = 0;      // mean waiting time
  double sigma2 = 0;  // waiting-time variance
  double r2 = 0;      // mu^2 / sigma2
};

/// omega(t) = Tr[J e^{L0 t} rho_reset], where L0 is the no-tick part of the
/// generator and J the summed tick jump weight. Moments come from adaptive
/// Gauss-Kronrod panels at relative tolerance 1e-8, with the integration
/// horizon extended until the exponential tail bound from the spectral
/// abscissa of L0 is negligible. The returned grid is the input grid,
/// extended past its end until the undrained mass there is below 1e-9.
WaitingTimeDistribution waiting_time(const ClockSpec& spec, const CMatrix& reset_state,
                                     std::vector<double> grid);

/// Post-tick clockwork state, the tick channel applied to the stationary
/// state and renormalized.
CMatrix reset_state_after_tick(const ClockSpec& spec);

/// Cross-route precision comparison. The report carries the raw ratios so a
/// violation points at the broken ingredient instead of just failing.
struct PrecisionReport {
  double r1 = 0, r2 = 0;
  double nu_mu = 0;        // nu * mu, expected 1
  double sigma_ratio = 0;  // sigma_rate * mu^3 / sigma2, expected 1
  // |nu_mu - 1| < 1e-6, |sigma_ratio - 1| < 1e-5, |r1/r2 - 1| < 1e-5
  bool identity_holds = false;
};

PrecisionReport check_precision_identity(const ClockSpec& spec, const CMatrix& reset_state);

struct AllanEstimate {
  double tau = 0;
  double value = 0;
  double std_error = 0;  // zero for the formula path
};

/// A_tau = sigma_rate / tau.
AllanEstimate allan_variance_formula(const AsymptoticRates& rates, double tau);

/// Averaged two-sample variance of tick frequencies over `bins` adjacent
/// windows of width tau; std_error by batch means. The record must span at
/// least (bins + 1) * tau.
AllanEstimate allan_variance_trajectory(const TickRecord& record, double tau, int bins);

}  // namespace tickwork
