#include "tickwork/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "tickwork/evolution.hpp"

namespace tickwork {

namespace {

struct LineFit {
  double slope = 0, intercept = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) fail("numerical", "degenerate abscissae in line fit");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

AsymptoticRates eig_rates(const ClockSpec& spec) {
  // Differencing on a unit-scale copy keeps the extracted ratio independent
  // of the clock's overall rate scale down to rounding.
  double scale = spec.hamiltonian.cwiseAbs().maxCoeff();
  for (const auto& j : spec.jumps) scale = std::max(scale, j.rate);
  if (scale <= 0) scale = 1.0;
  ClockSpec unit = spec;
  unit.hamiltonian /= scale;
  for (auto& j : unit.jumps) j.rate /= scale;

  const cplx lam0 = leading_eigenvalue(build_generator(unit, 0.0));
  auto lam = [&](double chi) { return leading_eigenvalue(build_generator(unit, chi)); };

  const double steps[2] = {1e-3, 5e-4};
  cplx d1[2], d2[2];
  for (int i = 0; i < 2; ++i) {
    const cplx lp = lam(steps[i]), lm = lam(-steps[i]);
    d1[i] = (lp - lm) / (2.0 * steps[i]);
    d2[i] = (lp - 2.0 * lam0 + lm) / (steps[i] * steps[i]);
  }
  const cplx first = (4.0 * d1[1] - d1[0]) / 3.0;
  const cplx second = (4.0 * d2[1] - d2[0]) / 3.0;

  AsymptoticRates out;
  out.nu = scale * std::imag(first);  // real part of -i * lambda'(0)
  out.sigma_rate = scale * -std::real(second);
  out.r1 = std::imag(first) / -std::real(second);
  return out;
}

MomentSeries moments_with_escalation(const ClockSpec& spec, int& n_max,
                                     const std::vector<double>& times) {
  for (;;) {
    try {
      return tick_number_moments(spec, initial_state(spec, TruncatedRegister{n_max}), times);
    } catch (const Error& e) {
      if (e.kind() != "truncation" || n_max >= 4096) throw;
      n_max = 2 * n_max + 16;
    }
  }
}

AsymptoticRates slope_rates(const ClockSpec& spec) {
  int n_max = 64;
  double t_hi = 1.0, mean_hi = 0.0;
  for (int iter = 0;; ++iter) {
    if (iter == 60)
      fail("convergence", "slope fit: fewer than 40 ticks accumulate by t = " +
                              std::to_string(t_hi));
    mean_hi = moments_with_escalation(spec, n_max, {t_hi}).mean[0];
    if (mean_hi >= 40.0) break;
    t_hi *= 2.0;
  }

  // Window spanning roughly ticks 20 through 40, deep in the linear regime.
  const double per_tick = t_hi / mean_hi;
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(per_tick * (20.0 + 2.0 * k));
  const MomentSeries series = moments_with_escalation(spec, n_max, times);

  AsymptoticRates out;
  out.nu = fit_line(series.times, series.mean).slope;
  out.sigma_rate = fit_line(series.times, series.variance).slope;
  out.r1 = out.nu / out.sigma_rate;
  return out;
}

void check_rates(const ClockSpec& spec, const AsymptoticRates& rates) {
  const PropertyFlags flags = validate_elementary(spec);
  bool has_tick = false;
  for (const auto& j : spec.jumps) has_tick |= j.delta > 0;
  if (flags.irreversible_ticks && has_tick && (rates.nu <= 0 || rates.sigma_rate <= 0))
    fail("numerical", "cumulant rates came out non-positive for a ticking clock");
}

// Nodes and weights of the 7-point Gauss and 15-point Kronrod pair on [-1, 1].
constexpr double kKronrodX[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
constexpr double kKronrodW[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
constexpr double kGaussW[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

/// omega(t) and the still-undrained mass, both read off e^{L0 t} rho_reset.
struct WaitingKernel {
  CMatrix l0;      // d^2 x d^2 no-tick generator
  CMatrix weight;  // summed tick jump weight, d x d
  CVector start;   // vectorized reset state
  int dim = 0;

  void eval(double t, double& density, double& mass) const {
    const CVector v = matrix_exponential(l0, t) * start;
    const CMatrix sigma = devectorize(v, dim);
    density = (weight * sigma).trace().real();
    mass = sigma.trace().real();
  }

  double density_at(double t) const {
    double d, m;
    eval(t, d, m);
    if (d < -1e-10)
      fail("numerical", "waiting-time density " + std::to_string(d) + " below -1e-10");
    return std::max(0.0, d);
  }

  double mass_at(double t) const {
    double d, m;
    eval(t, d, m);
    return m;
  }
};

struct PanelMoments {
  double gauss[3] = {0, 0, 0};    // integrals of omega, t omega, t^2 omega
  double kronrod[3] = {0, 0, 0};
};

PanelMoments panel_moments(const WaitingKernel& kernel, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  PanelMoments out;
  for (int i = 0; i < 8; ++i) {
    const int copies = i == 7 ? 1 : 2;
    for (int s = 0; s < copies; ++s) {
      const double t = mid + (s == 0 ? half : -half) * kKronrodX[i];
      const double w = kernel.density_at(t);
      const double f[3] = {w, t * w, t * t * w};
      for (int c = 0; c < 3; ++c) {
        out.kronrod[c] += half * kKronrodW[i] * f[c];
        if (i % 2 == 1) out.gauss[c] += half * kGaussW[i / 2] * f[c];
      }
    }
  }
  return out;
}

void integrate_adaptive(const WaitingKernel& kernel, double a, double b, double width,
                        const double scale[3], int depth, double out[3]) {
  const PanelMoments pm = panel_moments(kernel, a, b);
  double err = 0;
  for (int c = 0; c < 3; ++c)
    err = std::max(err, std::abs(pm.kronrod[c] - pm.gauss[c]) / scale[c]);
  if (err <= 1e-8 * (b - a) / width + 1e-15) {
    for (int c = 0; c < 3; ++c) out[c] += pm.kronrod[c];
    return;
  }
  if (depth >= 45)
    fail("integration", "waiting-time quadrature did not converge by depth 45");
  const double mid = 0.5 * (a + b);
  integrate_adaptive(kernel, a, mid, width, scale, depth + 1, out);
  integrate_adaptive(kernel, mid, b, width, scale, depth + 1, out);
}

}  // namespace

AsymptoticRates fcs_rates(const ClockSpec& spec, RateMethod method) {
  stationary_state(build_generator(spec, 0.0));  // uniqueness gate
  const AsymptoticRates rates =
      method == RateMethod::eig_derivative ? eig_rates(spec) : slope_rates(spec);
  check_rates(spec, rates);
  return rates;
}

RateCrossCheck fcs_cross_check(const ClockSpec& spec) {
  RateCrossCheck out;
  out.eig = fcs_rates(spec, RateMethod::eig_derivative);
  out.slope = fcs_rates(spec, RateMethod::slope_fit);
  out.nu_rel_diff = std::abs(out.slope.nu - out.eig.nu) / std::abs(out.eig.nu);
  out.sigma_rel_diff =
      std::abs(out.slope.sigma_rate - out.eig.sigma_rate) / std::abs(out.eig.sigma_rate);
  if (out.nu_rel_diff > 1e-3 || out.sigma_rel_diff > 1e-3)
    fail("consistency", "cumulant rate methods disagree: nu rel diff " +
                            std::to_string(out.nu_rel_diff) + ", variance rate rel diff " +
                            std::to_string(out.sigma_rel_diff));
  return out;
}

WaitingTimeDistribution waiting_time(const ClockSpec& spec, const CMatrix& reset_state,
                                     std::vector<double> grid) {
  if (!validate_elementary(spec).elementary())
    fail("precondition", "waiting_time: spec must satisfy all four clock properties");
  if (reset_state.rows() != spec.dim || reset_state.cols() != spec.dim)
    fail("dimension", "waiting_time: reset state is not dim x dim");
  if (!is_hermitian(reset_state) || !is_psd(reset_state, 1e-10) ||
      std::abs(reset_state.trace().real() - 1.0) > 1e-10)
    fail("validation", "waiting_time: reset state is not a density operator");
  if (grid.empty()) fail("precondition", "waiting_time: grid must be non-empty");
  double prev = -1e-300;
  for (double t : grid) {
    if (!std::isfinite(t) || t < 0 || t <= prev)
      fail("precondition", "waiting_time: grid must be finite, nonnegative, increasing");
    prev = t;
  }

  const GeneratorParts parts = split_generator(spec);
  WaitingKernel kernel;
  kernel.l0 = parts.l0.action;
  kernel.dim = spec.dim;
  kernel.start = vectorize(reset_state);
  kernel.weight = CMatrix::Zero(spec.dim, spec.dim);
  for (const auto& j : spec.jumps)
    if (j.delta == 1) kernel.weight += j.rate * (j.op.adjoint() * j.op).eval();

  Eigen::ComplexEigenSolver<CMatrix> ces(kernel.l0, false);
  const double abscissa = ces.eigenvalues().real().maxCoeff();
  if (abscissa >= -1e-12)
    fail("dark-state",
         "waiting_time: the no-tick generator has a non-decaying mode; part of the "
         "state never reaches the tick channel");

  // Horizon where the exponential-tail bound on all three moments is negligible.
  double t_end = std::max(grid.back(), 1.0 / -abscissa);
  for (int i = 0;; ++i) {
    if (i == 200) fail("integration", "waiting_time: tail horizon search did not terminate");
    const double s = kernel.mass_at(t_end);
    const double reach = t_end + 1.0 / -abscissa;
    if (s < 1e-13 && 10.0 * s * reach * reach < 1e-12) break;
    t_end *= 1.5;
  }

  // Coarse pass fixes the component scales, then each eighth is refined.
  double scale[3] = {0, 0, 0};
  const double width = t_end;
  for (int k = 0; k < 8; ++k) {
    const PanelMoments pm = panel_moments(kernel, width * k / 8.0, width * (k + 1) / 8.0);
    for (int c = 0; c < 3; ++c) scale[c] += pm.kronrod[c];
  }
  for (int c = 0; c < 3; ++c) scale[c] = std::max(std::abs(scale[c]), 1e-12);

  double moments[3] = {0, 0, 0};
  for (int k = 0; k < 8; ++k)
    integrate_adaptive(kernel, width * k / 8.0, width * (k + 1) / 8.0, width, scale, 0,
                       moments);

  WaitingTimeDistribution out;
  if (moments[0] < 1.0 - 1e-6)
    fail("dark-state", "waiting_time: density integrates to " + std::to_string(moments[0]) +
                           "; mass is trapped away from the tick channel");
  out.mu = moments[1];
  out.sigma2 = moments[2] - out.mu * out.mu;
  if (out.sigma2 <= 0)
    fail("numerical", "waiting_time: non-positive variance from quadrature");
  out.r2 = out.mu * out.mu / out.sigma2;

  out.grid = std::move(grid);
  out.density.reserve(out.grid.size());
  for (double t : out.grid) out.density.push_back(kernel.density_at(t));

  // Extend the tabulation until the mass past its end is negligible.
  const double spacing = out.grid.size() > 1
                             ? out.grid.back() - out.grid[out.grid.size() - 2]
                             : std::max(out.grid.back(), t_end / 64.0);
  while (kernel.mass_at(out.grid.back()) >= 1e-9) {
    if (out.grid.size() > 100000)
      fail("integration", "waiting_time: grid extension spacing too fine for the tail");
    out.grid.push_back(out.grid.back() + spacing);
    out.density.push_back(kernel.density_at(out.grid.back()));
  }
  return out;
}

CMatrix reset_state_after_tick(const ClockSpec& spec) {
  const CMatrix rho = stationary_state(build_generator(spec, 0.0));
  CMatrix out = CMatrix::Zero(spec.dim, spec.dim);
  for (const auto& j : spec.jumps)
    if (j.delta == 1) out += j.rate * (j.op * rho * j.op.adjoint()).eval();
  const double tr = out.trace().real();
  if (tr <= 1e-14)
    fail("dark-state", "reset_state_after_tick: the stationary state never feeds the "
                       "tick channel");
  return out / tr;
}

PrecisionReport check_precision_identity(const ClockSpec& spec, const CMatrix& reset_state) {
  const AsymptoticRates rates = fcs_rates(spec, RateMethod::eig_derivative);
  const double mu_guess = 1.0 / std::max(rates.nu, 1e-12);
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(0.1 * k * mu_guess);
  const WaitingTimeDistribution wt = waiting_time(spec, reset_state, std::move(grid));

  PrecisionReport rep;
  rep.r1 = rates.r1;
  rep.r2 = wt.r2;
  rep.nu_mu = rates.nu * wt.mu;
  rep.sigma_ratio = rates.sigma_rate * wt.mu * wt.mu * wt.mu / wt.sigma2;
  rep.identity_holds = std::abs(rep.nu_mu - 1.0) < 1e-6 &&
                       std::abs(rep.sigma_ratio - 1.0) < 1e-5 &&
                       std::abs(rep.r1 / rep.r2 - 1.0) < 1e-5;
  return rep;
}

AllanEstimate allan_variance_formula(const AsymptoticRates& rates, double tau) {
  if (!(tau > 0) || !std::isfinite(tau))
    fail("precondition", "allan_variance_formula: tau must be positive");
  return {tau, rates.sigma_rate / tau, 0.0};
}

AllanEstimate allan_variance_trajectory(const TickRecord& record, double tau, int bins) {
  if (!(tau > 0) || !std::isfinite(tau))
    fail("precondition", "allan_variance_trajectory: tau must be positive");
  if (bins < 1) fail("precondition", "allan_variance_trajectory: need at least one bin");
  if (record.horizon + 1e-9 < (bins + 1) * tau)
    fail("length", "allan_variance_trajectory: record spans " +
                       std::to_string(record.horizon) + " but needs (bins + 1) * tau = " +
                       std::to_string((bins + 1) * tau));

  std::vector<long> counts(bins + 2);
  size_t idx = 0;
  for (int k = 0; k <= bins + 1; ++k) {
    const double edge = k * tau;
    while (idx < record.tick_times.size() && record.tick_times[idx] <= edge) ++idx;
    counts[k] = static_cast<long>(idx);
  }

  std::vector<double> terms(bins);
  double total = 0;
  for (int k = 0; k < bins; ++k) {
    const double d = static_cast<double>(counts[k + 2] - 2 * counts[k + 1] + counts[k]);
    terms[k] = d * d / (2.0 * tau * tau);
    total += terms[k];
  }

  AllanEstimate out;
  out.tau = tau;
  out.value = total / bins;

  // Batch means absorb the 2-bin dependence between adjacent terms.
  const int batches = std::clamp(bins / 8, 2, 64);
  const int batch_len = bins / batches;
  if (batch_len >= 2) {
    std::vector<double> means(batches, 0.0);
    for (int b = 0; b < batches; ++b) {
      for (int j = 0; j < batch_len; ++j) means[b] += terms[b * batch_len + j];
      means[b] /= batch_len;
    }
    double bar = 0;
    for (double m : means) bar += m;
    bar /= batches;
    double ss = 0;
    for (double m : means) ss += (m - bar) * (m - bar);
    out.std_error = std::sqrt(ss / (static_cast<double>(batches) * (batches - 1)));
  }
  return out;
}

}  // namespace tickwork
