#include "doctest.h"

#include <cmath>
#include <vector>

#include "tickwork/evolution.hpp"
#include "tickwork/statistics.hpp"
#include "test_util.hpp"

using namespace tickwork;
namespace tu = tickwork::testutil;

namespace {

std::vector<double> uniform_grid(double step, int count) {
  std::vector<double> g;
  for (int k = 0; k <= count; ++k) g.push_back(step * k);
  return g;
}

TickRecord synthetic_record(RandomStream& rng, int stages, double rate, double horizon) {
  TickRecord rec;
  rec.clock_id = "synthetic";
  rec.horizon = horizon;
  double t = 0;
  for (;;) {
    for (int s = 0; s < stages; ++s) t += rng.exponential(rate);
    if (t > horizon) break;
    rec.tick_times.push_back(t);
  }
  return rec;
}

}  // namespace

TEST_CASE("eigenvalue-derivative rates reproduce the renewal ladder cumulants") {
  const AsymptoticRates poisson = fcs_rates(poisson_clock(1.7), RateMethod::eig_derivative);
  CHECK(std::abs(poisson.nu - 1.7) < 1e-9);
  CHECK(std::abs(poisson.sigma_rate - 1.7) < 1e-8);
  CHECK(std::abs(poisson.r1 - 1.0) < 1e-8);

  for (int d = 2; d <= 5; ++d) {
    const AsymptoticRates r = fcs_rates(erlang_clock(d, 1.0), RateMethod::eig_derivative);
    CHECK(std::abs(r.nu - 1.0 / d) < 1e-9);
    CHECK(std::abs(r.sigma_rate - 1.0 / (d * d)) < 1e-8);
    CHECK(std::abs(r.r1 - d) < 1e-5);
  }

  // Two-state branching chain: stationary occupation (3/8, 5/8), so the mean
  // rate is 1.0 * 3/8 + 0.3 * 5/8.
  const AsymptoticRates branch =
      fcs_rates(branching_clock(1.0, 0.5, 0.3), RateMethod::eig_derivative);
  CHECK(std::abs(branch.nu - 0.5625) < 1e-9);
  CHECK(branch.sigma_rate > 0);
}

TEST_CASE("slope-fit rates agree with the eigenvalue route") {
  for (const ClockSpec& spec : {poisson_clock(1.0), erlang_clock(3, 1.0),
                                branching_clock(1.0, 0.5, 0.3),
                                two_level_coherent_clock(0.7, 1.0)}) {
    const RateCrossCheck cc = fcs_cross_check(spec);
    CHECK(cc.nu_rel_diff < 1e-4);
    CHECK(cc.sigma_rel_diff < 1e-4);
  }
}

TEST_CASE("degenerate stationary structure is rejected before differentiation") {
  ClockSpec split;
  split.dim = 2;
  split.hamiltonian = CMatrix::Zero(2, 2);
  split.initial_clockwork = CMatrix::Zero(2, 2);
  split.initial_clockwork(0, 0) = 1.0;
  CMatrix p0 = CMatrix::Zero(2, 2), p1 = CMatrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  split.jumps.push_back({1, 1.0, p0});
  split.jumps.push_back({1, 2.0, p1});
  CHECK(tu::thrown_kind([&] {
          fcs_rates(split, RateMethod::eig_derivative);
        }) == "degeneracy");
}

TEST_CASE("waiting time matches the exponential and three-stage closed forms") {
  const ClockSpec poisson = poisson_clock(2.0);
  const WaitingTimeDistribution wp =
      waiting_time(poisson, poisson.initial_clockwork, uniform_grid(0.1, 50));
  for (size_t i = 0; i < wp.grid.size(); ++i)
    CHECK(std::abs(wp.density[i] - 2.0 * std::exp(-2.0 * wp.grid[i])) < 1e-9);
  CHECK(std::abs(wp.mu - 0.5) < 1e-8);
  CHECK(std::abs(wp.sigma2 - 0.25) < 1e-8);
  CHECK(std::abs(wp.r2 - 1.0) < 1e-7);

  const ClockSpec erlang = erlang_clock(3, 1.0);
  const WaitingTimeDistribution we =
      waiting_time(erlang, erlang.initial_clockwork, uniform_grid(0.2, 40));
  for (size_t i = 0; i < we.grid.size(); ++i) {
    const double t = we.grid[i];
    CHECK(std::abs(we.density[i] - 0.5 * t * t * std::exp(-t)) < 1e-9);
  }
  CHECK(std::abs(we.mu - 3.0) < 1e-7);
  CHECK(std::abs(we.sigma2 - 3.0) < 1e-6);
  CHECK(std::abs(we.r2 - 3.0) < 1e-6);
}

TEST_CASE("waiting-time grid extends until the tail is drained") {
  const ClockSpec spec = poisson_clock(1.0);
  const WaitingTimeDistribution wt =
      waiting_time(spec, spec.initial_clockwork, uniform_grid(0.1, 10));
  REQUIRE(wt.grid.size() > 11);
  CHECK(std::exp(-wt.grid.back()) < 1e-9);
  const size_t last = wt.grid.size() - 1;
  CHECK(std::abs(wt.grid[last] - wt.grid[last - 1] - 0.1) < 1e-9);
  CHECK(std::abs(wt.density[last] - std::exp(-wt.grid[last])) < 1e-9);
}

TEST_CASE("waiting time rejects bad inputs and trapped clocks") {
  const ClockSpec poisson = poisson_clock(1.0);
  const std::vector<double> grid = uniform_grid(0.1, 10);

  ClockSpec reversible = poisson;
  reversible.jumps.push_back({-1, 0.5, CMatrix::Identity(1, 1)});
  CHECK(tu::thrown_kind([&] {
          waiting_time(reversible, poisson.initial_clockwork, grid);
        }) == "precondition");

  CHECK(tu::thrown_kind([&] {
          waiting_time(poisson, CMatrix::Identity(2, 2), grid);
        }) == "dimension");
  CHECK(tu::thrown_kind([&] {
          waiting_time(poisson, 2.0 * CMatrix::Identity(1, 1), grid);
        }) == "validation");
  CHECK(tu::thrown_kind([&] {
          waiting_time(poisson, poisson.initial_clockwork, {});
        }) == "precondition");
  CHECK(tu::thrown_kind([&] {
          waiting_time(poisson, poisson.initial_clockwork, {0.5, 0.2});
        }) == "precondition");

  // Ground state never reaches the decaying level, so mass sits there forever.
  ClockSpec trapped;
  trapped.dim = 2;
  trapped.hamiltonian = CMatrix::Zero(2, 2);
  trapped.initial_clockwork = CMatrix::Zero(2, 2);
  trapped.initial_clockwork(0, 0) = 1.0;
  CMatrix decay = CMatrix::Zero(2, 2);
  decay(0, 1) = 1.0;
  trapped.jumps.push_back({1, 1.0, decay});
  CHECK(tu::thrown_kind([&] {
          waiting_time(trapped, trapped.initial_clockwork, grid);
        }) == "dark-state");
}

TEST_CASE("post-tick reset state of a rank-one tick channel is pure") {
  const ClockSpec spec = two_level_coherent_clock(0.7, 1.0);
  const CMatrix reset = reset_state_after_tick(spec);
  CMatrix ground = CMatrix::Zero(2, 2);
  ground(0, 0) = 1.0;
  CHECK(tu::max_abs_diff(reset, ground) < 1e-12);
}

TEST_CASE("precision measures agree for reset clocks") {
  const ClockSpec poisson = poisson_clock(1.3);
  const PrecisionReport rp = check_precision_identity(poisson, poisson.initial_clockwork);
  CHECK(std::abs(rp.nu_mu - 1.0) < 1e-7);
  CHECK(std::abs(rp.sigma_ratio - 1.0) < 1e-6);
  CHECK(std::abs(rp.r1 / rp.r2 - 1.0) < 1e-6);
  CHECK(rp.identity_holds);

  const ClockSpec erlang = erlang_clock(4, 1.0);
  const PrecisionReport re = check_precision_identity(erlang, erlang.initial_clockwork);
  CHECK(std::abs(re.nu_mu - 1.0) < 1e-6);
  CHECK(std::abs(re.sigma_ratio - 1.0) < 1e-5);
  CHECK(std::abs(re.r1 - 4.0) < 1e-4);
  CHECK(std::abs(re.r2 - 4.0) < 1e-5);
  CHECK(re.identity_holds);

  const ClockSpec coherent = two_level_coherent_clock(0.7, 1.0);
  const PrecisionReport rc =
      check_precision_identity(coherent, reset_state_after_tick(coherent));
  CHECK(std::abs(rc.nu_mu - 1.0) < 1e-6);
  CHECK(std::abs(rc.sigma_ratio - 1.0) < 1e-5);
  CHECK(std::abs(rc.r1 / rc.r2 - 1.0) < 1e-5);
  CHECK(rc.identity_holds);
}

TEST_CASE("precision measures are invariant under a common timescale") {
  for (ClockSpec spec : {branching_clock(1.0, 0.5, 0.3),
                         two_level_coherent_clock(0.7, 1.0)}) {
    const double a = 7.3;
    ClockSpec fast = spec;
    fast.hamiltonian *= a;
    for (auto& j : fast.jumps) j.rate *= a;

    const AsymptoticRates r_slow = fcs_rates(spec, RateMethod::eig_derivative);
    const AsymptoticRates r_fast = fcs_rates(fast, RateMethod::eig_derivative);
    CHECK(std::abs(r_fast.r1 / r_slow.r1 - 1.0) < 1e-8);
    CHECK(std::abs(r_fast.nu / (a * r_slow.nu) - 1.0) < 1e-8);

    const CMatrix reset = reset_state_after_tick(spec);
    const WaitingTimeDistribution w_slow =
        waiting_time(spec, reset, uniform_grid(0.2 / r_slow.nu, 40));
    const WaitingTimeDistribution w_fast =
        waiting_time(fast, reset, uniform_grid(0.2 / r_fast.nu, 40));
    CHECK(std::abs(w_fast.r2 / w_slow.r2 - 1.0) < 1e-8);
    CHECK(std::abs(w_fast.mu * a / w_slow.mu - 1.0) < 1e-8);
  }
}

TEST_CASE("second arrival equals the waiting-time self-convolution") {
  const ClockSpec spec = two_level_coherent_clock(0.7, 1.0);
  const double h = 0.01;
  const WaitingTimeDistribution wt =
      waiting_time(spec, spec.initial_clockwork, uniform_grid(h, 2000));

  std::vector<double> probe;
  for (int m = 50; m <= 600; m += 50) probe.push_back(m * h);
  const std::vector<double> arrival =
      time_of_arrival_density(spec, initial_state(spec, {8}), 2, probe);

  for (size_t i = 0; i < probe.size(); ++i) {
    const int m = static_cast<int>(std::lround(probe[i] / h));
    // Composite Simpson over the convolution integral, everything on-grid.
    double conv = 0;
    for (int k = 0; k <= m; ++k) {
      const double w = (k == 0 || k == m) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      conv += w * wt.density[k] * wt.density[m - k];
    }
    conv *= h / 3.0;
    CHECK(std::abs(conv - arrival[i]) < 1e-6);
  }
}

TEST_CASE("allan variance formula scales inversely with the window") {
  const AsymptoticRates rates = fcs_rates(erlang_clock(3, 3.0), RateMethod::eig_derivative);
  const AllanEstimate a10 = allan_variance_formula(rates, 10.0);
  CHECK(std::abs(a10.value - 1.0 / 30.0) < 1e-9);
  CHECK(a10.std_error == 0.0);
  const AllanEstimate a20 = allan_variance_formula(rates, 20.0);
  CHECK(std::abs(a20.value - 0.5 * a10.value) < 1e-12);
  CHECK(tu::thrown_kind([&] { allan_variance_formula(rates, 0.0); }) == "precondition");
}

TEST_CASE("allan trajectory estimator vanishes on a metronome record") {
  TickRecord rec;
  rec.clock_id = "metronome";
  rec.horizon = 250.0;
  for (int k = 1; k <= 250; ++k) rec.tick_times.push_back(static_cast<double>(k));
  const AllanEstimate est = allan_variance_trajectory(rec, 5.0, 40);
  CHECK(est.value == 0.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("allan trajectory estimator tracks the formula value") {
  RandomStream rng(4242);
  const TickRecord poisson = synthetic_record(rng, 1, 1.0, 1100.0);
  const AllanEstimate ep = allan_variance_trajectory(poisson, 5.0, 200);
  REQUIRE(ep.std_error > 0);
  CHECK(ep.std_error < 0.05);
  CHECK(std::abs(ep.value - 0.2) < 5.0 * ep.std_error);

  const TickRecord erlang = synthetic_record(rng, 3, 1.0, 2200.0);
  const AllanEstimate ee = allan_variance_trajectory(erlang, 10.0, 200);
  CHECK(std::abs(ee.value - 1.0 / 90.0) < 5.0 * ee.std_error);

  CHECK(tu::thrown_kind([&] {
          allan_variance_trajectory(poisson, 5.0, 2000);
        }) == "length");
}

TEST_CASE("allan trajectory deviation shrinks with record length") {
  RandomStream rng(77);
  double dev_short = 0, dev_long = 0;
  {
    const TickRecord rec = synthetic_record(rng, 1, 1.0, 2.1e3);
    dev_short = std::abs(allan_variance_trajectory(rec, 5.0, 400).value - 0.2);
  }
  {
    const TickRecord rec = synthetic_record(rng, 1, 1.0, 2.1e5);
    dev_long = std::abs(allan_variance_trajectory(rec, 5.0, 40000).value - 0.2);
  }
  CHECK(dev_long < dev_short);
}
