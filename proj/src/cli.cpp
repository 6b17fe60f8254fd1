#include "tickwork/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tickwork/clock_model.hpp"
#include "tickwork/discrete_maps.hpp"
#include "tickwork/errors.hpp"
#include "tickwork/evolution.hpp"
#include "tickwork/statistics.hpp"
#include "tickwork/structure_lab.hpp"
#include "tickwork/trajectories.hpp"

namespace tickwork {

using nlohmann::json;

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c)
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_double(const std::string& text, const std::string& flag) {
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail("usage", flag + ": cannot parse \"" + text + "\" as a number");
  }
  if (used != text.size()) fail("usage", flag + ": trailing junk in \"" + text + "\"");
  return v;
}

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const std::string& part : split_on(text, ','))
    out.push_back(parse_double(part, flag));
  if (out.empty()) fail("usage", flag + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  for (double v : parse_list(text, flag)) {
    const int n = static_cast<int>(v);
    if (v != n) fail("usage", flag + ": expected integers");
    out.push_back(n);
  }
  return out;
}

// "a:b:step" inclusive of both ends up to rounding slack on the last point.
std::vector<double> parse_range(const std::string& text, const std::string& flag) {
  const auto parts = split_on(text, ':');
  if (parts.size() != 3) fail("usage", flag + ": expected a:b:step");
  const double a = parse_double(parts[0], flag);
  const double b = parse_double(parts[1], flag);
  const double step = parse_double(parts[2], flag);
  if (!(step > 0) || !std::isfinite(step)) fail("usage", flag + ": step must be positive");
  if (!(b >= a) || !std::isfinite(a) || !std::isfinite(b))
    fail("usage", flag + ": needs finite a <= b");
  std::vector<double> out;
  const long n = static_cast<long>(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(a + step * i);
  return out;
}

std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value) {
  if (flag_given) return flag_value;
  if (const char* env = std::getenv("TICKWORK_SEED")) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || end == env || *end != '\0')
      fail("usage", "TICKWORK_SEED: cannot parse \"" + std::string(env) +
                        "\" as an unsigned integer");
    return v;
  }
  return 0;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) fail("data", "cannot open output file: " + path);
  out << content;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

ClockSpec elementary_spec(const std::string& path, const std::string& sub) {
  AnySpec any = load_spec(path);
  if (ClockSpec* spec = std::get_if<ClockSpec>(&any)) return std::move(*spec);
  fail("unsupported", sub + ": general clock specs are not supported here");
}

struct CommonOpts {
  std::string spec_path;
  std::string out_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  int threads = 1;
};

void run_validate(const std::string& path, double tol) {
  AnySpec any = load_spec(path);
  ToleranceConfig cfg;
  if (tol > 0) cfg = {tol, tol, tol, tol};
  json out;
  if (const ClockSpec* spec = std::get_if<ClockSpec>(&any)) {
    const PropertyFlags f = validate_elementary(*spec, cfg);
    out = {{"self_timed", f.self_timed},
           {"clockwork_independent", f.clockwork_independent},
           {"serial_registers", f.serial_registers},
           {"irreversible_ticks", f.irreversible_ticks},
           {"elementary", f.elementary()}};
  } else {
    const GeneralDiagnostics diag = validate_general(std::get<GeneralClockSpec>(any), cfg);
    json support = json::array();
    for (const auto& [from, to] : diag.jump_support) support.push_back({from, to});
    out = {{"self_timed", diag.flags.self_timed},
           {"clockwork_independent", diag.flags.clockwork_independent},
           {"serial_registers", diag.flags.serial_registers},
           {"irreversible_ticks", diag.flags.irreversible_ticks},
           {"jump_support", std::move(support)},
           {"notes", diag.notes}};
  }
  print_json(out);
}

void run_evolve(const CommonOpts& opts, const std::string& times_str, int n_max,
                bool plot_data) {
  const ClockSpec spec = elementary_spec(opts.spec_path, "evolve");
  const std::vector<double> times = parse_range(times_str, "--times");
  if (n_max < 1) fail("usage", "--nmax must be at least 1");
  ClockState state = initial_state(spec, TruncatedRegister{n_max});
  std::string csv;
  if (plot_data) {
    csv = "t,series,value\n";
  } else {
    csv = "t";
    for (int n = 0; n <= n_max; ++n) csv += ",p_" + std::to_string(n);
    csv += ",mean,var\n";
  }
  std::vector<double> last_p;
  for (double t : times) {
    state = evolve(spec, state, t - state.time);
    last_p = state.probabilities();
    const double mean = state.mean(), var = state.variance();
    if (plot_data) {
      for (size_t n = 0; n < last_p.size(); ++n)
        csv += g17(t) + ",p_" + std::to_string(n) + "," + g17(last_p[n]) + "\n";
      csv += g17(t) + ",mean," + g17(mean) + "\n";
      csv += g17(t) + ",var," + g17(var) + "\n";
    } else {
      csv += g17(t);
      for (double p : last_p) csv += "," + g17(p);
      csv += "," + g17(mean) + "," + g17(var) + "\n";
    }
  }
  if (!last_p.empty() && last_p.back() > 1e-8)
    fail("truncation", "evolve: " + g17(last_p.back()) +
                           " probability mass in the top register bin; raise --nmax");
  write_text(opts.out_path, csv);
}

void run_fcs(const std::string& path, const std::string& method) {
  const ClockSpec spec = elementary_spec(path, "fcs");
  json out;
  if (method == "both") {
    const RateCrossCheck check = fcs_cross_check(spec);
    out = {{"nu", check.eig.nu},
           {"sigma", check.eig.sigma_rate},
           {"r1", check.eig.r1},
           {"nu_rel_diff", check.nu_rel_diff},
           {"sigma_rel_diff", check.sigma_rel_diff}};
  } else if (method == "eig" || method == "slope") {
    const AsymptoticRates rates =
        fcs_rates(spec, method == "eig" ? RateMethod::eig_derivative : RateMethod::slope_fit);
    out = {{"nu", rates.nu}, {"sigma", rates.sigma_rate}, {"r1", rates.r1}};
  } else {
    fail("usage", "--method must be eig, slope, or both");
  }
  print_json(out);
}

void run_waiting_time(const CommonOpts& opts, const std::string& grid_str) {
  const ClockSpec spec = elementary_spec(opts.spec_path, "waiting-time");
  const CMatrix reset = reset_state_after_tick(spec);
  WaitingTimeDistribution dist;
  if (!grid_str.empty()) {
    dist = waiting_time(spec, reset, parse_range(grid_str, "--grid"));
  } else {
    const double mu = waiting_time(spec, reset, {0.0}).mu;
    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i) grid.push_back(5.0 * mu * i / 200);
    dist = waiting_time(spec, reset, std::move(grid));
  }
  print_json({{"mu", dist.mu}, {"sigma2", dist.sigma2}, {"r2", dist.r2}});
  if (!opts.out_path.empty()) {
    std::string csv = "t,density\n";
    for (size_t i = 0; i < dist.grid.size(); ++i)
      csv += g17(dist.grid[i]) + "," + g17(dist.density[i]) + "\n";
    write_text(opts.out_path, csv);
  }
}

void run_allan(const CommonOpts& opts, const std::string& tau_str, const std::string& mode,
               double horizon, int bins) {
  const ClockSpec spec = elementary_spec(opts.spec_path, "allan");
  const std::vector<double> taus = parse_list(tau_str, "--tau");
  std::string csv = "tau,allan,std_error\n";
  if (mode == "formula") {
    const AsymptoticRates rates = fcs_rates(spec, RateMethod::eig_derivative);
    for (double tau : taus) {
      const AllanEstimate est = allan_variance_formula(rates, tau);
      csv += g17(est.tau) + "," + g17(est.value) + "," + g17(est.std_error) + "\n";
    }
  } else if (mode == "trajectory") {
    const std::uint64_t seed = resolve_seed(opts.seed_opt->count() > 0, opts.seed);
    const TickRecord record = sample_trajectory(spec, horizon, seed);
    for (double tau : taus) {
      const int used = bins > 0 ? bins : static_cast<int>(std::floor(horizon / tau)) - 1;
      const AllanEstimate est = allan_variance_trajectory(record, tau, used);
      csv += g17(est.tau) + "," + g17(est.value) + "," + g17(est.std_error) + "\n";
    }
  } else {
    fail("usage", "--mode must be formula or trajectory");
  }
  write_text(opts.out_path, csv);
}

void run_sample(const CommonOpts& opts, double horizon, int n_traj) {
  const ClockSpec spec = elementary_spec(opts.spec_path, "sample");
  const std::uint64_t seed = resolve_seed(opts.seed_opt->count() > 0, opts.seed);
  const auto records = sample_ensemble(spec, horizon, seed, n_traj, opts.threads);
  std::string lines;
  for (const TickRecord& rec : records) {
    json row = {{"clock_id", rec.clock_id}, {"tick_times", rec.tick_times}};
    lines += row.dump() + "\n";
  }
  write_text(opts.out_path, lines);
}

void run_pair(const CommonOpts& opts, const std::string& spec_b_path, double horizon,
              int n_pairs, bool counts_mode, int n_at) {
  const ClockSpec spec_a = elementary_spec(opts.spec_path, "pair");
  const ClockSpec spec_b = elementary_spec(spec_b_path, "pair");
  const std::uint64_t seed = resolve_seed(opts.seed_opt->count() > 0, opts.seed);
  const auto seqs = sample_pair_ensemble(spec_a, spec_b, horizon, seed, n_pairs, opts.threads);
  if (!counts_mode) {
    std::string lines;
    for (const TickSequence& seq : seqs) {
      json row = json::array();
      for (const PairEvent& ev : seq.entries)
        row.push_back({std::string(1, ev.label), ev.time});
      lines += row.dump() + "\n";
    }
    write_text(opts.out_path, lines);
    return;
  }
  const RelativeCountDistribution dist = relative_counts(seqs, n_at);
  print_json({{"n", dist.n},
              {"samples", dist.samples},
              {"pmf", dist.pmf},
              {"lower", dist.lower},
              {"upper", dist.upper}});
  if (!opts.out_path.empty()) {
    std::string csv = "k,pmf,lower,upper\n";
    for (size_t k = 0; k < dist.pmf.size(); ++k)
      csv += std::to_string(k) + "," + g17(dist.pmf[k]) + "," + g17(dist.lower[k]) + "," +
             g17(dist.upper[k]) + "\n";
    write_text(opts.out_path, csv);
  }
}

void run_discrete(const CommonOpts& opts, double delta, int steps, const std::string& order) {
  const ClockSpec spec = elementary_spec(opts.spec_path, "discrete");
  StepOrder step_order;
  if (order == "first")
    step_order = StepOrder::first;
  else if (order == "exact")
    step_order = StepOrder::exact;
  else
    fail("usage", "--order must be first or exact");
  const DiscreteStep step = build_step(spec, delta, step_order);
  const FirstTickDistribution dist = bitstring_distribution(step, spec.initial_clockwork, steps);
  print_json({{"delta", dist.delta}, {"order", order}, {"residual", dist.residual},
              {"pmf", dist.pmf}});
  if (!opts.out_path.empty()) {
    std::string csv = "step,time,probability\n";
    for (size_t j = 0; j < dist.pmf.size(); ++j)
      csv += std::to_string(j + 1) + "," + g17((j + 1) * dist.delta) + "," + g17(dist.pmf[j]) +
             "\n";
    write_text(opts.out_path, csv);
  }
}

void run_ki(const std::string& channel_path, std::uint64_t seed) {
  const QuantumChannel channel = load_channel(channel_path);
  const KIDecomposition decomp = ki_decompose(channel, seed);
  json blocks = json::array();
  for (const KIBlock& b : decomp.blocks)
    blocks.push_back({{"c_dim", b.c_dim}, {"f_dim", b.f_dim}});
  json omegas = json::array();
  for (const CMatrix& omega : decomp.omegas) omegas.push_back(matrix_to_json(omega));
  print_json({{"dim", channel.dim},
              {"blocks", std::move(blocks)},
              {"residual", verify_ki(channel, decomp)},
              {"omegas", std::move(omegas)},
              {"basis", matrix_to_json(decomp.basis)}});
}

void run_zeno(double omega, double total_time, const std::string& m_str,
              const std::string& schedule_str, std::uint64_t seed) {
  ZenoConfig cfg;
  cfg.rabi_frequency = omega;
  cfg.total_time = total_time;
  cfg.measurement_counts = parse_int_list(m_str, "--m");
  cfg.seed = seed;
  if (schedule_str == "fixed") {
    cfg.schedule = ZenoSchedule::fixed;
  } else if (schedule_str.rfind("jitter:", 0) == 0) {
    cfg.schedule = ZenoSchedule::jittered;
    cfg.jitter_width = parse_double(schedule_str.substr(7), "--schedule");
  } else {
    fail("usage", "--schedule must be fixed or jitter:WIDTH");
  }
  json points = json::array();
  for (const ZenoPoint& pt : zeno_experiment(cfg))
    points.push_back(
        {{"m", pt.m}, {"survival", pt.survival}, {"mean_register", pt.mean_register}});
  print_json({{"omega", omega},
              {"time", total_time},
              {"schedule", schedule_str},
              {"points", std::move(points)}});
}

void run_swp(int dim, double omega, const std::string& alphas_str) {
  SWPConfig cfg;
  cfg.d = dim;
  cfg.omega = omega;
  cfg.alphas = parse_list(alphas_str, "--alphas");
  const SWPReport report = swp_demo(cfg);
  json alphas = json::array();
  for (const SWPAlphaReport& entry : report.alphas)
    alphas.push_back({{"alpha", entry.alpha},
                      {"gram_residual", entry.gram_residual},
                      {"completeness_residual", entry.completeness_residual},
                      {"arrival_times", entry.arrival_times},
                      {"arrival_probabilities", entry.arrival_probabilities}});
  print_json({{"dim", report.d},
              {"omega", report.omega},
              {"step_overlaps", report.step_overlaps},
              {"alphas", std::move(alphas)}});
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"tickwork: simulate and analyze quantum ticking clocks", "tickwork"};
  app.require_subcommand(1);

  std::string validate_spec;
  double validate_tol = 0;
  auto* validate = app.add_subcommand("validate", "Check a clock spec and report its flags");
  validate->add_option("--spec", validate_spec, "clock spec JSON file")->required();
  validate->add_option("--tolerance", validate_tol,
                       "override all operator sanity tolerances (default library values)");
  validate->callback([&] { run_validate(validate_spec, validate_tol); });

  CommonOpts evolve_opts;
  std::string evolve_times;
  int evolve_nmax = 16;
  bool evolve_plot = false;
  auto* evolve = app.add_subcommand("evolve", "Tick-number distribution over time");
  evolve->add_option("--spec", evolve_opts.spec_path, "clock spec JSON file")->required();
  evolve->add_option("--times", evolve_times, "time grid a:b:step")->required();
  evolve->add_option("--nmax", evolve_nmax, "register truncation (columns p_0..p_nmax)");
  evolve->add_option("--out", evolve_opts.out_path, "CSV output path (default stdout)");
  evolve->add_flag("--plot-data", evolve_plot, "emit long-format t,series,value rows");
  evolve->callback(
      [&] { run_evolve(evolve_opts, evolve_times, evolve_nmax, evolve_plot); });

  std::string fcs_spec, fcs_method = "eig";
  auto* fcs = app.add_subcommand("fcs", "Asymptotic tick rate and variance rate");
  fcs->add_option("--spec", fcs_spec, "clock spec JSON file")->required();
  fcs->add_option("--method", fcs_method, "eig, slope, or both (default eig)");
  fcs->callback([&] { run_fcs(fcs_spec, fcs_method); });

  CommonOpts wt_opts;
  std::string wt_grid;
  auto* wt = app.add_subcommand("waiting-time", "Tick interval density and moments");
  wt->add_option("--spec", wt_opts.spec_path, "clock spec JSON file")->required();
  wt->add_option("--grid", wt_grid, "density grid a:b:step (default 0 to 5 mean)");
  wt->add_option("--out", wt_opts.out_path, "density CSV path (moments go to stdout)");
  wt->callback([&] { run_waiting_time(wt_opts, wt_grid); });

  CommonOpts allan_opts;
  std::string allan_tau, allan_mode = "formula";
  double allan_horizon = 20000;
  int allan_bins = 0;
  auto* allan = app.add_subcommand("allan", "Allan variance of the tick frequency");
  allan->add_option("--spec", allan_opts.spec_path, "clock spec JSON file")->required();
  allan->add_option("--tau", allan_tau, "comma-separated averaging times")->required();
  allan->add_option("--mode", allan_mode, "formula or trajectory (default formula)");
  allan->add_option("--horizon", allan_horizon, "trajectory length (trajectory mode)");
  allan->add_option("--bins", allan_bins, "window count (default floor(horizon/tau)-1)");
  allan_opts.seed_opt =
      allan->add_option("--seed", allan_opts.seed, "sampling seed (default TICKWORK_SEED or 0)");
  allan->add_option("--out", allan_opts.out_path, "CSV output path (default stdout)");
  allan->callback(
      [&] { run_allan(allan_opts, allan_tau, allan_mode, allan_horizon, allan_bins); });

  CommonOpts sample_opts;
  double sample_horizon = 0;
  int sample_count = 1;
  auto* sample = app.add_subcommand("sample", "Quantum-jump trajectories as JSON lines");
  sample->add_option("--spec", sample_opts.spec_path, "clock spec JSON file")->required();
  sample->add_option("--horizon", sample_horizon, "time horizon per trajectory")->required();
  sample->add_option("--n-traj", sample_count, "number of trajectories")->required();
  sample_opts.seed_opt = sample->add_option("--seed", sample_opts.seed,
                                            "master seed (default TICKWORK_SEED or 0)");
  sample->add_option("--threads", sample_opts.threads, "worker threads (same output any count)");
  sample->add_option("--out", sample_opts.out_path, "JSONL output path (default stdout)");
  sample->callback([&] { run_sample(sample_opts, sample_horizon, sample_count); });

  CommonOpts pair_opts;
  std::string pair_spec_b;
  double pair_horizon = 0;
  int pair_count = 1;
  auto* pair = app.add_subcommand("pair", "Interleaved tick sequences of two clocks");
  pair->add_option("--spec-a", pair_opts.spec_path, "first clock spec")->required();
  pair->add_option("--spec-b", pair_spec_b, "second clock spec")->required();
  pair->add_option("--horizon", pair_horizon, "time horizon per run")->required();
  pair->add_option("--n-pairs", pair_count, "number of paired runs")->required();
  pair_opts.seed_opt =
      pair->add_option("--seed", pair_opts.seed, "master seed (default TICKWORK_SEED or 0)");
  pair->add_option("--threads", pair_opts.threads, "worker threads (same output any count)");
  pair->add_option("--out", pair_opts.out_path, "JSONL output path (default stdout)");
  pair->callback([&] {
    run_pair(pair_opts, pair_spec_b, pair_horizon, pair_count, false, 0);
  });

  CommonOpts rel_opts;
  std::string rel_spec_b;
  double rel_horizon = 0;
  int rel_count = 1, rel_n = 1;
  auto* rel = app.add_subcommand("relative-counts",
                                 "Distribution of B ticks at A's n-th tick");
  rel->add_option("--spec-a", rel_opts.spec_path, "first clock spec")->required();
  rel->add_option("--spec-b", rel_spec_b, "second clock spec")->required();
  rel->add_option("--horizon", rel_horizon, "time horizon per run")->required();
  rel->add_option("--n-pairs", rel_count, "number of paired runs")->required();
  rel->add_option("--n", rel_n, "index of the A tick to condition on")->required();
  rel_opts.seed_opt =
      rel->add_option("--seed", rel_opts.seed, "master seed (default TICKWORK_SEED or 0)");
  rel->add_option("--threads", rel_opts.threads, "worker threads (same output any count)");
  rel->add_option("--out", rel_opts.out_path, "pmf CSV path (summary goes to stdout)");
  rel->callback([&] { run_pair(rel_opts, rel_spec_b, rel_horizon, rel_count, true, rel_n); });

  CommonOpts disc_opts;
  double disc_delta = 0;
  int disc_steps = 0;
  std::string disc_order = "first";
  auto* disc = app.add_subcommand("discrete", "First-tick statistics of the stepped clock");
  disc->add_option("--spec", disc_opts.spec_path, "clock spec JSON file")->required();
  disc->add_option("--delta", disc_delta, "step width")->required();
  disc->add_option("--steps", disc_steps, "number of steps")->required();
  disc->add_option("--order", disc_order, "first or exact (default first)");
  disc->add_option("--out", disc_opts.out_path, "pmf CSV path (summary goes to stdout)");
  disc->callback([&] { run_discrete(disc_opts, disc_delta, disc_steps, disc_order); });

  std::string ki_channel;
  std::uint64_t ki_seed = 7;
  auto* ki = app.add_subcommand("ki", "Invariant block decomposition of a channel");
  ki->add_option("--channel", ki_channel, "channel JSON file {dim, kraus}")->required();
  ki->add_option("--seed", ki_seed, "random element seed (default 7)");
  ki->callback([&] { run_ki(ki_channel, ki_seed); });

  double zeno_omega = 0, zeno_time = 0;
  std::string zeno_m, zeno_schedule = "fixed";
  std::uint64_t zeno_seed = 11;
  auto* zeno = app.add_subcommand("zeno", "Rabi qubit under repeated register readout");
  zeno->add_option("--omega", zeno_omega, "Rabi frequency")->required();
  zeno->add_option("--time", zeno_time, "total evolution time")->required();
  zeno->add_option("--m", zeno_m, "comma-separated readout counts")->required();
  zeno->add_option("--schedule", zeno_schedule, "fixed or jitter:WIDTH (default fixed)");
  zeno->add_option("--seed", zeno_seed, "jitter seed (default 11)");
  zeno->callback([&] { run_zeno(zeno_omega, zeno_time, zeno_m, zeno_schedule, zeno_seed); });

  int swp_dim = 0;
  double swp_omega = 1.0;
  std::string swp_alphas;
  auto* swp = app.add_subcommand("swp", "Ladder clock angle states and arrival times");
  swp->add_option("--dim", swp_dim, "ladder dimension")->required();
  swp->add_option("--alphas", swp_alphas, "comma-separated shifts in [0,1)")->required();
  swp->add_option("--omega", swp_omega, "level spacing (default 1)");
  swp->callback([&] { run_swp(swp_dim, swp_omega, swp_alphas); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp&) {
    CLI::App* active = &app;
    while (!active->get_subcommands().empty()) active = active->get_subcommands().front();
    std::cout << active->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error_kind", "usage"}, {"detail", e.what()}}.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << json{{"error_kind", e.kind()}, {"detail", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error_kind", "internal"}, {"detail", e.what()}}.dump() << "\n";
    return 2;
  }
}

}  // namespace tickwork
