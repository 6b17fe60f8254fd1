#include "tickwork/evolution.hpp"

#include <algorithm>
#include <cmath>

namespace tickwork {

namespace {

double one_norm(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().colwise().sum().maxCoeff();
}

double inf_norm(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

double op_norm_bound(const CMatrix& m) { return std::max(one_norm(m), inf_norm(m)); }

// Exact generator on the truncated register, applied block by block: never
// materializes the (n_max+1) d^2 square matrix.
class RegisterPropagator {
 public:
  RegisterPropagator(const ClockSpec& spec, int n_max)
      : parts_(split_generator(spec)),
        dd_(spec.dim * spec.dim),
        n_max_(n_max) {
    norm_bound_ = one_norm(parts_.l0.action);
    for (const auto& [shift, op] : parts_.l_shift) norm_bound_ += one_norm(op.action);
  }

  int size() const { return (n_max_ + 1) * dd_; }

  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    for (int n = 0; n <= n_max_; ++n)
      out.segment(n * dd_, dd_).noalias() = parts_.l0.action * in.segment(n * dd_, dd_);
    for (const auto& [shift, op] : parts_.l_shift)
      for (int n = 0; n <= n_max_; ++n) {
        const int tgt = std::clamp(n + shift, 0, n_max_);
        out.segment(tgt * dd_, dd_).noalias() += op.action * in.segment(n * dd_, dd_);
      }
  }

  /// e^{G dt} w by Taylor series over substeps chosen from the 1-norm bound.
  void advance(Eigen::VectorXcd& w, double dt, int extra_refinement) const {
    if (dt == 0.0) return;
    const double theta = 4.0;
    double raw = std::ceil(norm_bound_ * dt / theta);
    raw = std::max(1.0, raw) * (1 << extra_refinement);
    if (raw > 2e7) fail("integration", "expmv: substep count overflow; generator too stiff");
    const int steps = static_cast<int>(raw);
    const double h = dt / steps;
    Eigen::VectorXcd term(w.size()), tmp(w.size());
    for (int s = 0; s < steps; ++s) {
      term = w;
      for (int k = 1; k <= 64; ++k) {
        apply(term, tmp);
        term = (h / k) * tmp;
        w += term;
        if (term.norm() <= 1e-16 * w.norm()) break;
        if (k == 64) fail("integration", "expmv series did not converge in 64 terms");
      }
    }
  }

  double trace_of(const Eigen::VectorXcd& w) const {
    const int d = static_cast<int>(std::lround(std::sqrt(double(dd_))));
    double tr = 0;
    for (int n = 0; n <= n_max_; ++n)
      for (int i = 0; i < d; ++i) tr += w(n * dd_ + i * d + i).real();
    return tr;
  }

  double block_trace(const Eigen::VectorXcd& w, int n) const {
    const int d = static_cast<int>(std::lround(std::sqrt(double(dd_))));
    double tr = 0;
    for (int i = 0; i < d; ++i) tr += w(n * dd_ + i * d + i).real();
    return tr;
  }

 private:
  GeneratorParts parts_;
  int dd_, n_max_;
  double norm_bound_;
};

Eigen::VectorXcd pack(const ClockState& state) {
  const int dd = state.dim * state.dim;
  Eigen::VectorXcd w(static_cast<long>(state.components.size()) * dd);
  for (size_t n = 0; n < state.components.size(); ++n)
    w.segment(n * dd, dd) = vectorize(state.components[n]);
  return w;
}

ClockState unpack(const Eigen::VectorXcd& w, int dim, double time) {
  const int dd = dim * dim;
  ClockState out;
  out.time = time;
  out.dim = dim;
  out.components.resize(w.size() / dd);
  for (size_t n = 0; n < out.components.size(); ++n)
    out.components[n] = devectorize(w.segment(n * dd, dd), dim);
  return out;
}

void check_state(const ClockSpec& spec, const ClockState& state, const char* who) {
  if (state.dim != spec.dim)
    fail("dimension", std::string(who) + ": state dim " + std::to_string(state.dim) +
                          " does not match spec dim " + std::to_string(spec.dim));
  if (state.components.empty()) fail("dimension", std::string(who) + ": state has no components");
  for (const auto& c : state.components)
    if (c.rows() != state.dim || c.cols() != state.dim)
      fail("dimension", std::string(who) + ": component shape mismatch");
}

void check_grid(const std::vector<double>& times, double t0, const char* who) {
  double prev = t0;
  for (double t : times) {
    if (!std::isfinite(t) || t < prev - 1e-12)
      fail("precondition", std::string(who) + ": times must be finite, ascending and >= state time");
    prev = t;
  }
}

}  // namespace

double ClockState::total_trace() const {
  double tr = 0;
  for (const auto& c : components) tr += c.trace().real();
  return tr;
}

std::vector<double> ClockState::probabilities() const {
  std::vector<double> p;
  p.reserve(components.size());
  for (const auto& c : components) p.push_back(c.trace().real());
  return p;
}

double ClockState::mean() const {
  double m = 0;
  const auto p = probabilities();
  for (size_t n = 0; n < p.size(); ++n) m += double(n) * p[n];
  return m;
}

double ClockState::variance() const {
  double m = mean(), m2 = 0;
  const auto p = probabilities();
  for (size_t n = 0; n < p.size(); ++n) m2 += double(n) * double(n) * p[n];
  return m2 - m * m;
}

ClockState initial_state(const ClockSpec& spec, TruncatedRegister reg) {
  if (reg.n_max < 0) fail("precondition", "initial_state: n_max must be >= 0");
  if (spec.initial_clockwork.rows() != spec.dim || spec.initial_clockwork.cols() != spec.dim)
    fail("dimension", "initial_state: initial clockwork is not dim x dim");
  ClockState state;
  state.time = 0.0;
  state.dim = spec.dim;
  state.components.assign(reg.n_max + 1, CMatrix::Zero(spec.dim, spec.dim));
  state.components[0] = spec.initial_clockwork;
  return state;
}

TickNumberDistribution tick_distribution(const ClockState& state) {
  return {state.time, state.probabilities()};
}

SuperOperator GeneratorParts::tilted(double chi) const {
  SuperOperator out = l0;
  for (const auto& [shift, op] : l_shift)
    out.action += std::exp(cplx(0, shift * chi)) * op.action;
  return out;
}

GeneratorParts split_generator(const ClockSpec& spec) {
  const int d = spec.dim;
  GeneratorParts parts;
  parts.l0 = SuperOperator::zero(d);
  add_commutator(parts.l0, spec.hamiltonian);
  for (const auto& t : spec.jumps) {
    if (t.delta == 0) {
      add_dissipator(parts.l0, t.op, t.rate);
      continue;
    }
    // Sandwich goes to the shift channel, anticommutator stays register-fixed.
    auto it = parts.l_shift.find(t.delta);
    if (it == parts.l_shift.end())
      it = parts.l_shift.emplace(t.delta, SuperOperator::zero(d)).first;
    it->second.action += t.rate * product_superop(t.op, t.op.adjoint());
    const CMatrix ll = t.op.adjoint() * t.op;
    parts.l0.action -=
        0.5 * t.rate * (left_mult_superop(ll, d) + right_mult_superop(ll, d));
  }
  return parts;
}

SuperOperator build_generator(const ClockSpec& spec, double chi) {
  return split_generator(spec).tilted(chi);
}

ClockState evolve(const ClockSpec& spec, const ClockState& state, double dt) {
  if (!std::isfinite(dt) || dt < 0) fail("precondition", "evolve: dt must be finite and >= 0");
  check_state(spec, state, "evolve");
  RegisterPropagator prop(spec, state.n_max());
  Eigen::VectorXcd w0 = pack(state);
  const double tr0 = prop.trace_of(w0);
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::VectorXcd w = w0;
    prop.advance(w, dt, attempt);
    if (std::abs(prop.trace_of(w) - tr0) <= 1e-9 * std::max(1.0, std::abs(tr0)))
      return unpack(w, spec.dim, state.time + dt);
  }
  fail("integration", "evolve: trace drift above 1e-9 after substep refinement");
}

MomentSeries tick_number_moments(const ClockSpec& spec, const ClockState& from,
                                 std::vector<double> times) {
  check_state(spec, from, "tick_number_moments");
  check_grid(times, from.time, "tick_number_moments");
  RegisterPropagator prop(spec, from.n_max());

  MomentSeries series;
  Eigen::VectorXcd w = pack(from);
  double t = from.time;
  for (double target : times) {
    prop.advance(w, target - t, 0);
    t = target;
    double mean = 0, second = 0;
    for (int n = 0; n <= from.n_max(); ++n) {
      const double p = prop.block_trace(w, n);
      mean += n * p;
      second += double(n) * n * p;
    }
    series.times.push_back(t);
    series.mean.push_back(mean);
    series.variance.push_back(second - mean * mean);
  }

  const double top = prop.block_trace(w, from.n_max());
  if (top >= 1e-8) {
    const double mean = series.mean.back();
    const double var = std::max({series.variance.back(), mean, 1.0});
    const long suggest = std::max<long>(2L * from.n_max() + 16,
                                        std::lround(mean + 10 * std::sqrt(var) + 10));
    fail("truncation", "tick_number_moments: top bin holds " + std::to_string(top) +
                           " at final time; rerun with n_max >= " + std::to_string(suggest));
  }
  return series;
}

std::vector<double> time_of_arrival_density(const ClockSpec& spec, const ClockState& from,
                                            int n, const std::vector<double>& grid) {
  const PropertyFlags flags = validate_elementary(spec);
  if (!flags.irreversible_ticks)
    fail("precondition", "time_of_arrival_density: requires irreversible ticks");
  if (n < 1) fail("precondition", "time_of_arrival_density: tick index must be >= 1");
  check_state(spec, from, "time_of_arrival_density");
  if (n > from.n_max())
    fail("precondition", "time_of_arrival_density: n exceeds the register window; "
                         "increase n_max");
  check_grid(grid, from.time, "time_of_arrival_density");

  // Tick-weight operators J_d = sum_k rate_k op_k^+ op_k per positive shift.
  std::map<int, CMatrix> weights;
  for (const auto& t : spec.jumps) {
    if (t.delta <= 0) continue;
    auto it = weights.find(t.delta);
    if (it == weights.end())
      it = weights.emplace(t.delta, CMatrix::Zero(spec.dim, spec.dim)).first;
    it->second += t.rate * (t.op.adjoint() * t.op).eval();
  }

  RegisterPropagator prop(spec, from.n_max());
  const int dd = spec.dim * spec.dim;
  Eigen::VectorXcd w = pack(from);
  double t = from.time;
  std::vector<double> density;
  density.reserve(grid.size());
  for (double target : grid) {
    prop.advance(w, target - t, 0);
    t = target;
    // d/dt P(N_t >= n): only components within one shift below n contribute.
    double rate = 0;
    for (const auto& [shift, jw] : weights)
      for (int m = std::max(0, n - shift); m <= n - 1; ++m) {
        const CMatrix comp = devectorize(w.segment(m * dd, dd), spec.dim);
        rate += (jw * comp).trace().real();
      }
    if (rate < -1e-8)
      fail("numerical", "time_of_arrival_density: density " + std::to_string(rate) +
                            " below -1e-8");
    density.push_back(std::max(0.0, rate));
  }
  return density;
}

namespace {

struct WeightedOp {
  CMatrix op;
  double rate;
};

// Truncated-register realization of the jump list: the in-window translation
// part plus one absorbing term per source that would shift past the edge.
std::vector<WeightedOp> full_jump_list(const ClockSpec& spec, int n_max) {
  const int d = spec.dim;
  const int total = d * (n_max + 1);
  std::vector<WeightedOp> ops;
  for (const auto& t : spec.jumps) {
    if (t.delta == 0) {
      CMatrix l = CMatrix::Zero(total, total);
      for (int m = 0; m <= n_max; ++m) l.block(m * d, m * d, d, d) = t.op;
      ops.push_back({std::move(l), t.rate});
      continue;
    }
    CMatrix bulk = CMatrix::Zero(total, total);
    bool any = false;
    for (int m = 0; m <= n_max; ++m) {
      const int tgt = m + t.delta;
      if (tgt < 0 || tgt > n_max) continue;
      bulk.block(tgt * d, m * d, d, d) = t.op;
      any = true;
    }
    if (any) ops.push_back({std::move(bulk), t.rate});
    for (int m = 0; m <= n_max; ++m) {
      const int tgt = m + t.delta;
      if (tgt >= 0 && tgt <= n_max) continue;
      CMatrix edge = CMatrix::Zero(total, total);
      edge.block(std::clamp(tgt, 0, n_max) * d, m * d, d, d) = t.op;
      ops.push_back({std::move(edge), t.rate});
    }
  }
  return ops;
}

CMatrix full_hamiltonian(const ClockSpec& spec, int n_max) {
  const int d = spec.dim;
  CMatrix h = CMatrix::Zero(d * (n_max + 1), d * (n_max + 1));
  for (int m = 0; m <= n_max; ++m) h.block(m * d, m * d, d, d) = spec.hamiltonian;
  return h;
}

}  // namespace

CMatrix full_initial_density(const ClockSpec& spec, int n_max) {
  const int d = spec.dim;
  CMatrix rho = CMatrix::Zero(d * (n_max + 1), d * (n_max + 1));
  rho.block(0, 0, d, d) = spec.initial_clockwork;
  return rho;
}

CMatrix evolve_full_density(const ClockSpec& spec, const CMatrix& rho, int n_max, double dt) {
  const int total = spec.dim * (n_max + 1);
  if (rho.rows() != total || rho.cols() != total)
    fail("dimension", "evolve_full_density: state size does not match dim * (n_max + 1)");
  if (!std::isfinite(dt) || dt < 0)
    fail("precondition", "evolve_full_density: dt must be finite and >= 0");

  const CMatrix h = full_hamiltonian(spec, n_max);
  auto jumps = full_jump_list(spec, n_max);
  std::vector<CMatrix> ll;
  double bound = 2 * op_norm_bound(h);
  for (const auto& j : jumps) {
    ll.push_back(j.op.adjoint() * j.op);
    bound += j.rate * (op_norm_bound(j.op) * op_norm_bound(j.op) + op_norm_bound(ll.back()));
  }

  auto apply = [&](const CMatrix& x) {
    CMatrix out = cplx(0, -1) * (h * x - x * h);
    for (size_t k = 0; k < jumps.size(); ++k)
      out += jumps[k].rate *
             (jumps[k].op * x * jumps[k].op.adjoint() - 0.5 * (ll[k] * x + x * ll[k]));
    return out;
  };

  const double theta = 4.0;
  const int steps = std::max(1, static_cast<int>(std::ceil(bound * dt / theta)));
  const double h_step = dt / steps;
  CMatrix state = rho;
  for (int s = 0; s < steps; ++s) {
    CMatrix term = state;
    for (int k = 1; k <= 64; ++k) {
      term = (h_step / k) * apply(term).eval();
      state += term;
      if (term.norm() <= 1e-16 * state.norm()) break;
      if (k == 64) fail("integration", "evolve_full_density: series did not converge");
    }
  }
  if (std::abs(state.trace().real() - rho.trace().real()) > 1e-8)
    fail("integration", "evolve_full_density: trace drift above 1e-8");
  return state;
}

SuperOperator full_register_generator(const ClockSpec& spec, int n_max) {
  const int total = spec.dim * (n_max + 1);
  SuperOperator gen = SuperOperator::zero(total);
  add_commutator(gen, full_hamiltonian(spec, n_max));
  for (const auto& j : full_jump_list(spec, n_max)) add_dissipator(gen, j.op, j.rate);
  return gen;
}

std::vector<double> register_probabilities(const CMatrix& rho, int dim) {
  const int bins = static_cast<int>(rho.rows()) / dim;
  std::vector<double> p(bins);
  for (int n = 0; n < bins; ++n)
    p[n] = rho.block(n * dim, n * dim, dim, dim).trace().real();
  return p;
}

CMatrix dephase_register(const CMatrix& rho, int dim) {
  const int bins = static_cast<int>(rho.rows()) / dim;
  CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
  for (int n = 0; n < bins; ++n)
    out.block(n * dim, n * dim, dim, dim) = rho.block(n * dim, n * dim, dim, dim);
  return out;
}

double off_block_norm(const CMatrix& rho, int dim) {
  const int bins = static_cast<int>(rho.rows()) / dim;
  double worst = 0;
  for (int a = 0; a < bins; ++a)
    for (int b = 0; b < bins; ++b) {
      if (a == b) continue;
      worst = std::max(worst, rho.block(a * dim, b * dim, dim, dim).norm());
    }
  return worst;
}

}  // namespace tickwork
