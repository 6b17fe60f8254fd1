#include "tickwork/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <Eigen/Eigenvalues>

#include "tickwork/numerics.hpp"

namespace tickwork {

int TickRecord::count_at(double t) const {
  return static_cast<int>(std::upper_bound(tick_times.begin(), tick_times.end(), t) -
                          tick_times.begin());
}

TickRecord TickSequence::extract(char label) const {
  TickRecord rec;
  rec.clock_id = std::string(1, label);
  rec.horizon = horizon;
  for (const auto& e : entries)
    if (e.label == label) rec.tick_times.push_back(e.time);
  return rec;
}

int TickSequence::b_count_before_a(int n) const {
  if (n < 1) fail("precondition", "b_count_before_a: tick index must be >= 1");
  int a_seen = 0, b_seen = 0;
  for (const auto& e : entries) {
    if (e.label == 'A') {
      if (++a_seen == n) return b_seen;
    } else {
      ++b_seen;
    }
  }
  fail("data", "sequence holds " + std::to_string(a_seen) + " A ticks, needs " +
                   std::to_string(n));
}

namespace {

/// Cached pieces of the norm-decay unraveling for one spec. Built once per
/// ensemble and shared read-only across trajectory runs.
struct Unraveling {
  CMatrix k;          // -iH - 1/2 sum rate L^t L
  CMatrix step_prop;  // e^{K h}
  double h = 0;       // bracketing step
  double scalar_rate = 0;       // |phi|^2 decay rate on a one-level clockwork
  std::vector<CMatrix> halves;  // e^{K h/2}, e^{K h/4}, ...
  std::vector<CVector> init_vectors;
  std::vector<double> init_weights;  // empty for a pure initial state
  const ClockSpec* spec = nullptr;

  static constexpr int kLevels = 40;

  explicit Unraveling(const ClockSpec& s) : spec(&s) {
    if (!validate_elementary(s).elementary())
      fail("precondition", "sample_trajectory: spec must satisfy all four clock properties");

    k = cplx(0, -1) * s.hamiltonian;
    CMatrix weight = CMatrix::Zero(s.dim, s.dim);
    for (const auto& j : s.jumps) weight += j.rate * (j.op.adjoint() * j.op).eval();
    k -= 0.5 * weight;

    Eigen::SelfAdjointEigenSolver<CMatrix> ew(weight);
    const double wmax = ew.eigenvalues().maxCoeff();
    if (wmax > 0) {
      h = 0.5 / wmax;
      if (s.dim == 1) {
        scalar_rate = -2.0 * k(0, 0).real();
      } else {
        step_prop = matrix_exponential(k, h);
        halves.reserve(kLevels);
        for (int j = 1; j <= kLevels; ++j)
          halves.push_back(matrix_exponential(k, std::ldexp(h, -j)));
      }
    }

    Eigen::SelfAdjointEigenSolver<CMatrix> es(s.initial_clockwork);
    const auto& probs = es.eigenvalues();
    int support = 0;
    for (int i = 0; i < s.dim; ++i) support += probs(i) > 1e-12 ? 1 : 0;
    for (int i = 0; i < s.dim; ++i) {
      if (probs(i) <= 1e-12) continue;
      init_vectors.push_back(es.eigenvectors().col(i));
      if (support > 1) init_weights.push_back(probs(i));
    }
  }

  CVector draw_initial(RandomStream& rng) const {
    if (init_weights.empty()) return init_vectors.back();
    double v = rng.uniform();
    double acc = 0;
    for (size_t i = 0; i < init_weights.size(); ++i) {
      acc += init_weights[i];
      if (v < acc) return init_vectors[i];
    }
    return init_vectors.back();
  }

  /// Root of |e^{K tau} phi|^2 = target inside (0, h], bracketed to width
  /// h 2^-40 by bisection on dyadic offsets. Advances phi to the returned
  /// offset, so no fresh exponential is needed at the jump.
  double locate_jump(CVector& phi, CVector& probe, double target) const {
    double a = 0;
    for (int j = 0; j < kLevels; ++j) {
      probe.noalias() = halves[j] * phi;
      if (probe.squaredNorm() > target) {
        phi.swap(probe);
        a += std::ldexp(h, -1 - j);
      }
    }
    // The root sits within h 2^-40 above a; keep the offset strictly positive
    // so the outer clock always advances.
    return std::max(a, std::ldexp(h, -kLevels));
  }
};

void check_horizon(double horizon) {
  if (!(horizon > 0) || !std::isfinite(horizon))
    fail("precondition", "sample_trajectory: horizon must be positive and finite");
}

TickRecord run_one(const Unraveling& u, double horizon, std::uint64_t seed,
                   const std::string& clock_id) {
  const ClockSpec& spec = *u.spec;
  RandomStream rng(seed);

  TickRecord rec;
  rec.clock_id = clock_id;
  rec.horizon = horizon;
  if (u.h == 0) return rec;  // nothing ever decays, hence nothing ever ticks

  CVector psi = u.draw_initial(rng);
  CVector phi(spec.dim), probe(spec.dim);
  std::vector<double> weights(spec.jumps.size());
  double t = 0;
  while (t < horizon) {
    double target = rng.uniform();
    if (target <= 0) target = 0x1.0p-53;

    double tau = -1;
    if (u.scalar_rate > 0) {
      // One level means the survival is a bare exponential; invert it.
      tau = -std::log(target) / u.scalar_rate;
      if (t + tau > horizon) break;
      phi = psi * std::exp(u.k(0, 0) * tau);
    } else {
      // Step until the squared norm falls through the target, then refine.
      phi = psi;
      double elapsed = 0;
      while (t + elapsed < horizon) {
        probe.noalias() = u.step_prop * phi;
        if (probe.squaredNorm() <= target) {
          tau = elapsed + u.locate_jump(phi, probe, target);
          break;
        }
        phi.swap(probe);
        elapsed += u.h;
      }
      if (tau < 0 || t + tau > horizon) break;
    }

    const CVector& at_jump = phi;
    double total = 0;
    for (size_t j = 0; j < spec.jumps.size(); ++j) {
      probe.noalias() = spec.jumps[j].op * at_jump;
      weights[j] = spec.jumps[j].rate * probe.squaredNorm();
      total += weights[j];
    }
    if (total <= 0) fail("numerical", "no jump channel has weight at the sampled time");

    double pick = rng.uniform() * total;
    size_t channel = spec.jumps.size() - 1;
    for (size_t j = 0; j < spec.jumps.size(); ++j) {
      pick -= weights[j];
      if (pick < 0) {
        channel = j;
        break;
      }
    }

    t += std::max(tau, 1e-300);
    psi.noalias() = spec.jumps[channel].op * at_jump;
    psi /= psi.norm();
    if (spec.jumps[channel].delta > 0) {
      if (!rec.tick_times.empty() && t <= rec.tick_times.back())
        t = std::nextafter(rec.tick_times.back(), horizon + 1.0);
      if (t > horizon) break;
      rec.tick_times.push_back(t);
    }
  }
  return rec;
}

}  // namespace

TickRecord sample_trajectory(const ClockSpec& spec, double horizon, std::uint64_t seed,
                             const std::string& clock_id) {
  check_horizon(horizon);
  const Unraveling u(spec);
  return run_one(u, horizon, seed, clock_id);
}

namespace {

template <typename Out, typename Fn>
std::vector<Out> parallel_map(int count, int threads, Fn&& fn) {
  if (count < 0) fail("precondition", "ensemble size must be nonnegative");
  std::vector<Out> out(count);
  std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic, 16) num_threads(std::max(1, threads))
  for (int i = 0; i < count; ++i) {
    try {
      out[i] = fn(i);
    } catch (...) {
#pragma omp critical
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

TickSequence merge_records(const TickRecord& a, const TickRecord& b, double horizon) {
  TickSequence seq;
  seq.horizon = horizon;
  seq.entries.reserve(a.tick_times.size() + b.tick_times.size());
  size_t ia = 0, ib = 0;
  while (ia < a.tick_times.size() || ib < b.tick_times.size()) {
    // Equal times write A first, matching the fixed slot order of the record.
    const bool take_a = ib == b.tick_times.size() ||
                        (ia < a.tick_times.size() && a.tick_times[ia] <= b.tick_times[ib]);
    if (take_a)
      seq.entries.push_back({'A', a.tick_times[ia++]});
    else
      seq.entries.push_back({'B', b.tick_times[ib++]});
  }
  return seq;
}

TickSequence run_pair(const Unraveling& ua, const Unraveling& ub, double horizon,
                      std::uint64_t seed) {
  const TickRecord a = run_one(ua, horizon, RandomStream::split(seed, 1), "A");
  const TickRecord b = run_one(ub, horizon, RandomStream::split(seed, 2), "B");
  return merge_records(a, b, horizon);
}

}  // namespace

std::vector<TickRecord> sample_ensemble(const ClockSpec& spec, double horizon,
                                        std::uint64_t master_seed, int count, int threads) {
  check_horizon(horizon);
  const Unraveling u(spec);
  return parallel_map<TickRecord>(count, threads, [&](int i) {
    return run_one(u, horizon, RandomStream::split(master_seed, i), "clock");
  });
}

std::vector<TickRecord> sample_ensemble_serial(const ClockSpec& spec, double horizon,
                                               std::uint64_t master_seed, int count) {
  if (count < 0) fail("precondition", "ensemble size must be nonnegative");
  check_horizon(horizon);
  const Unraveling u(spec);
  std::vector<TickRecord> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(run_one(u, horizon, RandomStream::split(master_seed, i), "clock"));
  return out;
}

TickSequence sample_pair(const ClockSpec& spec_a, const ClockSpec& spec_b, double horizon,
                         std::uint64_t seed) {
  check_horizon(horizon);
  const Unraveling ua(spec_a), ub(spec_b);
  return run_pair(ua, ub, horizon, seed);
}

std::vector<TickSequence> sample_pair_ensemble(const ClockSpec& spec_a,
                                               const ClockSpec& spec_b, double horizon,
                                               std::uint64_t master_seed, int count,
                                               int threads) {
  check_horizon(horizon);
  const Unraveling ua(spec_a), ub(spec_b);
  return parallel_map<TickSequence>(count, threads, [&](int i) {
    return run_pair(ua, ub, horizon, RandomStream::split(master_seed, i));
  });
}

RelativeCountDistribution relative_counts(const std::vector<TickSequence>& seqs, int n) {
  if (n < 1) fail("precondition", "relative_counts: tick index must be >= 1");
  if (seqs.empty()) fail("precondition", "relative_counts: no sequences given");

  std::vector<size_t> deficient;
  std::vector<long> hist;
  for (size_t s = 0; s < seqs.size(); ++s) {
    int a_seen = 0, b_seen = 0, value = -1;
    for (const auto& e : seqs[s].entries) {
      if (e.label == 'A') {
        if (++a_seen == n) {
          value = b_seen;
          break;
        }
      } else {
        ++b_seen;
      }
    }
    if (value < 0) {
      deficient.push_back(s);
      continue;
    }
    if (static_cast<size_t>(value) >= hist.size()) hist.resize(value + 1, 0);
    ++hist[value];
  }
  if (!deficient.empty()) {
    std::string which;
    for (size_t i = 0; i < deficient.size() && i < 10; ++i)
      which += (i ? ", " : "") + std::to_string(deficient[i]);
    if (deficient.size() > 10) which += ", ...";
    fail("data", "relative_counts: " + std::to_string(deficient.size()) +
                     " sequences hold fewer than " + std::to_string(n) +
                     " A ticks (indices " + which + ")");
  }

  RelativeCountDistribution out;
  out.n = n;
  out.samples = static_cast<long>(seqs.size());
  const double num = static_cast<double>(out.samples);
  const double z = 1.96;
  out.pmf.resize(hist.size());
  out.lower.resize(hist.size());
  out.upper.resize(hist.size());
  for (size_t m = 0; m < hist.size(); ++m) {
    const double p = hist[m] / num;
    out.pmf[m] = p;
    const double denom = 1.0 + z * z / num;
    const double center = (p + z * z / (2 * num)) / denom;
    const double half =
        z * std::sqrt(p * (1 - p) / num + z * z / (4 * num * num)) / denom;
    out.lower[m] = std::max(0.0, center - half);
    out.upper[m] = std::min(1.0, center + half);
  }
  return out;
}

}  // namespace tickwork
