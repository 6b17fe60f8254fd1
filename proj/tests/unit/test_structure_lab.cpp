#include "doctest.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

#include "tickwork/evolution.hpp"
#include "tickwork/structure_lab.hpp"
#include "test_util.hpp"

using namespace tickwork;
namespace tu = tickwork::testutil;

namespace {

QuantumChannel random_cptp(RandomStream& rng, int dim, int n_kraus) {
  std::vector<CMatrix> raw;
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (int k = 0; k < n_kraus; ++k) {
    raw.push_back(tu::random_matrix(rng, dim, dim));
    sum += raw.back().adjoint() * raw.back();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sum);
  const CMatrix root_inv = es.operatorInverseSqrt();
  for (CMatrix& a : raw) a = a * root_inv;
  return make_channel(std::move(raw));
}

QuantumChannel conjugated(const QuantumChannel& ch, const CMatrix& v) {
  std::vector<CMatrix> ops;
  for (const CMatrix& a : ch.kraus_ops) ops.push_back(v * a * v.adjoint());
  return make_channel(std::move(ops));
}

std::vector<std::pair<int, int>> block_multiset(const KIDecomposition& decomp) {
  std::vector<std::pair<int, int>> out;
  for (const KIBlock& b : decomp.blocks) out.emplace_back(b.c_dim, b.f_dim);
  std::sort(out.begin(), out.end());
  return out;
}

// Replacement channel on the second tensor factor: keeps X with weight
// 1 - lambda, otherwise swaps in the state omega. The first factor rides
// along untouched, so the invariant algebra is L(C) (x) 1.
std::vector<CMatrix> frozen_factor_kraus(int c_dim, const CMatrix& omega, double lambda) {
  const int f = static_cast<int>(omega.rows());
  const CMatrix eye_c = CMatrix::Identity(c_dim, c_dim);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(omega);
  const CMatrix root = es.operatorSqrt();
  std::vector<CMatrix> ops;
  ops.push_back(kron(eye_c, std::sqrt(1.0 - lambda) * CMatrix::Identity(f, f)));
  for (int i = 0; i < f; ++i)
    for (int j = 0; j < f; ++j) {
      CMatrix unit = CMatrix::Zero(f, f);
      unit.col(j) = root.col(i);
      ops.push_back(kron(eye_c, std::sqrt(lambda) * unit));
    }
  return ops;
}

QuantumChannel frozen_factor_channel() {
  CMatrix omega = CMatrix::Zero(2, 2);
  omega(0, 0) = 0.7;
  omega(1, 1) = 0.3;
  return make_channel(frozen_factor_kraus(2, omega, 0.5));
}

// Same frozen pair plus a one-dimensional sector the channel only rephases.
QuantumChannel two_sector_channel() {
  CMatrix omega = CMatrix::Zero(2, 2);
  omega(0, 0) = 0.7;
  omega(1, 1) = 0.3;
  std::vector<CMatrix> small = frozen_factor_kraus(2, omega, 0.5);
  const double share = 1.0 / std::sqrt(double(small.size()));
  std::vector<CMatrix> ops;
  for (const CMatrix& b : small) {
    CMatrix a = CMatrix::Zero(5, 5);
    a.topLeftCorner(4, 4) = b;
    a(4, 4) = share;
    ops.push_back(std::move(a));
  }
  return make_channel(std::move(ops));
}

QuantumChannel dephasing_channel(int dim) {
  std::vector<CMatrix> ops;
  for (int i = 0; i < dim; ++i) {
    CMatrix p = CMatrix::Zero(dim, dim);
    p(i, i) = 1;
    ops.push_back(std::move(p));
  }
  return make_channel(std::move(ops));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("kraus channels validate shapes and completeness") {
  RandomStream rng(402);
  const QuantumChannel ch = random_cptp(rng, 3, 3);
  for (int rep = 0; rep < 4; ++rep) {
    const CMatrix rho = tu::random_density(rng, 3);
    CHECK(std::abs(ch.apply(rho).trace() - rho.trace()) < 1e-12);
  }
  CHECK(tu::max_abs_diff(ch.apply_dual(CMatrix::Identity(3, 3)), CMatrix::Identity(3, 3)) <
        1e-12);

  CHECK(tu::thrown_kind([] { make_channel({}); }) == "validation");
  CHECK(tu::thrown_kind([&] { make_channel({tu::random_matrix(rng, 2, 3)}); }) == "dimension");
  CHECK(tu::thrown_kind([&] {
          make_channel({CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)});
        }) == "dimension");
  CHECK(tu::thrown_kind([] { make_channel({0.9 * CMatrix::Identity(2, 2)}); }) == "validation");
  CHECK(tu::thrown_kind([&] { ch.apply(CMatrix::Identity(2, 2)); }) == "dimension");
  CHECK(tu::thrown_kind([&] { ch.apply_dual(CMatrix::Identity(2, 2)); }) == "dimension");
}

TEST_CASE("nondisturbance residuals match hand computations") {
  RandomStream rng(403);
  const QuantumChannel id3 = make_channel({CMatrix::Identity(3, 3)});
  std::vector<CMatrix> states;
  for (int i = 0; i < 3; ++i) states.push_back(tu::random_density(rng, 3));
  CHECK(verify_nondisturbance(id3, states) <= 1e-15);

  const QuantumChannel deph = dephasing_channel(4);
  std::vector<CMatrix> diagonal;
  for (int i = 0; i < 3; ++i) {
    CMatrix rho = tu::random_density(rng, 4);
    diagonal.push_back(rho.diagonal().asDiagonal());
  }
  CHECK(verify_nondisturbance(deph, diagonal) < 1e-12);

  const cplx delta(0.3, -0.1);
  CMatrix coherent(2, 2);
  coherent << 0.6, delta, std::conj(delta), 0.4;
  const double resid = verify_nondisturbance(dephasing_channel(2), {coherent});
  CHECK(resid == doctest::Approx(std::sqrt(2.0) * std::abs(delta)).epsilon(1e-14));

  CHECK(tu::thrown_kind([&] {
          verify_nondisturbance(id3, {tu::random_density(rng, 2)});
        }) == "dimension");
}

TEST_CASE("ki recovers projector-type block structure") {
  const QuantumChannel id4 = make_channel({CMatrix::Identity(4, 4)});
  const KIDecomposition triv = ki_decompose(id4);
  REQUIRE(triv.blocks.size() == 1);
  CHECK(triv.blocks[0].c_dim == 4);
  CHECK(triv.blocks[0].f_dim == 1);
  CHECK(verify_ki(id4, triv) < 1e-12);

  const QuantumChannel deph = dephasing_channel(4);
  const KIDecomposition diag = ki_decompose(deph);
  CHECK(block_multiset(diag) ==
        std::vector<std::pair<int, int>>{{1, 1}, {1, 1}, {1, 1}, {1, 1}});
  CHECK(verify_ki(deph, diag) < 1e-10);

  CMatrix p1 = CMatrix::Zero(5, 5), p2 = CMatrix::Zero(5, 5);
  p1.topLeftCorner(2, 2) = CMatrix::Identity(2, 2);
  p2.bottomRightCorner(3, 3) = CMatrix::Identity(3, 3);
  const QuantumChannel which_space = make_channel({p1, p2});
  const KIDecomposition split = ki_decompose(which_space);
  REQUIRE(split.blocks.size() == 2);
  CHECK(split.blocks[0].c_dim == 2);
  CHECK(split.blocks[0].f_dim == 1);
  CHECK(split.blocks[1].c_dim == 3);
  CHECK(split.blocks[1].f_dim == 1);
  CHECK(verify_ki(which_space, split) < 1e-10);
}

TEST_CASE("ki factors a frozen tensor component with its omega") {
  const QuantumChannel frozen = frozen_factor_channel();
  const KIDecomposition decomp = ki_decompose(frozen);
  REQUIRE(decomp.blocks.size() == 1);
  CHECK(decomp.blocks[0].c_dim == 2);
  CHECK(decomp.blocks[0].f_dim == 2);
  CHECK(verify_ki(frozen, decomp) < 1e-10);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(decomp.omegas[0]);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(es.eigenvalues()(1) == doctest::Approx(0.7).epsilon(1e-10));

  const QuantumChannel sectors = two_sector_channel();
  const KIDecomposition both = ki_decompose(sectors);
  REQUIRE(both.blocks.size() == 2);
  CHECK(both.blocks[0].c_dim == 1);
  CHECK(both.blocks[0].f_dim == 1);
  CHECK(both.blocks[1].c_dim == 2);
  CHECK(both.blocks[1].f_dim == 2);
  CHECK(verify_ki(sectors, both) < 1e-10);
  CHECK(tu::max_abs_diff(both.omegas[0], CMatrix::Ones(1, 1)) < 1e-10);
  Eigen::SelfAdjointEigenSolver<CMatrix> es2(both.omegas[1]);
  CHECK(es2.eigenvalues()(0) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(es2.eigenvalues()(1) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("ki block dimensions are frame covariant") {
  const QuantumChannel base = two_sector_channel();
  const auto expected = block_multiset(ki_decompose(base));
  for (int i = 0; i < 5; ++i) {
    RandomStream rng(600 + i);
    const CMatrix v = tu::random_unitary(rng, 5);
    const QuantumChannel rotated = conjugated(base, v);
    const KIDecomposition decomp = ki_decompose(rotated);
    CHECK(block_multiset(decomp) == expected);
    CHECK(verify_ki(rotated, decomp) < 1e-10);
  }
}

TEST_CASE("states assembled from a decomposition pass nondisturbance") {
  const QuantumChannel ch = two_sector_channel();
  const KIDecomposition decomp = ki_decompose(ch);
  RandomStream rng(77);
  std::vector<CMatrix> states;
  for (int rep = 0; rep < 6; ++rep) {
    const double p = 0.1 + 0.8 * rng.uniform();
    CMatrix reduced = CMatrix::Zero(3, 3);
    reduced(0, 0) = p;
    reduced.bottomRightCorner(2, 2) = (1.0 - p) * tu::random_density(rng, 2);
    states.push_back(restore_state(decomp, reduced));
    CHECK(std::abs(states.back().trace() - cplx(1, 0)) < 1e-12);
  }
  CHECK(verify_nondisturbance(ch, states) < 1e-10);
}

TEST_CASE("ki reports what it cannot factor") {
  CMatrix damp0 = CMatrix::Identity(2, 2), damp1 = CMatrix::Zero(2, 2);
  damp0(1, 1) = std::sqrt(0.6);
  damp1(0, 1) = std::sqrt(0.4);
  const QuantumChannel damping = make_channel({damp0, damp1});
  CHECK(tu::thrown_kind([&] { ki_decompose(damping); }) == "unsupported");

  CHECK(tu::thrown_kind([] {
          ki_decompose(make_channel({CMatrix::Identity(33, 33)}));
        }) == "precondition");

  const QuantumChannel ch = two_sector_channel();
  const KIDecomposition a = ki_decompose(ch, 19);
  const KIDecomposition b = ki_decompose(ch, 19);
  CHECK(tu::max_abs_diff(a.basis, b.basis) == 0.0);
  const KIDecomposition c = ki_decompose(ch, 20);
  CHECK(block_multiset(c) == block_multiset(a));
  CHECK(verify_ki(ch, c) < 1e-10);

  KIDecomposition broken = a;
  broken.omegas.pop_back();
  CHECK(tu::thrown_kind([&] { verify_ki(ch, broken); }) == "dimension");
  broken = a;
  broken.basis = CMatrix::Identity(3, 3);
  CHECK(tu::thrown_kind([&] { verify_ki(ch, broken); }) == "dimension");
}

TEST_CASE("minimal clock keeps block weights and drops frozen factors") {
  CMatrix p1 = CMatrix::Zero(5, 5), p2 = CMatrix::Zero(5, 5);
  p1.topLeftCorner(2, 2) = CMatrix::Identity(2, 2);
  p2.bottomRightCorner(3, 3) = CMatrix::Identity(3, 3);
  const QuantumChannel which_space = make_channel({p1, p2});
  const KIDecomposition flat = ki_decompose(which_space);
  RandomStream rng(505);
  std::vector<CMatrix> states;
  std::vector<CMatrix> reduced_in;
  std::vector<double> weights;
  for (int rep = 0; rep < 3; ++rep) {
    const double p = 0.2 + 0.6 * rng.uniform();
    CMatrix reduced = CMatrix::Zero(5, 5);
    reduced.topLeftCorner(2, 2) = p * tu::random_density(rng, 2);
    reduced.bottomRightCorner(3, 3) = (1.0 - p) * tu::random_density(rng, 3);
    reduced_in.push_back(reduced);
    states.push_back(restore_state(flat, reduced));
    weights.push_back(p);
  }
  const MinimalClock clock = minimal_clock(flat, states);
  CHECK(clock.c_dims == std::vector<int>{2, 3});
  REQUIRE(clock.reduced_states.size() == 3);
  for (size_t i = 0; i < states.size(); ++i) {
    CHECK(tu::max_abs_diff(clock.reduced_states[i], reduced_in[i]) < 1e-12);
    CHECK((clock.projectors[0] * clock.reduced_states[i]).trace().real() ==
          doctest::Approx(weights[i]).epsilon(1e-12));
    CHECK((clock.projectors[1] * clock.reduced_states[i]).trace().real() ==
          doctest::Approx(1.0 - weights[i]).epsilon(1e-12));
  }

  KIDecomposition synthetic;
  synthetic.blocks = {{2, 2}, {1, 3}};
  RandomStream basis_rng(31);
  synthetic.basis = tu::random_unitary(basis_rng, 7);
  synthetic.omegas = {tu::random_density(basis_rng, 2), tu::random_density(basis_rng, 3)};
  std::vector<CMatrix> forms;
  std::vector<double> ps;
  for (int rep = 0; rep < 3; ++rep) {
    const double p = 0.15 + 0.7 * basis_rng.uniform();
    CMatrix reduced = CMatrix::Zero(3, 3);
    reduced.topLeftCorner(2, 2) = p * tu::random_density(basis_rng, 2);
    reduced(2, 2) = 1.0 - p;
    forms.push_back(restore_state(synthetic, reduced));
    ps.push_back(p);
  }
  const MinimalClock mini = minimal_clock(synthetic, forms);
  CHECK(mini.c_dims == std::vector<int>{2, 1});
  for (size_t i = 0; i < forms.size(); ++i) {
    CHECK((mini.projectors[0] * mini.reduced_states[i]).trace().real() ==
          doctest::Approx(ps[i]).epsilon(1e-12));
    CHECK(tu::max_abs_diff(restore_state(synthetic, mini.reduced_states[i]), forms[i]) <
          1e-12);
  }

  CHECK(tu::thrown_kind([&] {
          minimal_clock(synthetic, {tu::random_density(basis_rng, 7)});
        }) == "shape");
  CHECK(tu::thrown_kind([&] { reduce_state(synthetic, CMatrix::Identity(6, 6)); }) ==
        "dimension");
  CHECK(tu::thrown_kind([&] { restore_state(synthetic, CMatrix::Identity(7, 7)); }) ==
        "dimension");
}

TEST_CASE("zeno survival follows the repeated-readout closed form") {
  const double pi = std::numbers::pi;
  ZenoConfig cfg;
  cfg.rabi_frequency = 2.7;
  cfg.total_time = pi / cfg.rabi_frequency;
  for (int m = 1; m <= 64; ++m) cfg.measurement_counts.push_back(m);
  const std::vector<ZenoPoint> curve = zeno_experiment(cfg);
  REQUIRE(curve.size() == 64);
  double prev = -1.0;
  for (const ZenoPoint& pt : curve) {
    const double expected = std::pow(std::cos(pi / (2.0 * pt.m)), 2.0 * pt.m);
    CHECK(std::abs(pt.survival - expected) < 1e-10);
    CHECK(pt.survival >= prev);
    prev = pt.survival;
  }
  CHECK(curve.front().mean_register == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(curve.back().mean_register < 0.1);

  ZenoConfig free_cfg;
  free_cfg.rabi_frequency = 1.1;
  free_cfg.total_time = 0.9;
  free_cfg.measurement_counts = {0};
  const ZenoPoint free_pt = zeno_experiment(free_cfg).front();
  const double half_angle = 0.5 * free_cfg.rabi_frequency * free_cfg.total_time;
  CHECK(free_pt.survival == doctest::Approx(std::cos(half_angle) * std::cos(half_angle))
                                .epsilon(1e-12));
  CHECK(free_pt.mean_register == doctest::Approx(std::sin(half_angle) * std::sin(half_angle))
                                     .epsilon(1e-12));
}

TEST_CASE("zeno jitter reduces to the fixed schedule at zero width") {
  ZenoConfig cfg;
  cfg.rabi_frequency = 1.9;
  cfg.total_time = std::numbers::pi / cfg.rabi_frequency;
  cfg.measurement_counts = {8, 25};

  ZenoConfig zero = cfg;
  zero.schedule = ZenoSchedule::jittered;
  zero.jitter_width = 0.0;
  const auto fixed_curve = zeno_experiment(cfg);
  const auto zero_curve = zeno_experiment(zero);
  for (size_t i = 0; i < fixed_curve.size(); ++i) {
    CHECK(fixed_curve[i].survival == zero_curve[i].survival);
    CHECK(fixed_curve[i].mean_register == zero_curve[i].mean_register);
  }

  ZenoConfig wide = zero;
  wide.jitter_width = 0.08;
  wide.seed = 3;
  const auto first = zeno_experiment(wide);
  const auto second = zeno_experiment(wide);
  double shift = 0.0;
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].survival == second[i].survival);
    CHECK(first[i].survival >= 0.0);
    CHECK(first[i].survival <= 1.0);
    shift = std::max(shift, std::abs(first[i].survival - fixed_curve[i].survival));
  }
  CHECK(shift > 1e-9);

  ZenoConfig bad = cfg;
  bad.rabi_frequency = 0.0;
  CHECK(tu::thrown_kind([&] { zeno_experiment(bad); }) == "precondition");
  bad = cfg;
  bad.measurement_counts = {3, -1};
  CHECK(tu::thrown_kind([&] { zeno_experiment(bad); }) == "precondition");
  bad = cfg;
  bad.measurement_counts.clear();
  CHECK(tu::thrown_kind([&] { zeno_experiment(bad); }) == "precondition");
  bad = cfg;
  bad.jitter_width = -0.1;
  CHECK(tu::thrown_kind([&] { zeno_experiment(bad); }) == "precondition");
}

TEST_CASE("record probability validates its measurement frame") {
  RandomStream rng(808);
  const CMatrix h = tu::random_hermitian(rng, 3);
  CMatrix p0 = CMatrix::Zero(3, 3), rest = CMatrix::Identity(3, 3);
  p0(0, 0) = 1;
  rest(0, 0) = 0;
  CMatrix rho0 = CMatrix::Zero(3, 3);
  rho0(0, 0) = 1;

  const double sorted_prob =
      zeno_record_probability(h, rho0, {p0, rest}, 0, {0.1, 0.3, 0.7}, 1.0);
  const double shuffled_prob =
      zeno_record_probability(h, rho0, {p0, rest}, 0, {0.7, 0.1, 0.3}, 1.0);
  CHECK(sorted_prob == shuffled_prob);
  CHECK(sorted_prob >= 0.0);
  CHECK(sorted_prob <= 1.0);

  CMatrix skew = h;
  skew(0, 1) += cplx(0, 0.3);
  CHECK(tu::thrown_kind([&] {
          zeno_record_probability(skew, rho0, {p0, rest}, 0, {0.5}, 1.0);
        }) == "validation");
  CHECK(tu::thrown_kind([&] {
          zeno_record_probability(CMatrix::Identity(17, 17), CMatrix::Identity(17, 17) / 17.0,
                                  {CMatrix::Identity(17, 17)}, 0, {0.5}, 1.0);
        }) == "precondition");
  CHECK(tu::thrown_kind([&] {
          zeno_record_probability(h, rho0, {p0, p0}, 0, {0.5}, 1.0);
        }) == "validation");
  CHECK(tu::thrown_kind([&] {
          zeno_record_probability(h, rho0, {0.5 * p0, rest}, 0, {0.5}, 1.0);
        }) == "validation");
  CHECK(tu::thrown_kind([&] {
          zeno_record_probability(h, rho0, {p0, rest}, 2, {0.5}, 1.0);
        }) == "precondition");
  CHECK(tu::thrown_kind([&] {
          zeno_record_probability(h, rho0, {p0, rest}, 0, {1.5}, 1.0);
        }) == "precondition");
  CHECK(tu::thrown_kind([&] {
          zeno_record_probability(h, rho0, {p0, rest}, 0, {0.5}, 0.0);
        }) == "precondition");
  CHECK(tu::thrown_kind([&] {
          zeno_record_probability(h, 2.0 * rho0, {p0, rest}, 0, {0.5}, 1.0);
        }) == "validation");

  const CMatrix h_pair = kron(tu::random_hermitian(rng, 2), CMatrix::Identity(2, 2)) +
                         kron(CMatrix::Identity(2, 2), tu::random_hermitian(rng, 2));
  CMatrix sys0 = CMatrix::Zero(2, 2);
  sys0(0, 0) = 1;
  const CMatrix rho_pair = kron(sys0, CMatrix::Identity(2, 2) / 2.0);
  const double joint = zeno_record_probability(
      h_pair, rho_pair,
      {kron(sys0, CMatrix::Identity(2, 2)),
       kron(CMatrix(CMatrix::Identity(2, 2) - sys0), CMatrix::Identity(2, 2))},
      0, {0.25, 0.5, 0.75}, 1.0);
  CHECK(joint >= 0.0);
  CHECK(joint <= 1.0);
}

TEST_CASE("register dephasing leaves elementary clock populations alone") {
  for (const ClockSpec& spec : {poisson_clock(1.0), two_level_coherent_clock(1.3, 0.8)}) {
    const int n_max = 6;
    const int total = spec.dim * (n_max + 1);
    CMatrix plain = CMatrix::Zero(total, total);
    plain.topLeftCorner(spec.dim, spec.dim) = spec.initial_clockwork;
    CMatrix dephased = plain;

    RandomStream rng(99);
    std::vector<double> times;
    for (int i = 0; i < 9; ++i) times.push_back(3.0 * rng.uniform());
    std::sort(times.begin(), times.end());
    double prev = 0.0;
    for (double t : times) {
      plain = evolve_full_density(spec, plain, n_max, t - prev);
      dephased = evolve_full_density(spec, dephased, n_max, t - prev);
      dephased = dephase_register(dephased, spec.dim);
      prev = t;
    }
    plain = evolve_full_density(spec, plain, n_max, 3.0 - prev);
    dephased = evolve_full_density(spec, dephased, n_max, 3.0 - prev);

    const auto p_plain = register_probabilities(plain, spec.dim);
    const auto p_dephased = register_probabilities(dephased, spec.dim);
    for (size_t n = 0; n < p_plain.size(); ++n)
      CHECK(std::abs(p_plain[n] - p_dephased[n]) < 1e-10);
  }
}

TEST_CASE("swp ladder walks the angle basis and arrives on schedule") {
  const double pi = std::numbers::pi;
  for (int d = 2; d <= 16; ++d) {
    SWPConfig cfg;
    cfg.d = d;
    cfg.omega = 1.3;
    cfg.alphas = {0.0, 0.25, 0.9};
    const SWPReport report = swp_demo(cfg);
    REQUIRE(report.step_overlaps.size() == static_cast<size_t>(d));
    for (double overlap : report.step_overlaps) CHECK(std::abs(overlap - 1.0) <= 1e-12);
    for (const SWPAlphaReport& entry : report.alphas) {
      CHECK(entry.gram_residual <= 1e-12);
      CHECK(entry.completeness_residual <= 1e-12);
      REQUIRE(entry.arrival_times.size() == static_cast<size_t>(d));
      for (int l = 0; l < d; ++l) {
        CHECK(entry.arrival_times[l] ==
              doctest::Approx(2.0 * pi * (l + entry.alpha) / (cfg.omega * d)).epsilon(1e-12));
        CHECK(std::abs(entry.arrival_probabilities[l] - 0.5) <= 1e-12);
      }
    }
  }

  SWPConfig quad;
  quad.d = 4;
  quad.omega = 2.0;
  quad.alphas = {0.5};
  const SWPReport report = swp_demo(quad);
  CHECK(report.alphas[0].arrival_times[0] ==
        doctest::Approx(pi / (4.0 * quad.omega)).epsilon(1e-15));
  CHECK(report.alphas[0].arrival_probabilities[0] == doctest::Approx(0.5).epsilon(1e-14));

  SWPConfig bad = quad;
  bad.d = 1;
  CHECK(tu::thrown_kind([&] { swp_demo(bad); }) == "precondition");
  bad = quad;
  bad.omega = 0.0;
  CHECK(tu::thrown_kind([&] { swp_demo(bad); }) == "precondition");
  bad = quad;
  bad.alphas = {1.0};
  CHECK(tu::thrown_kind([&] { swp_demo(bad); }) == "precondition");
  bad = quad;
  bad.alphas = {-0.1};
  CHECK(tu::thrown_kind([&] { swp_demo(bad); }) == "precondition");
}

TEST_CASE("channel files round trip with strict parsing") {
  const std::string path = "/tmp/tickwork_channel.json";
  write_file(path, R"({"dim": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]})");
  const QuantumChannel ch = load_channel(path);
  CHECK(ch.dim == 2);
  REQUIRE(ch.kraus_ops.size() == 1);
  CHECK(tu::max_abs_diff(ch.kraus_ops[0], CMatrix::Identity(2, 2)) == 0.0);

  write_file(path, R"({"dim": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]], "extra": 1})");
  CHECK(tu::thrown_kind([&] { load_channel(path); }) == "parse");
  write_file(path, R"({"kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]})");
  CHECK(tu::thrown_kind([&] { load_channel(path); }) == "parse");
  write_file(path, R"({"dim": 3, "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]]]})");
  CHECK(tu::thrown_kind([&] { load_channel(path); }) == "parse");
  write_file(path, R"({"dim": 2, "kraus": [[[[1,0],[0,0]],[[0,0]]]]})");
  CHECK(tu::thrown_kind([&] { load_channel(path); }) == "parse");
  write_file(path, R"({"dim": 2, "kraus": [[[[1,0],[0,0]],[[0,0],[1]]]]})");
  CHECK(tu::thrown_kind([&] { load_channel(path); }) == "parse");
  write_file(path, R"({"dim": 2, "kraus": [[[[0.9,0],[0,0]],[[0,0],[0.9,0]]]]})");
  CHECK(tu::thrown_kind([&] { load_channel(path); }) == "validation");
  write_file(path, R"({"dim": 2, "kraus")");
  CHECK(tu::thrown_kind([&] { load_channel(path); }) == "parse");
  CHECK(tu::thrown_kind([] { load_channel("/tmp/tickwork_channel_missing.json"); }) ==
        "parse");
}
