#include "tickwork/structure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "tickwork/errors.hpp"

namespace tickwork {

using nlohmann::json;

namespace {

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hs_dot(const CMatrix& a, const CMatrix& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

cplx complex_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail("parse", path + ": expected complex entry [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

CMatrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    fail("parse", path + ": expected a matrix as an array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      fail("parse", path + ": row " + std::to_string(r) + " has ragged length");
    for (int c = 0; c < cols; ++c)
      m(r, c) = complex_from_json(j[r][c], path + "[" + std::to_string(r) + "][" +
                                               std::to_string(c) + "]");
  }
  return m;
}

void check_density(const CMatrix& rho, int dim, const std::string& who) {
  if (rho.rows() != dim || rho.cols() != dim)
    fail("dimension", who + ": state is " + std::to_string(rho.rows()) + "x" +
                          std::to_string(rho.cols()) + ", expected dim " + std::to_string(dim));
  if (!is_hermitian(rho, 1e-10) || !is_psd(rho, 1e-10) ||
      std::abs(rho.trace() - cplx(1, 0)) > 1e-10)
    fail("validation", who + ": state is not a density matrix");
}

}  // namespace

CMatrix QuantumChannel::apply(const CMatrix& rho) const {
  if (rho.rows() != dim || rho.cols() != dim)
    fail("dimension", "QuantumChannel::apply: argument does not match channel dim " +
                          std::to_string(dim));
  CMatrix out = CMatrix::Zero(dim, dim);
  for (const CMatrix& a : kraus_ops) out += a * rho * a.adjoint();
  return out;
}

CMatrix QuantumChannel::apply_dual(const CMatrix& x) const {
  if (x.rows() != dim || x.cols() != dim)
    fail("dimension", "QuantumChannel::apply_dual: argument does not match channel dim " +
                          std::to_string(dim));
  CMatrix out = CMatrix::Zero(dim, dim);
  for (const CMatrix& a : kraus_ops) out += a.adjoint() * x * a;
  return out;
}

QuantumChannel make_channel(std::vector<CMatrix> kraus) {
  if (kraus.empty()) fail("validation", "make_channel: no Kraus operators given");
  const int d = static_cast<int>(kraus.front().rows());
  if (d < 1) fail("dimension", "make_channel: empty Kraus operator");
  for (const CMatrix& a : kraus)
    if (a.rows() != d || a.cols() != d)
      fail("dimension", "make_channel: Kraus operators must be square with a common dimension");
  CMatrix sum = CMatrix::Zero(d, d);
  for (const CMatrix& a : kraus) sum += a.adjoint() * a;
  sum -= CMatrix::Identity(d, d);
  const double defect = max_abs(sum);
  if (defect > 1e-12)
    fail("validation", "make_channel: completeness sum deviates from the identity by " +
                           std::to_string(defect));
  QuantumChannel out;
  out.dim = d;
  out.kraus_ops = std::move(kraus);
  return out;
}

QuantumChannel load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("parse", "cannot open channel file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail("parse", path + ": " + e.what());
  }
  if (!j.is_object()) fail("parse", path + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "dim" && it.key() != "kraus")
      fail("parse", path + ": unknown field \"" + it.key() + "\"");
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    fail("parse", path + ": missing or non-integer field \"dim\"");
  const int dim = j["dim"].get<int>();
  if (!j.contains("kraus") || !j["kraus"].is_array() || j["kraus"].empty())
    fail("parse", path + ": field \"kraus\" must be a non-empty array");
  std::vector<CMatrix> ops;
  for (size_t i = 0; i < j["kraus"].size(); ++i) {
    ops.push_back(matrix_from_json(j["kraus"][i], path + ".kraus[" + std::to_string(i) + "]"));
    if (ops.back().rows() != dim || ops.back().cols() != dim)
      fail("parse", path + ".kraus[" + std::to_string(i) + "]: operator does not match dim " +
                        std::to_string(dim));
  }
  return make_channel(std::move(ops));
}

double verify_nondisturbance(const QuantumChannel& channel, const std::vector<CMatrix>& states) {
  double worst = 0.0;
  for (const CMatrix& rho : states) {
    if (rho.rows() != channel.dim || rho.cols() != channel.dim)
      fail("dimension", "verify_nondisturbance: state does not match channel dim " +
                            std::to_string(channel.dim));
    worst = std::max(worst, (channel.apply(rho) - rho).norm());
  }
  return worst;
}

namespace {

// Left and right null spaces of (T - 1) for the channel superoperator T:
// right null vectors are fixed points of the channel, left null vectors fixed
// points of its dual (the adjoint of T in the Hilbert-Schmidt inner product).
struct FixedSpaces {
  CMatrix primal;
  CMatrix dual;
};

FixedSpaces fixed_spaces(const QuantumChannel& channel) {
  const int d = channel.dim;
  CMatrix t = CMatrix::Zero(d * d, d * d);
  for (const CMatrix& a : channel.kraus_ops) t += product_superop(a, a.adjoint());
  t -= CMatrix::Identity(d * d, d * d);
  // Eigen 3.4.0's divide-and-conquer SVD returns wrong singular vectors for
  // complex matrices with this heavily degenerate spectrum; Jacobi is slower
  // but exact on the null spaces we need.
  const Eigen::MatrixXcd dense = t;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sing = svd.singularValues();
  const double cut = 1e-10 * std::max(1.0, sing(0));
  int r = 0;
  for (int i = 0; i < sing.size(); ++i)
    if (sing(i) < cut) ++r;
  if (r == 0) fail("numerical", "ki_decompose: found no fixed point of the channel");
  return {CMatrix(svd.matrixV().rightCols(r)), CMatrix(svd.matrixU().rightCols(r))};
}

// Image of the maximally mixed state under the spectral projector onto the
// eigenvalue-1 eigenspace. A Cesaro average of channel powers realizes the
// same projector, so the result is a fixed state whose support contains the
// support of every other fixed state.
CMatrix maximal_fixed_state(const FixedSpaces& fs, int d) {
  CVector target = fs.dual.adjoint() * vectorize(CMatrix::Identity(d, d) / double(d));
  CVector coeff = (fs.dual.adjoint() * fs.primal).partialPivLu().solve(target);
  CMatrix sigma = hermitize(devectorize(fs.primal * coeff, d));
  sigma /= sigma.trace().real();
  return sigma;
}

// Hermitian orthonormal basis of the span of the given fixed-point vectors.
// The span is *-closed, so Hermitian and anti-Hermitian parts stay inside it;
// an eigendecomposition of their real Gram matrix yields an orthonormal basis
// without touching the degenerate-spectrum SVD paths.
std::vector<CMatrix> hermitian_algebra_basis(const CMatrix& cols, int d) {
  const int r = static_cast<int>(cols.cols());
  std::vector<CMatrix> parts;
  parts.reserve(2 * r);
  for (int j = 0; j < r; ++j) {
    const CMatrix x = devectorize(cols.col(j), d);
    parts.push_back(hermitize(x));
    parts.push_back(hermitize(cplx(0, -1) * x));
  }
  Eigen::MatrixXd gram(2 * r, 2 * r);
  for (int i = 0; i < 2 * r; ++i)
    for (int j = i; j < 2 * r; ++j) gram(i, j) = gram(j, i) = hs_dot(parts[i], parts[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const auto& ev = es.eigenvalues();
  const double cut = 1e-10 * std::max(1.0, ev(ev.size() - 1));
  std::vector<CMatrix> basis;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) <= cut) continue;
    CMatrix b = CMatrix::Zero(d, d);
    for (int j = 0; j < 2 * r; ++j) b += es.eigenvectors()(j, i) * parts[j];
    basis.push_back(hermitize(b / std::sqrt(ev(i))));
  }
  if (static_cast<int>(basis.size()) != r)
    fail("numerical-rank", "ki_decompose: fixed algebra rank " + std::to_string(basis.size()) +
                               " does not match its complex dimension " + std::to_string(r));
  return basis;
}

CMatrix random_element(const std::vector<CMatrix>& basis, RandomStream& rng) {
  CMatrix out = CMatrix::Zero(basis.front().rows(), basis.front().cols());
  for (const CMatrix& b : basis) out += (2.0 * rng.uniform() - 1.0) * b;
  return out;
}

struct EigenSplit {
  CMatrix vectors;
  std::vector<int> starts;
  std::vector<int> sizes;
};

EigenSplit split_spectrum(const CMatrix& herm, double gap) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  EigenSplit out;
  out.vectors = es.eigenvectors();
  int start = 0;
  for (int i = 1; i <= ev.size(); ++i) {
    if (i == ev.size() || ev(i) - ev(i - 1) > gap * scale) {
      out.starts.push_back(start);
      out.sizes.push_back(i - start);
      start = i;
    }
  }
  return out;
}

bool fingerprint_less(const CMatrix& a, const CMatrix& b) {
  for (int c = 0; c < a.cols() && c < b.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r) {
      const cplx x = a(r, c), y = b(r, c);
      if (x.real() < y.real() - 1e-9) return true;
      if (x.real() > y.real() + 1e-9) return false;
      if (x.imag() < y.imag() - 1e-9) return true;
      if (x.imag() > y.imag() + 1e-9) return false;
    }
  return a.cols() < b.cols();
}

// One randomized pass: find the center of the fixed algebra as the elements
// commuting with two generic members, split the space along the eigenspaces
// of a generic center element, then factor each block as C (x) F by aligning
// the degenerate eigenspaces of a generic algebra element. Returns false on
// any resolvable degeneracy so the caller can retry with fresh draws.
bool try_decompose(const std::vector<CMatrix>& basis, const CMatrix& sigma, int d,
                   RandomStream& rng, KIDecomposition& out) {
  const int r = static_cast<int>(basis.size());
  const CMatrix s1 = random_element(basis, rng);
  const CMatrix s2 = random_element(basis, rng);
  std::vector<CMatrix> c1(r), c2(r);
  for (int j = 0; j < r; ++j) {
    c1[j] = basis[j] * s1 - s1 * basis[j];
    c2[j] = basis[j] * s2 - s2 * basis[j];
  }
  Eigen::MatrixXd gram(r, r);
  for (int j = 0; j < r; ++j)
    for (int k = j; k < r; ++k) {
      const double g = hs_dot(c1[j], c1[k]) + hs_dot(c2[j], c2[k]);
      gram(j, k) = g;
      gram(k, j) = g;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ges(gram);
  const double cut = 1e-10 * std::max(1.0, ges.eigenvalues().maxCoeff());
  std::vector<CMatrix> center;
  for (int i = 0; i < r && ges.eigenvalues()(i) < cut; ++i) {
    CMatrix z = CMatrix::Zero(d, d);
    for (int j = 0; j < r; ++j) z += ges.eigenvectors()(j, i) * basis[j];
    center.push_back(z);
  }
  if (center.empty()) return false;

  const EigenSplit coarse = split_spectrum(random_element(center, rng), 1e-8);
  if (coarse.sizes.size() != center.size()) return false;

  const CMatrix s_fine = random_element(basis, rng);
  const CMatrix y_align = random_element(basis, rng);

  const int n_blocks = static_cast<int>(coarse.sizes.size());
  std::vector<KIBlock> blocks(n_blocks);
  std::vector<CMatrix> omegas(n_blocks), block_cols(n_blocks);
  for (int n = 0; n < n_blocks; ++n) {
    const int m = coarse.sizes[n];
    const CMatrix q = coarse.vectors.middleCols(coarse.starts[n], m);
    const EigenSplit fine = split_spectrum(q.adjoint() * s_fine * q, 1e-8);
    const int f = fine.sizes.front();
    for (int s : fine.sizes)
      if (s != f) return false;
    const int c = static_cast<int>(fine.sizes.size());
    const CMatrix y_block = q.adjoint() * y_align * q;
    const CMatrix v1 = fine.vectors.leftCols(f);
    CMatrix aligned(m, m);
    aligned.leftCols(f) = v1;
    for (int a = 1; a < c; ++a) {
      const CMatrix ea = fine.vectors.middleCols(a * f, f);
      const CMatrix core = ea.adjoint() * y_block * v1;
      Eigen::JacobiSVD<CMatrix> psvd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);
      if (psvd.singularValues()(f - 1) < 1e-8 * std::max(1.0, max_abs(y_block))) return false;
      aligned.middleCols(a * f, f) = ea * (psvd.matrixU() * psvd.matrixV().adjoint());
    }
    block_cols[n] = q * aligned;
    const CMatrix sig_block = block_cols[n].adjoint() * sigma * block_cols[n];
    CMatrix omega = CMatrix::Zero(f, f);
    for (int a = 0; a < c; ++a) omega += sig_block.block(a * f, a * f, f, f);
    omega = hermitize(omega);
    omega /= omega.trace().real();
    blocks[n] = {c, f};
    omegas[n] = omega;
  }

  std::vector<int> order(n_blocks);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (blocks[x].c_dim != blocks[y].c_dim) return blocks[x].c_dim < blocks[y].c_dim;
    if (blocks[x].f_dim != blocks[y].f_dim) return blocks[x].f_dim < blocks[y].f_dim;
    return fingerprint_less(block_cols[x], block_cols[y]);
  });
  out.blocks.clear();
  out.omegas.clear();
  out.basis = CMatrix(d, d);
  int col = 0;
  for (int idx : order) {
    out.blocks.push_back(blocks[idx]);
    out.omegas.push_back(omegas[idx]);
    const int width = static_cast<int>(block_cols[idx].cols());
    out.basis.middleCols(col, width) = block_cols[idx];
    col += width;
  }
  return true;
}

int checked_dim(const KIDecomposition& decomp, const std::string& who) {
  if (decomp.blocks.empty()) fail("dimension", who + ": decomposition has no blocks");
  int d = 0;
  for (const KIBlock& b : decomp.blocks) {
    if (b.c_dim < 1 || b.f_dim < 1)
      fail("dimension", who + ": block dimensions must be positive");
    d += b.c_dim * b.f_dim;
  }
  if (decomp.basis.rows() != d || decomp.basis.cols() != d)
    fail("dimension", who + ": basis is " + std::to_string(decomp.basis.rows()) + "x" +
                          std::to_string(decomp.basis.cols()) + ", blocks need " +
                          std::to_string(d));
  if (decomp.omegas.size() != decomp.blocks.size())
    fail("dimension", who + ": one omega per block required");
  for (size_t n = 0; n < decomp.blocks.size(); ++n)
    if (decomp.omegas[n].rows() != decomp.blocks[n].f_dim ||
        decomp.omegas[n].cols() != decomp.blocks[n].f_dim)
      fail("dimension", who + ": omega " + std::to_string(n) + " does not match f_dim");
  return d;
}

}  // namespace

double verify_ki(const QuantumChannel& channel, const KIDecomposition& decomp) {
  const int d = checked_dim(decomp, "verify_ki");
  if (channel.dim != d)
    fail("dimension", "verify_ki: channel dim " + std::to_string(channel.dim) +
                          " does not match decomposition dim " + std::to_string(d));
  const int n_blocks = static_cast<int>(decomp.blocks.size());
  CMatrix gram = decomp.basis.adjoint() * decomp.basis;
  gram -= CMatrix::Identity(d, d);
  double worst = max_abs(gram);

  std::vector<std::vector<CMatrix>> factors(n_blocks);
  for (const CMatrix& a : channel.kraus_ops) {
    const CMatrix rotated = decomp.basis.adjoint() * a * decomp.basis;
    CMatrix recon = CMatrix::Zero(d, d);
    int off = 0;
    for (int n = 0; n < n_blocks; ++n) {
      const int c = decomp.blocks[n].c_dim, f = decomp.blocks[n].f_dim;
      CMatrix a_n = CMatrix::Zero(f, f);
      for (int i = 0; i < c; ++i) a_n += rotated.block(off + i * f, off + i * f, f, f);
      a_n /= double(c);
      for (int i = 0; i < c; ++i) recon.block(off + i * f, off + i * f, f, f) = a_n;
      factors[n].push_back(std::move(a_n));
      off += c * f;
    }
    worst = std::max(worst, max_abs(rotated - recon));
  }

  for (int n = 0; n < n_blocks; ++n) {
    const CMatrix& omega = decomp.omegas[n];
    CMatrix acc = CMatrix::Zero(omega.rows(), omega.cols());
    for (const CMatrix& a_n : factors[n]) acc += a_n * omega * a_n.adjoint();
    worst = std::max(worst, max_abs(acc - omega));
    worst = std::max(worst, max_abs(omega - omega.adjoint()));
    worst = std::max(worst, std::abs(omega.trace() - cplx(1, 0)));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(omega));
    worst = std::max(worst, std::max(0.0, -es.eigenvalues().minCoeff()));
  }
  return worst;
}

KIDecomposition ki_decompose(const QuantumChannel& channel, std::uint64_t seed) {
  const int d = channel.dim;
  if (d > 32)
    fail("precondition", "ki_decompose: dim " + std::to_string(d) + " exceeds the supported 32");

  const FixedSpaces fs = fixed_spaces(channel);
  const CMatrix sigma = maximal_fixed_state(fs, d);
  Eigen::SelfAdjointEigenSolver<CMatrix> ses(sigma);
  if (ses.eigenvalues().minCoeff() <= 1e-10)
    fail("unsupported", "ki_decompose: channel has no full-rank fixed state");

  const int r = static_cast<int>(fs.dual.cols());
  KIDecomposition decomp;
  if (r == d * d || r == 1) {
    decomp.blocks = {r == 1 ? KIBlock{1, d} : KIBlock{d, 1}};
    decomp.basis = CMatrix::Identity(d, d);
    decomp.omegas = {r == 1 ? sigma : CMatrix(CMatrix::Ones(1, 1))};
    const double resid = verify_ki(channel, decomp);
    if (resid > 1e-10)
      fail("numerical-rank",
           "ki_decompose: trivial-algebra residual " + std::to_string(resid));
    return decomp;
  }

  const std::vector<CMatrix> basis = hermitian_algebra_basis(fs.dual, d);
  for (int attempt = 0; attempt < 40; ++attempt) {
    RandomStream rng(RandomStream::split(seed, static_cast<std::uint64_t>(attempt)));
    decomp = KIDecomposition{};
    if (!try_decompose(basis, sigma, d, rng, decomp)) continue;
    if (verify_ki(channel, decomp) <= 1e-10) return decomp;
  }
  fail("numerical-rank", "ki_decompose: eigenvalue gaps stayed unresolved after 40 draws");
}

CMatrix reduce_state(const KIDecomposition& decomp, const CMatrix& rho) {
  const int d = checked_dim(decomp, "reduce_state");
  if (rho.rows() != d || rho.cols() != d)
    fail("dimension", "reduce_state: state does not match decomposition dim " +
                          std::to_string(d));
  const CMatrix rotated = decomp.basis.adjoint() * rho * decomp.basis;
  int reduced_dim = 0;
  for (const KIBlock& b : decomp.blocks) reduced_dim += b.c_dim;
  CMatrix out = CMatrix::Zero(reduced_dim, reduced_dim);
  int off = 0, red = 0;
  for (const KIBlock& b : decomp.blocks) {
    for (int i = 0; i < b.c_dim; ++i)
      for (int j = 0; j < b.c_dim; ++j)
        out(red + i, red + j) =
            rotated.block(off + i * b.f_dim, off + j * b.f_dim, b.f_dim, b.f_dim).trace();
    off += b.c_dim * b.f_dim;
    red += b.c_dim;
  }
  return out;
}

CMatrix restore_state(const KIDecomposition& decomp, const CMatrix& reduced) {
  const int d = checked_dim(decomp, "restore_state");
  int reduced_dim = 0;
  for (const KIBlock& b : decomp.blocks) reduced_dim += b.c_dim;
  if (reduced.rows() != reduced_dim || reduced.cols() != reduced_dim)
    fail("dimension", "restore_state: state does not match reduced dim " +
                          std::to_string(reduced_dim));
  CMatrix rotated = CMatrix::Zero(d, d);
  int off = 0, red = 0;
  for (size_t n = 0; n < decomp.blocks.size(); ++n) {
    const KIBlock& b = decomp.blocks[n];
    rotated.block(off, off, b.c_dim * b.f_dim, b.c_dim * b.f_dim) =
        kron(reduced.block(red, red, b.c_dim, b.c_dim), decomp.omegas[n]);
    off += b.c_dim * b.f_dim;
    red += b.c_dim;
  }
  return decomp.basis * rotated * decomp.basis.adjoint();
}

MinimalClock minimal_clock(const KIDecomposition& decomp, const std::vector<CMatrix>& states) {
  checked_dim(decomp, "minimal_clock");
  MinimalClock out;
  int reduced_dim = 0;
  for (const KIBlock& b : decomp.blocks) {
    out.c_dims.push_back(b.c_dim);
    reduced_dim += b.c_dim;
  }
  int red = 0;
  for (const KIBlock& b : decomp.blocks) {
    CMatrix p = CMatrix::Zero(reduced_dim, reduced_dim);
    p.block(red, red, b.c_dim, b.c_dim) = CMatrix::Identity(b.c_dim, b.c_dim);
    out.projectors.push_back(std::move(p));
    red += b.c_dim;
  }
  for (size_t i = 0; i < states.size(); ++i) {
    CMatrix reduced = reduce_state(decomp, states[i]);
    const double resid = max_abs(restore_state(decomp, reduced) - states[i]);
    if (resid > 1e-10)
      fail("shape", "minimal_clock: state " + std::to_string(i) +
                        " is not of the invariant form, round trip residual " +
                        std::to_string(resid));
    out.reduced_states.push_back(std::move(reduced));
  }
  return out;
}

namespace {

void check_zeno_frame(const CMatrix& h, const CMatrix& rho0,
                      const std::vector<CMatrix>& projectors, const std::string& who) {
  const int d = static_cast<int>(h.rows());
  if (d < 1 || h.cols() != d) fail("dimension", who + ": Hamiltonian must be square");
  if (d > 16)
    fail("precondition", who + ": dim " + std::to_string(d) + " exceeds the supported 16");
  if (!is_hermitian(h, 1e-10)) fail("validation", who + ": Hamiltonian is not Hermitian");
  check_density(rho0, d, who);
  if (projectors.empty()) fail("validation", who + ": no projectors given");
  CMatrix sum = CMatrix::Zero(d, d);
  for (const CMatrix& p : projectors) {
    if (p.rows() != d || p.cols() != d)
      fail("dimension", who + ": projector does not match dim " + std::to_string(d));
    if (!is_hermitian(p, 1e-10) || max_abs(p * p - p) > 1e-10)
      fail("validation", who + ": readout operators must be Hermitian projectors");
    sum += p;
  }
  if (max_abs(sum - CMatrix::Identity(d, d)) > 1e-10)
    fail("validation", who + ": projectors do not resolve the identity");
}

std::vector<double> checked_times(std::vector<double> times, double total_time,
                                  const std::string& who) {
  if (!(total_time > 0) || !std::isfinite(total_time))
    fail("precondition", who + ": total_time must be positive and finite");
  for (double t : times)
    if (!std::isfinite(t) || t < 0 || t > total_time)
      fail("precondition", who + ": readout times must lie in [0, total_time]");
  std::sort(times.begin(), times.end());
  return times;
}

}  // namespace

double zeno_record_probability(const CMatrix& h, const CMatrix& rho0,
                               const std::vector<CMatrix>& projectors, int kept,
                               std::vector<double> times, double total_time) {
  check_zeno_frame(h, rho0, projectors, "zeno_record_probability");
  if (kept < 0 || kept >= static_cast<int>(projectors.size()))
    fail("precondition", "zeno_record_probability: kept outcome out of range");
  times = checked_times(std::move(times), total_time, "zeno_record_probability");
  CMatrix rho = rho0;
  double prev = 0.0;
  for (double t : times) {
    const CMatrix u = matrix_exponential(cplx(0, -1) * h, t - prev);
    rho = u * rho * u.adjoint();
    rho = projectors[kept] * rho * projectors[kept];
    prev = t;
  }
  return std::max(0.0, rho.trace().real());
}

CMatrix zeno_dephased_state(const CMatrix& h, const CMatrix& rho0,
                            const std::vector<CMatrix>& projectors, std::vector<double> times,
                            double total_time) {
  check_zeno_frame(h, rho0, projectors, "zeno_dephased_state");
  times = checked_times(std::move(times), total_time, "zeno_dephased_state");
  CMatrix rho = rho0;
  double prev = 0.0;
  for (double t : times) {
    const CMatrix u = matrix_exponential(cplx(0, -1) * h, t - prev);
    rho = u * rho * u.adjoint();
    CMatrix dephased = CMatrix::Zero(rho.rows(), rho.cols());
    for (const CMatrix& p : projectors) dephased += p * rho * p;
    rho = std::move(dephased);
    prev = t;
  }
  const CMatrix u = matrix_exponential(cplx(0, -1) * h, total_time - prev);
  return u * rho * u.adjoint();
}

std::vector<ZenoPoint> zeno_experiment(const ZenoConfig& cfg) {
  if (!(cfg.rabi_frequency > 0) || !std::isfinite(cfg.rabi_frequency))
    fail("precondition", "zeno_experiment: rabi_frequency must be positive and finite");
  if (!(cfg.total_time > 0) || !std::isfinite(cfg.total_time))
    fail("precondition", "zeno_experiment: total_time must be positive and finite");
  if (cfg.measurement_counts.empty())
    fail("precondition", "zeno_experiment: no measurement counts given");
  for (int m : cfg.measurement_counts)
    if (m < 0) fail("precondition", "zeno_experiment: measurement counts must be nonnegative");
  if (cfg.jitter_width < 0 || !std::isfinite(cfg.jitter_width))
    fail("precondition", "zeno_experiment: jitter width must be nonnegative and finite");

  CMatrix h(2, 2);
  h << 0, 0.5 * cfg.rabi_frequency, 0.5 * cfg.rabi_frequency, 0;
  CMatrix rho0 = CMatrix::Zero(2, 2);
  rho0(0, 0) = 1;
  std::vector<CMatrix> projectors(2, CMatrix::Zero(2, 2));
  projectors[0](0, 0) = 1;
  projectors[1](1, 1) = 1;

  std::vector<ZenoPoint> out;
  for (size_t i = 0; i < cfg.measurement_counts.size(); ++i) {
    const int m = cfg.measurement_counts[i];
    std::vector<double> times;
    if (m == 0) {
      times.push_back(cfg.total_time);
    } else {
      for (int j = 1; j < m; ++j) times.push_back(cfg.total_time * j / m);
      times.push_back(cfg.total_time);
    }
    if (cfg.schedule == ZenoSchedule::jittered && cfg.jitter_width > 0) {
      RandomStream rng(RandomStream::split(cfg.seed, static_cast<std::uint64_t>(i)));
      for (double& t : times)
        t = std::clamp(t + cfg.jitter_width * (rng.uniform() - 0.5), 0.0, cfg.total_time);
    }
    ZenoPoint point;
    point.m = m;
    point.survival =
        zeno_record_probability(h, rho0, projectors, 0, times, cfg.total_time);
    const CMatrix rho = zeno_dephased_state(h, rho0, projectors, times, cfg.total_time);
    point.mean_register = 0.0;
    for (size_t n = 0; n < projectors.size(); ++n)
      point.mean_register += double(n) * (projectors[n] * rho).trace().real();
    out.push_back(point);
  }
  return out;
}

SWPReport swp_demo(const SWPConfig& cfg) {
  if (cfg.d < 2) fail("precondition", "swp_demo: dim must be at least 2");
  if (!(cfg.omega > 0) || !std::isfinite(cfg.omega))
    fail("precondition", "swp_demo: omega must be positive and finite");
  for (double alpha : cfg.alphas)
    if (!(alpha >= 0) || !(alpha < 1))
      fail("precondition", "swp_demo: alpha must lie in [0, 1)");

  const int d = cfg.d;
  const double pi = std::numbers::pi;
  const auto phase_state = [&](double k) {
    CVector v(d);
    for (int n = 0; n < d; ++n)
      v(n) = std::polar(1.0 / std::sqrt(double(d)), -2.0 * pi * n * k / d);
    return v;
  };
  const auto propagator = [&](double t) {
    CVector diag(d);
    for (int n = 0; n < d; ++n) diag(n) = std::polar(1.0, -n * cfg.omega * t);
    return diag;
  };

  std::vector<CVector> thetas;
  for (int k = 0; k < d; ++k) thetas.push_back(phase_state(k));

  SWPReport report;
  report.d = d;
  report.omega = cfg.omega;
  const CVector step = propagator(2.0 * pi / (cfg.omega * d));
  for (int k = 0; k < d; ++k) {
    const CVector moved = step.cwiseProduct(thetas[k]);
    report.step_overlaps.push_back(std::abs(thetas[(k + 1) % d].dot(moved)));
  }

  CMatrix theta_sum = CMatrix::Zero(d, d);
  for (const CVector& th : thetas) theta_sum += 0.5 * th * th.adjoint();

  for (double alpha : cfg.alphas) {
    SWPAlphaReport entry;
    entry.alpha = alpha;
    std::vector<CVector> lambdas;
    for (int l = 0; l < d; ++l) lambdas.push_back(phase_state(l + alpha));

    CMatrix gram(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) gram(a, b) = lambdas[a].dot(lambdas[b]);
    gram -= CMatrix::Identity(d, d);
    entry.gram_residual = max_abs(gram);

    CMatrix povm_sum = theta_sum;
    for (const CVector& lm : lambdas) povm_sum += 0.5 * lm * lm.adjoint();
    povm_sum -= CMatrix::Identity(d, d);
    entry.completeness_residual = max_abs(povm_sum);

    for (int l = 0; l < d; ++l) {
      const double t_l = 2.0 * pi * (l + alpha) / (cfg.omega * d);
      const CVector moved = propagator(t_l).cwiseProduct(thetas[0]);
      entry.arrival_times.push_back(t_l);
      entry.arrival_probabilities.push_back(0.5 * std::norm(lambdas[l].dot(moved)));
    }
    report.alphas.push_back(std::move(entry));
  }
  return report;
}

}  // namespace tickwork
