#include "tickwork/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace tickwork {

namespace {

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double one_norm(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().colwise().sum().maxCoeff();
}

void require_square(const CMatrix& m, const char* who) {
  if (m.rows() != m.cols())
    fail("dimension", std::string(who) + ": matrix is " + std::to_string(m.rows()) +
                          "x" + std::to_string(m.cols()) + ", expected square");
}

}  // namespace

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.adjoint()) <= tol * scale;
}

bool is_psd(const CMatrix& m, double tol) {
  if (!is_hermitian(m, std::max(tol, 1e-12))) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> es((m + m.adjoint()) / 2.0);
  const double scale = std::max(1.0, max_abs(m));
  return es.eigenvalues().minCoeff() >= -tol * scale;
}

bool is_unitary(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  CMatrix gram = m.adjoint() * m;
  gram -= CMatrix::Identity(m.rows(), m.cols());
  return max_abs(gram) <= tol;
}

CVector vectorize(const CMatrix& m) {
  const int rows = static_cast<int>(m.rows()), cols = static_cast<int>(m.cols());
  CVector v(rows * cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) v(c * rows + r) = m(r, c);
  return v;
}

CMatrix devectorize(const CVector& v, int dim) {
  if (v.size() != static_cast<long>(dim) * dim)
    fail("dimension", "devectorize: vector length " + std::to_string(v.size()) +
                          " does not match dim " + std::to_string(dim));
  CMatrix m(dim, dim);
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) m(r, c) = v(c * dim + r);
  return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix product_superop(const CMatrix& a, const CMatrix& b) {
  return kron(b.transpose(), a);
}

CMatrix left_mult_superop(const CMatrix& a, int dim) {
  return kron(CMatrix::Identity(dim, dim), a);
}

CMatrix right_mult_superop(const CMatrix& b, int dim) {
  return kron(b.transpose(), CMatrix::Identity(dim, dim));
}

SuperOperator SuperOperator::zero(int dim) {
  return {dim, CMatrix::Zero(dim * dim, dim * dim)};
}

SuperOperator SuperOperator::identity(int dim) {
  return {dim, CMatrix::Identity(dim * dim, dim * dim)};
}

CMatrix SuperOperator::apply(const CMatrix& x) const {
  if (x.rows() != dim || x.cols() != dim)
    fail("dimension", "SuperOperator::apply: argument is " + std::to_string(x.rows()) +
                          "x" + std::to_string(x.cols()) + ", superoperator dim is " +
                          std::to_string(dim));
  return devectorize(action * vectorize(x), dim);
}

SuperOperator& SuperOperator::operator+=(const SuperOperator& other) {
  if (other.dim != dim) fail("dimension", "SuperOperator: dimension mismatch in +=");
  action += other.action;
  return *this;
}

SuperOperator SuperOperator::operator*(cplx scale) const {
  return {dim, CMatrix(scale * action)};
}

void add_dissipator(SuperOperator& target, const CMatrix& l, double rate) {
  const int d = target.dim;
  CMatrix ll = l.adjoint() * l;
  target.action += rate * (product_superop(l, l.adjoint()) -
                           0.5 * (left_mult_superop(ll, d) + right_mult_superop(ll, d)));
}

void add_commutator(SuperOperator& target, const CMatrix& h) {
  const int d = target.dim;
  target.action += cplx(0, -1) * (left_mult_superop(h, d) - right_mult_superop(h, d));
}

CMatrix matrix_exponential(const CMatrix& m, double scale) {
  require_square(m, "matrix_exponential");
  CMatrix scaled = scale * m;
  const double norm = one_norm(scaled);
  if (norm > 1e4)
    fail("conditioning", "matrix_exponential: ||scale*m||_1 = " + std::to_string(norm) +
                             " exceeds 1e4");
  return scaled.exp();
}

cplx leading_eigenvalue(const SuperOperator& s) {
  require_square(s.action, "leading_eigenvalue");
  const int n = static_cast<int>(s.action.rows());
  if (n == 1) return s.action(0, 0);

  Eigen::ComplexEigenSolver<CMatrix> es(s.action, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    fail("numerical", "leading_eigenvalue: eigensolver failed to converge");

  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end(),
            [](const cplx& a, const cplx& b) { return a.real() > b.real(); });

  const double gap = ev[0].real() - ev[1].real();
  if (gap <= 1e-10)
    fail("degeneracy", "leading_eigenvalue: spectral gap " + std::to_string(gap) +
                           " below 1e-10; leading eigenvalue not isolated");
  return ev[0];
}

CMatrix stationary_state(const SuperOperator& s) {
  require_square(s.action, "stationary_state");
  const int d = s.dim;
  const int n = static_cast<int>(s.action.rows());

  if (n == 1) return CMatrix::Ones(1, 1);

  Eigen::JacobiSVD<CMatrix> svd(s.action, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();  // descending
  const double scale = std::max(1.0, sv(0));

  if (sv(n - 2) <= 1e-10 * scale)
    fail("degeneracy", "stationary_state: nullspace dimension >= 2, steady state not unique");
  if (sv(n - 1) > 1e-8 * scale)
    fail("precondition", "stationary_state: generator has no nullspace (smallest singular value " +
                             std::to_string(sv(n - 1)) + ")");

  CMatrix rho = devectorize(svd.matrixV().col(n - 1), d);
  rho = (rho + CMatrix(rho.adjoint())) / 2.0;
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-10)
    fail("numerical", "stationary_state: null vector has vanishing trace");
  rho /= tr;

  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-10)
    fail("numerical", "stationary_state: state not positive semidefinite (min eigenvalue " +
                          std::to_string(es.eigenvalues().minCoeff()) + ")");

  const double resid = s.apply(rho).norm();
  if (resid > 1e-10 * std::max(1.0, s.action.norm()))
    fail("numerical", "stationary_state: residual ||L[rho]||_F = " + std::to_string(resid));
  return rho;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RandomStream::split(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL));
}

}  // namespace tickwork
