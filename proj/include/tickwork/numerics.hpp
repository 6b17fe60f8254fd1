#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "tickwork/errors.hpp"

namespace tickwork {

using cplx = std::complex<double>;

/// Dense complex matrix, entries stored row-major.
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::VectorXcd;

/// Tolerances used when validating operators; every check in the model layer
/// reads from one of these knobs.
struct ToleranceConfig {
  double hermiticity = 1e-12;
  double positivity = 1e-12;
  double trace = 1e-12;
  double unitarity = 1e-12;
};

bool is_hermitian(const CMatrix& m, double tol = 1e-12);
bool is_psd(const CMatrix& m, double tol = 1e-12);
bool is_unitary(const CMatrix& m, double tol = 1e-12);

/// Column-stacking vectorization: v[c*rows + r] = m(r, c).
CVector vectorize(const CMatrix& m);
CMatrix devectorize(const CVector& v, int dim);
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Matrix of the map X -> A X B under column stacking: kron(B^T, A).
CMatrix product_superop(const CMatrix& a, const CMatrix& b);
CMatrix left_mult_superop(const CMatrix& a, int dim);
CMatrix right_mult_superop(const CMatrix& b, int dim);

/// Linear map on d x d matrices, stored as its d^2 x d^2 matrix in the
/// column-stacking convention.
struct SuperOperator {
  int dim = 0;
  CMatrix action;  // d^2 x d^2

  static SuperOperator zero(int dim);
  static SuperOperator identity(int dim);
  CMatrix apply(const CMatrix& x) const;

  SuperOperator& operator+=(const SuperOperator& other);
  SuperOperator operator*(cplx scale) const;
};

/// Adds the dissipator rate * (L . L^+ - 1/2 {L^+ L, .}) onto `target`.
void add_dissipator(SuperOperator& target, const CMatrix& l, double rate);
/// Adds the commutator part -i[h, .] onto `target`.
void add_commutator(SuperOperator& target, const CMatrix& h);

/// exp(scale * m) by scaling-and-squaring with a Pade approximant.
/// Throws a conditioning error when ||scale * m||_1 > 1e4.
CMatrix matrix_exponential(const CMatrix& m, double scale = 1.0);

/// Eigenvalue of s with the largest real part. Requires the gap between the
/// two largest-real-part eigenvalues to exceed 1e-10.
cplx leading_eigenvalue(const SuperOperator& s);

/// Unique trace-one PSD solution of s[rho] = 0. A multi-dimensional nullspace
/// raises a degeneracy error.
CMatrix stationary_state(const SuperOperator& s);

/// Deterministic random stream. Uniform variates are derived from raw engine
/// words, so identical seeds give identical streams on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// 53-bit uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::uint64_t next_u64() { return engine_(); }

  /// Counter-based substream derivation: the stream for (master, index) does
  /// not depend on how many other substreams were drawn, which keeps
  /// multi-threaded sampling independent of the thread count.
  static std::uint64_t split(std::uint64_t master, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
};

}  // namespace tickwork
