#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tickwork/numerics.hpp"

namespace tickwork {

/// Kraus-form channel on a dim-dimensional space, sum A_k^t A_k = 1.
struct QuantumChannel {
  int dim = 0;
  std::vector<CMatrix> kraus_ops;

  CMatrix apply(const CMatrix& rho) const;       // sum A rho A^t
  CMatrix apply_dual(const CMatrix& x) const;    // sum A^t x A
};

/// Validates shapes and the completeness sum before wrapping the operators.
QuantumChannel make_channel(std::vector<CMatrix> kraus);

QuantumChannel load_channel(const std::string& path);

/// Largest Frobenius distance ||E(rho) - rho|| over the given states.
double verify_nondisturbance(const QuantumChannel& channel, const std::vector<CMatrix>& states);

/// One invariant sector: a c_dim-dimensional part the channel never touches
/// tensored with an f_dim-dimensional part frozen in the state omega.
struct KIBlock {
  int c_dim = 0;
  int f_dim = 0;
};

/// Decomposition H = direct sum over n of C_n (x) F_n in which every Kraus
/// operator acts as 1_{C_n} (x) A_{k,n} and each omega_n is left invariant.
struct KIDecomposition {
  std::vector<KIBlock> blocks;
  CMatrix basis;                // columns order the blocks, C-major inside each
  std::vector<CMatrix> omegas;  // f_dim x f_dim invariant state per block
};

/// Worst residual of the decomposition invariants against the channel: basis
/// unitarity, block-diagonal Kraus form, and invariance of each omega.
double verify_ki(const QuantumChannel& channel, const KIDecomposition& decomp);

/// Finds the invariant block structure from the fixed-point algebra of the
/// dual channel. Needs dim <= 32 and a full-rank fixed state; channels
/// without one raise an unsupported error (use verify_ki against a known
/// decomposition instead).
KIDecomposition ki_decompose(const QuantumChannel& channel, std::uint64_t seed = 7);

/// The clock with every frozen factor traced out: block n keeps only its
/// c_dim-dimensional part, and the register readout becomes the projector
/// onto that part.
struct MinimalClock {
  std::vector<int> c_dims;
  std::vector<CMatrix> reduced_states;  // one per input state
  std::vector<CMatrix> projectors;      // one per block
};

/// Trace-out-F reduction of `rho`, dropping nothing on states of the
/// decomposition's form; restore_state re-attaches the omegas.
CMatrix reduce_state(const KIDecomposition& decomp, const CMatrix& rho);
CMatrix restore_state(const KIDecomposition& decomp, const CMatrix& reduced);

/// Reduces every state and builds the register projectors. States that the
/// round trip does not reproduce to 1e-10 raise a shape error.
MinimalClock minimal_clock(const KIDecomposition& decomp, const std::vector<CMatrix>& states);

enum class ZenoSchedule { fixed, jittered };

/// Rabi qubit interrupted by projective register readouts: m of them, evenly
/// spaced over total_time, or uniformly jittered around those points.
struct ZenoConfig {
  double rabi_frequency = 0.0;
  double total_time = 0.0;
  std::vector<int> measurement_counts;
  ZenoSchedule schedule = ZenoSchedule::fixed;
  double jitter_width = 0.0;
  std::uint64_t seed = 11;
};

struct ZenoPoint {
  int m = 0;
  double survival = 0.0;       // P(every readout stays at register 0)
  double mean_register = 0.0;  // <n> at total_time under unconditioned readout
};

std::vector<ZenoPoint> zeno_experiment(const ZenoConfig& cfg);

/// Probability that every projective readout lands in projectors[kept], for
/// unitary dynamics under `h` measured at the given times. dim <= 16.
double zeno_record_probability(const CMatrix& h, const CMatrix& rho0,
                               const std::vector<CMatrix>& projectors, int kept,
                               std::vector<double> times, double total_time);

/// Final state at total_time when each readout dephases instead of selecting.
CMatrix zeno_dephased_state(const CMatrix& h, const CMatrix& rho0,
                            const std::vector<CMatrix>& projectors, std::vector<double> times,
                            double total_time);

/// Ladder Hamiltonian H = sum n omega |n><n| probed through the angle basis
/// and the alpha-shifted bases.
struct SWPConfig {
  int d = 0;
  double omega = 0.0;
  std::vector<double> alphas;  // each in [0, 1)
};

struct SWPAlphaReport {
  double alpha = 0.0;
  double gram_residual = 0.0;          // shifted basis orthonormality defect
  double completeness_residual = 0.0;  // POVM sum vs identity, max entry
  std::vector<double> arrival_times;   // t_l = 2 pi (l + alpha) / (omega d)
  std::vector<double> arrival_probabilities;  // shifted-outcome l at t_l
};

struct SWPReport {
  int d = 0;
  double omega = 0.0;
  std::vector<double> step_overlaps;  // |<theta_{k+1}| U(2 pi / (omega d)) |theta_k>|
  std::vector<SWPAlphaReport> alphas;
};

SWPReport swp_demo(const SWPConfig& cfg);

}  // namespace tickwork
