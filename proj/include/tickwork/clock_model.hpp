#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tickwork/numerics.hpp"

namespace tickwork {

/// One jump channel of the clockwork. When it fires, the tick register shifts
/// by `delta`. The rate gamma stays outside the operator: the generator term
/// is rate * (op . op^+ - 1/2 {op^+ op, .}).
struct JumpTerm {
  int delta = 0;
  double rate = 0.0;
  CMatrix op;
};

/// Register-translation-invariant clock: a finite clockwork evolving under
/// `hamiltonian` whose jumps advance an unbounded tick counter by `delta`.
struct ClockSpec {
  int dim = 0;
  CMatrix hamiltonian;
  std::vector<JumpTerm> jumps;
  CMatrix initial_clockwork;
  std::vector<std::string> labels;  // optional clockwork basis labels
};

struct PropertyFlags {
  bool self_timed = false;
  bool clockwork_independent = false;
  bool serial_registers = false;  // every |delta| <= 1
  bool irreversible_ticks = false;  // no delta < 0
  bool elementary() const {
    return self_timed && clockwork_independent && serial_registers && irreversible_ticks;
  }
};

/// Jump between register blocks of a general clock. `op` lives on the full
/// direct-sum space and must be supported on the single pair (from, to).
struct GeneralJump {
  int from_block = 0;
  int to_block = 0;
  double rate = 0.0;
  CMatrix op;
};

/// Clock whose register values carry clockworks of possibly different
/// dimension; the Hamiltonian is block-diagonal by construction.
struct GeneralClockSpec {
  std::vector<int> blocks;
  std::vector<CMatrix> hamiltonian_blocks;
  std::vector<GeneralJump> jumps;

  int total_dim() const;
  int block_offset(int n) const;
};

/// Checks operator sanity (Hermitian Hamiltonian, PSD unit-trace initial
/// state, nonnegative rates, nonzero ops) and reports the structural flags.
/// Throws a validation error listing every violation found.
PropertyFlags validate_elementary(const ClockSpec& spec, const ToleranceConfig& tol = {});

struct GeneralDiagnostics {
  PropertyFlags flags;
  std::vector<std::pair<int, int>> jump_support;  // (from, to) per jump
  std::vector<std::string> notes;
};

/// Confirms each jump connects exactly one ordered block pair and that the
/// per-block Hamiltonians are Hermitian. A jump overlapping several block
/// pairs raises a structure error naming the term.
GeneralDiagnostics validate_general(const GeneralClockSpec& spec, const ToleranceConfig& tol = {});

using AnySpec = std::variant<ClockSpec, GeneralClockSpec>;

/// Reads a clock description from JSON (see docs/clock-spec.md). Malformed
/// input raises a parse error naming the offending field.
AnySpec load_spec(const std::string& path);
AnySpec parse_spec_text(const std::string& text, const std::string& origin = "<input>");

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
/// save(load(x)) reproduces canonical input byte for byte.
std::string canonical_text(const AnySpec& spec);
void save_spec(const AnySpec& spec, const std::string& path);

/// Lindblad generator of a general clock on its direct-sum space.
SuperOperator build_general_generator(const GeneralClockSpec& spec);

// Ready-made elementary clocks used by tests, benchmarks and the docs.
ClockSpec poisson_clock(double gamma);
ClockSpec erlang_clock(int stages, double gamma);
ClockSpec two_level_coherent_clock(double omega, double gamma);
ClockSpec branching_clock(double tick_rate, double branch_rate, double slow_rate);

}  // namespace tickwork
