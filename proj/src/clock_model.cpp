#include "tickwork/clock_model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace tickwork {

using nlohmann::json;

namespace {

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

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

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) { ok = true; break; }
    if (!ok) fail("parse", path + ": unknown field \"" + it.key() + "\"");
  }
}

double number_at(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key) || !obj[key].is_number())
    fail("parse", path + ": missing or non-numeric field \"" + key + "\"");
  return obj[key].get<double>();
}

int integer_at(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key) || !obj[key].is_number_integer())
    fail("parse", path + ": missing or non-integer field \"" + key + "\"");
  return obj[key].get<int>();
}

ClockSpec clock_from_json(const json& j, const std::string& origin) {
  reject_unknown_keys(j, {"dim", "hamiltonian", "jumps", "initial", "labels"}, origin);
  ClockSpec spec;
  spec.dim = integer_at(j, "dim", origin);
  if (!j.contains("hamiltonian")) fail("parse", origin + ": missing field \"hamiltonian\"");
  spec.hamiltonian = matrix_from_json(j["hamiltonian"], origin + ".hamiltonian");
  if (!j.contains("initial")) fail("parse", origin + ": missing field \"initial\"");
  spec.initial_clockwork = matrix_from_json(j["initial"], origin + ".initial");
  if (!j.contains("jumps") || !j["jumps"].is_array())
    fail("parse", origin + ": missing or non-array field \"jumps\"");
  int idx = 0;
  for (const auto& je : j["jumps"]) {
    const std::string path = origin + ".jumps[" + std::to_string(idx++) + "]";
    if (!je.is_object()) fail("parse", path + ": expected an object");
    reject_unknown_keys(je, {"delta", "rate", "op"}, path);
    JumpTerm term;
    term.delta = integer_at(je, "delta", path);
    term.rate = number_at(je, "rate", path);
    if (term.rate < 0) fail("parse", path + ".rate: negative rate " + std::to_string(term.rate));
    if (!je.contains("op")) fail("parse", path + ": missing field \"op\"");
    term.op = matrix_from_json(je["op"], path + ".op");
    spec.jumps.push_back(std::move(term));
  }
  if (j.contains("labels")) {
    if (!j["labels"].is_array()) fail("parse", origin + ".labels: expected an array");
    for (const auto& l : j["labels"]) {
      if (!l.is_string()) fail("parse", origin + ".labels: expected strings");
      spec.labels.push_back(l.get<std::string>());
    }
  }
  return spec;
}

GeneralClockSpec general_from_json(const json& j, const std::string& origin) {
  reject_unknown_keys(j, {"blocks", "hamiltonian_blocks", "jumps"}, origin);
  GeneralClockSpec spec;
  if (!j["blocks"].is_array() || j["blocks"].empty())
    fail("parse", origin + ".blocks: expected a nonempty array");
  for (const auto& b : j["blocks"]) {
    if (!b.is_number_integer() || b.get<int>() < 1)
      fail("parse", origin + ".blocks: entries must be positive integers");
    spec.blocks.push_back(b.get<int>());
  }
  if (!j.contains("hamiltonian_blocks") || !j["hamiltonian_blocks"].is_array() ||
      j["hamiltonian_blocks"].size() != spec.blocks.size())
    fail("parse", origin + ".hamiltonian_blocks: expected one matrix per block");
  for (size_t n = 0; n < spec.blocks.size(); ++n)
    spec.hamiltonian_blocks.push_back(matrix_from_json(
        j["hamiltonian_blocks"][n], origin + ".hamiltonian_blocks[" + std::to_string(n) + "]"));
  if (!j.contains("jumps") || !j["jumps"].is_array())
    fail("parse", origin + ": missing or non-array field \"jumps\"");
  const int total = spec.total_dim();
  int idx = 0;
  for (const auto& je : j["jumps"]) {
    const std::string path = origin + ".jumps[" + std::to_string(idx++) + "]";
    if (!je.is_object()) fail("parse", path + ": expected an object");
    reject_unknown_keys(je, {"from", "to", "rate", "op"}, path);
    GeneralJump jump;
    jump.from_block = integer_at(je, "from", path);
    jump.to_block = integer_at(je, "to", path);
    const int nblocks = static_cast<int>(spec.blocks.size());
    if (jump.from_block < 0 || jump.from_block >= nblocks || jump.to_block < 0 ||
        jump.to_block >= nblocks)
      fail("parse", path + ": block index out of range");
    jump.rate = number_at(je, "rate", path);
    if (jump.rate < 0) fail("parse", path + ".rate: negative rate");
    if (!je.contains("op")) fail("parse", path + ": missing field \"op\"");
    CMatrix op = matrix_from_json(je["op"], path + ".op");
    const int dfrom = spec.blocks[jump.from_block], dto = spec.blocks[jump.to_block];
    if (op.rows() == total && op.cols() == total) {
      jump.op = std::move(op);
    } else if (op.rows() == dto && op.cols() == dfrom) {
      // Rectangular block form; embed at the declared pair's offsets.
      jump.op = CMatrix::Zero(total, total);
      jump.op.block(spec.block_offset(jump.to_block), spec.block_offset(jump.from_block),
                    dto, dfrom) = op;
    } else {
      fail("parse", path + ".op: expected " + std::to_string(total) + "x" +
                        std::to_string(total) + " or " + std::to_string(dto) + "x" +
                        std::to_string(dfrom));
    }
    spec.jumps.push_back(std::move(jump));
  }
  return spec;
}

json clock_to_json(const ClockSpec& spec) {
  json j;
  j["dim"] = spec.dim;
  j["hamiltonian"] = matrix_to_json(spec.hamiltonian);
  json jumps = json::array();
  for (const auto& t : spec.jumps) {
    json je;
    je["delta"] = t.delta;
    je["rate"] = t.rate;
    je["op"] = matrix_to_json(t.op);
    jumps.push_back(std::move(je));
  }
  j["jumps"] = std::move(jumps);
  j["initial"] = matrix_to_json(spec.initial_clockwork);
  if (!spec.labels.empty()) j["labels"] = spec.labels;
  return j;
}

json general_to_json(const GeneralClockSpec& spec) {
  json j;
  j["blocks"] = spec.blocks;
  json hs = json::array();
  for (const auto& h : spec.hamiltonian_blocks) hs.push_back(matrix_to_json(h));
  j["hamiltonian_blocks"] = std::move(hs);
  json jumps = json::array();
  for (const auto& t : spec.jumps) {
    json je;
    je["from"] = t.from_block;
    je["to"] = t.to_block;
    je["rate"] = t.rate;
    je["op"] = matrix_to_json(t.op);
    jumps.push_back(std::move(je));
  }
  j["jumps"] = std::move(jumps);
  return j;
}

// Multiset comparison of (rate, local op) lists with tolerance; used for the
// register-translation-invariance flag of general clocks.
bool same_jump_family(std::vector<std::pair<double, CMatrix>> a,
                      std::vector<std::pair<double, CMatrix>> b) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto& [rate, op] : a) {
    bool matched = false;
    for (size_t i = 0; i < b.size(); ++i) {
      if (used[i]) continue;
      if (std::abs(b[i].first - rate) > 1e-12) continue;
      if (b[i].second.rows() != op.rows() || b[i].second.cols() != op.cols()) continue;
      if (max_abs(b[i].second - op) > 1e-12) continue;
      used[i] = true;
      matched = true;
      break;
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace

int GeneralClockSpec::total_dim() const {
  return std::accumulate(blocks.begin(), blocks.end(), 0);
}

int GeneralClockSpec::block_offset(int n) const {
  return std::accumulate(blocks.begin(), blocks.begin() + n, 0);
}

PropertyFlags validate_elementary(const ClockSpec& spec, const ToleranceConfig& tol) {
  std::vector<std::string> bad;
  if (spec.dim < 1) bad.push_back("dim must be >= 1");
  if (spec.dim > 256) bad.push_back("dim exceeds the supported bound 256");
  const int d = spec.dim;
  if (spec.hamiltonian.rows() != d || spec.hamiltonian.cols() != d)
    bad.push_back("hamiltonian is not dim x dim");
  else if (!is_hermitian(spec.hamiltonian, tol.hermiticity))
    bad.push_back("hamiltonian is not Hermitian");
  if (spec.initial_clockwork.rows() != d || spec.initial_clockwork.cols() != d) {
    bad.push_back("initial state is not dim x dim");
  } else {
    if (!is_hermitian(spec.initial_clockwork, tol.hermiticity))
      bad.push_back("initial state is not Hermitian");
    else if (!is_psd(spec.initial_clockwork, tol.positivity))
      bad.push_back("initial state is not positive semidefinite");
    if (std::abs(spec.initial_clockwork.trace() - cplx(1, 0)) > tol.trace)
      bad.push_back("initial state trace differs from 1");
  }
  for (size_t k = 0; k < spec.jumps.size(); ++k) {
    const auto& t = spec.jumps[k];
    const std::string who = "jump " + std::to_string(k);
    if (t.rate < 0) bad.push_back(who + " has negative rate");
    if (t.op.rows() != d || t.op.cols() != d)
      bad.push_back(who + " operator is not dim x dim");
    else if (max_abs(t.op) == 0.0)
      bad.push_back(who + " operator is zero");
  }
  if (!spec.labels.empty() && static_cast<int>(spec.labels.size()) != d)
    bad.push_back("labels length differs from dim");
  if (!bad.empty()) fail("validation", join(bad, "; "));

  PropertyFlags flags;
  flags.self_timed = true;            // jumps act on the register only through delta
  flags.clockwork_independent = true; // one clockwork shared by all register values
  flags.serial_registers = true;
  flags.irreversible_ticks = true;
  for (const auto& t : spec.jumps) {
    if (std::abs(t.delta) > 1) flags.serial_registers = false;
    if (t.delta < 0) flags.irreversible_ticks = false;
  }
  return flags;
}

GeneralDiagnostics validate_general(const GeneralClockSpec& spec, const ToleranceConfig& tol) {
  std::vector<std::string> bad;
  const int nblocks = static_cast<int>(spec.blocks.size());
  if (nblocks == 0) bad.push_back("no blocks");
  for (int n = 0; n < nblocks; ++n)
    if (spec.blocks[n] < 1) bad.push_back("block " + std::to_string(n) + " has dimension < 1");
  const int total = spec.total_dim();
  if (total > 256) bad.push_back("total dimension exceeds the supported bound 256");
  if (static_cast<int>(spec.hamiltonian_blocks.size()) != nblocks) {
    bad.push_back("hamiltonian_blocks length differs from blocks");
  } else {
    for (int n = 0; n < nblocks; ++n) {
      const auto& h = spec.hamiltonian_blocks[n];
      if (h.rows() != spec.blocks[n] || h.cols() != spec.blocks[n])
        bad.push_back("hamiltonian block " + std::to_string(n) + " has wrong shape");
      else if (!is_hermitian(h, tol.hermiticity))
        bad.push_back("hamiltonian block " + std::to_string(n) + " is not Hermitian");
    }
  }
  if (!bad.empty()) fail("validation", join(bad, "; "));

  GeneralDiagnostics diag;
  for (size_t k = 0; k < spec.jumps.size(); ++k) {
    const auto& t = spec.jumps[k];
    const std::string who = "jump " + std::to_string(k);
    if (t.rate < 0) bad.push_back(who + " has negative rate");
    if (t.from_block < 0 || t.from_block >= nblocks || t.to_block < 0 || t.to_block >= nblocks)
      bad.push_back(who + " declares an out-of-range block pair");
    if (t.op.rows() != total || t.op.cols() != total) {
      bad.push_back(who + " operator does not act on the full direct-sum space");
      continue;
    }
    // Infer the support pair: op must equal P_m op P_n for exactly one (m, n).
    const double support_tol = 1e-12 * std::max(1.0, max_abs(t.op));
    std::vector<std::pair<int, int>> support;
    for (int m = 0; m < nblocks; ++m)
      for (int n = 0; n < nblocks; ++n) {
        const double w = max_abs(t.op.block(spec.block_offset(m), spec.block_offset(n),
                                            spec.blocks[m], spec.blocks[n]));
        if (w > support_tol) support.emplace_back(n, m);  // stored as (from, to)
      }
    if (support.empty()) {
      bad.push_back(who + " operator is zero");
    } else if (support.size() > 1) {
      std::string pairs;
      for (const auto& [n, m] : support)
        pairs += " (" + std::to_string(n) + "->" + std::to_string(m) + ")";
      throw Error("structure", who + " overlaps multiple block pairs:" + pairs);
    } else {
      diag.jump_support.push_back(support[0]);
      if (support[0] != std::make_pair(t.from_block, t.to_block))
        bad.push_back(who + " declares pair (" + std::to_string(t.from_block) + "->" +
                      std::to_string(t.to_block) + ") but is supported on (" +
                      std::to_string(support[0].first) + "->" +
                      std::to_string(support[0].second) + ")");
    }
  }
  if (!bad.empty()) fail("validation", join(bad, "; "));

  auto& flags = diag.flags;
  flags.self_timed = true;  // enforced above: single block pair per jump
  flags.serial_registers = true;
  flags.irreversible_ticks = true;
  for (const auto& t : spec.jumps) {
    if (std::abs(t.to_block - t.from_block) > 1) flags.serial_registers = false;
    if (t.to_block < t.from_block) flags.irreversible_ticks = false;
  }

  // Translation invariance: equal blocks, equal Hamiltonians, and for each
  // shift the same (rate, local op) family out of every eligible source block.
  bool invariant = true;
  for (int n = 1; n < nblocks && invariant; ++n) {
    if (spec.blocks[n] != spec.blocks[0]) invariant = false;
    else if (max_abs(spec.hamiltonian_blocks[n] - spec.hamiltonian_blocks[0]) > 1e-12)
      invariant = false;
  }
  if (invariant) {
    std::vector<int> shifts;
    for (const auto& t : spec.jumps) shifts.push_back(t.to_block - t.from_block);
    std::sort(shifts.begin(), shifts.end());
    shifts.erase(std::unique(shifts.begin(), shifts.end()), shifts.end());
    for (int shift : shifts) {
      std::vector<std::vector<std::pair<double, CMatrix>>> families;
      for (int n = 0; n < nblocks; ++n) {
        if (n + shift < 0 || n + shift >= nblocks) continue;
        std::vector<std::pair<double, CMatrix>> family;
        for (const auto& t : spec.jumps)
          if (t.from_block == n && t.to_block == n + shift)
            family.emplace_back(t.rate,
                                t.op.block(spec.block_offset(t.to_block),
                                           spec.block_offset(t.from_block),
                                           spec.blocks[t.to_block], spec.blocks[t.from_block]));
        families.push_back(std::move(family));
      }
      for (size_t i = 1; i < families.size(); ++i)
        if (!same_jump_family(families[0], families[i])) { invariant = false; break; }
      if (!invariant) break;
    }
  }
  flags.clockwork_independent = invariant;
  if (!invariant) diag.notes.push_back("not register-translation invariant");
  return diag;
}

AnySpec parse_spec_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("parse", origin + ": " + e.what());
  }
  if (!j.is_object()) fail("parse", origin + ": top level must be an object");
  if (j.contains("blocks")) return general_from_json(j, origin);
  if (j.contains("dim")) return clock_from_json(j, origin);
  fail("parse", origin + ": expected either \"dim\" (elementary) or \"blocks\" (general)");
}

AnySpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("parse", "cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str(), path);
}

std::string canonical_text(const AnySpec& spec) {
  const json j = std::holds_alternative<ClockSpec>(spec)
                     ? clock_to_json(std::get<ClockSpec>(spec))
                     : general_to_json(std::get<GeneralClockSpec>(spec));
  return j.dump(2) + "\n";
}

void save_spec(const AnySpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("data", "cannot open output file: " + path);
  out << canonical_text(spec);
  if (!out) fail("data", "failed writing " + path);
}

SuperOperator build_general_generator(const GeneralClockSpec& spec) {
  const int total = spec.total_dim();
  CMatrix h = CMatrix::Zero(total, total);
  for (size_t n = 0; n < spec.blocks.size(); ++n)
    h.block(spec.block_offset(static_cast<int>(n)), spec.block_offset(static_cast<int>(n)),
            spec.blocks[n], spec.blocks[n]) = spec.hamiltonian_blocks[n];
  SuperOperator gen = SuperOperator::zero(total);
  add_commutator(gen, h);
  for (const auto& t : spec.jumps) add_dissipator(gen, t.op, t.rate);
  return gen;
}

ClockSpec poisson_clock(double gamma) {
  ClockSpec spec;
  spec.dim = 1;
  spec.hamiltonian = CMatrix::Zero(1, 1);
  spec.initial_clockwork = CMatrix::Ones(1, 1);
  spec.jumps.push_back({+1, gamma, CMatrix::Ones(1, 1)});
  return spec;
}

ClockSpec erlang_clock(int stages, double gamma) {
  if (stages < 1) fail("validation", "erlang_clock: stages must be >= 1");
  ClockSpec spec;
  spec.dim = stages;
  spec.hamiltonian = CMatrix::Zero(stages, stages);
  spec.initial_clockwork = CMatrix::Zero(stages, stages);
  spec.initial_clockwork(0, 0) = 1.0;
  for (int i = 0; i + 1 < stages; ++i) {
    CMatrix op = CMatrix::Zero(stages, stages);
    op(i + 1, i) = 1.0;
    spec.jumps.push_back({0, gamma, std::move(op)});
  }
  CMatrix hop = CMatrix::Zero(stages, stages);
  hop(0, stages - 1) = 1.0;
  spec.jumps.push_back({+1, gamma, std::move(hop)});
  return spec;
}

ClockSpec two_level_coherent_clock(double omega, double gamma) {
  ClockSpec spec;
  spec.dim = 2;
  spec.hamiltonian = CMatrix::Zero(2, 2);
  spec.hamiltonian(0, 1) = omega;
  spec.hamiltonian(1, 0) = omega;
  spec.initial_clockwork = CMatrix::Zero(2, 2);
  spec.initial_clockwork(0, 0) = 1.0;
  CMatrix decay = CMatrix::Zero(2, 2);
  decay(0, 1) = 1.0;
  spec.jumps.push_back({+1, gamma, std::move(decay)});
  return spec;
}

ClockSpec branching_clock(double tick_rate, double branch_rate, double slow_rate) {
  ClockSpec spec;
  spec.dim = 2;
  spec.hamiltonian = CMatrix::Zero(2, 2);
  spec.initial_clockwork = CMatrix::Zero(2, 2);
  spec.initial_clockwork(0, 0) = 1.0;
  CMatrix fast = CMatrix::Zero(2, 2);
  fast(0, 0) = 1.0;  // tick and stay on the fast lane
  spec.jumps.push_back({+1, tick_rate, std::move(fast)});
  CMatrix branch = CMatrix::Zero(2, 2);
  branch(1, 0) = 1.0;  // silent detour onto the slow lane
  spec.jumps.push_back({0, branch_rate, std::move(branch)});
  CMatrix ret = CMatrix::Zero(2, 2);
  ret(0, 1) = 1.0;  // slow lane ticks back onto the fast lane
  spec.jumps.push_back({+1, slow_rate, std::move(ret)});
  return spec;
}

}  // namespace tickwork
