#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qtf/circuit.hpp"
#include "qtf/hamiltonian.hpp"

namespace qtf::dss {

/// Controlled time evolution C(e^{-iAt}) of A = c I - B, split into a phase
/// gate on the control (diagonal part) and one exact two-level interaction
/// gate per coupling (off-diagonal part).
struct EvolutionSpec {
  double t = 0;    // evolution time
  double phi = 0;  // diagonal phase, -c * t
  std::vector<std::pair<int, int>> couplings;  // basis-state index pairs
  int n_system = 0;

  void validate() const;
  static EvolutionSpec from_system(const hamiltonian::TrackingSystem& system,
                                   double t);
};

/// Exact two-level gate: controlled on the time qubit, applies
/// exp(+i t sigma_x) on span{|i>, |j>} of the system register and identity
/// elsewhere. CNOT ladder onto the lowest differing bit (the pivot),
/// X-conjugation so all controls demand |1>, one multi-controlled RX(-2t),
/// then exact uncomputation.
std::vector<qsim::Gate> synthesize_interaction_gate(
    int i, int j, double t, const qsim::RegisterLayout& layout);

/// PHASE(phi) on the time qubit followed by the interaction gates in
/// ascending (i, j) order. Fragment spans n_system + 1 qubits (system plus
/// time); a containing circuit may add more.
qsim::Circuit synthesize_controlled_evolution(const EvolutionSpec& spec);

qsim::Circuit invert_fragment(const qsim::Circuit& fragment);

enum class Topology { all_to_all, linear_chain };

struct SynthesisReport {
  std::int64_t ir_gate_count = 0;
  std::int64_t lowered_1q_count = 0;
  std::int64_t lowered_2q_count = 0;
  /// 2q cost charged under the requested topology. all_to_all counts gates;
  /// linear_chain adds 3 CNOT-equivalents per unit qubit distance beyond
  /// nearest neighbor (routing estimate, qubits placed in layout order).
  std::int64_t two_q_charged = 0;
  Topology topology = Topology::all_to_all;
  int max_hamming_distance = 0;
  double trotter_error_bound = 0;  // (t^2 / 2) * #overlapping coupling pairs
};

/// Lowers multi-controlled gates to 1q/2q gates. MCRX goes through a
/// phase-kick sandwich (H, RZ/MCX/RZ/MCX, H); MCX with three or more controls
/// borrows one idle, possibly dirty, qubit so the 2q count stays linear in
/// the control count. Throws when a borrow is needed and no qubit is idle.
std::pair<qsim::Circuit, SynthesisReport> lower_and_count(
    const qsim::Circuit& circuit, Topology topology);

/// Counting-only variant; no lowered circuit is materialized.
SynthesisReport count_lowered(const qsim::Circuit& circuit, Topology topology);

/// Fills the spec-level report fields (Hamming distance, Trotter bound) that
/// cannot be recovered from an already-synthesized circuit.
void annotate_report(SynthesisReport& report, const EvolutionSpec& spec);

std::int64_t linear_chain_charge(const qsim::Gate& gate);

void to_json(nlohmann::json& j, const SynthesisReport& report);

}  // namespace qtf::dss
