#include "qtf/dss.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "qtf/errors.hpp"

namespace qtf::dss {

using qsim::Circuit;
using qsim::Gate;
using qsim::GateKind;

void EvolutionSpec::validate() const {
  if (!(t > 0)) throw ValidationError("evolution time must be positive");
  if (n_system < 1) throw ValidationError("need at least one system qubit");
  const std::int64_t dim =
      n_system >= 62 ? std::int64_t{1} << 62 : std::int64_t{1} << n_system;
  for (const auto& [i, j] : couplings) {
    if (i == j) throw ValidationError("coupling must connect distinct states");
    if (i < 0 || j < 0 || i >= dim || j >= dim)
      throw ValidationError("coupling index exceeds 2^n_system");
  }
}

EvolutionSpec EvolutionSpec::from_system(
    const hamiltonian::TrackingSystem& system, double t) {
  EvolutionSpec spec;
  spec.t = t;
  spec.phi = -system.diag_c() * t;
  int n_s = 1;
  while ((1 << n_s) < system.N) ++n_s;
  spec.n_system = n_s;
  spec.couplings.reserve(system.couplings.size());
  for (const auto& c : system.couplings) spec.couplings.emplace_back(c.i, c.j);
  std::sort(spec.couplings.begin(), spec.couplings.end());
  spec.validate();
  return spec;
}

std::vector<Gate> synthesize_interaction_gate(
    int i, int j, double t, const qsim::RegisterLayout& layout) {
  if (i == j) throw ValidationError("interaction gate needs i != j");
  const int n_s = layout.n_system;
  const std::int64_t dim =
      n_s >= 62 ? std::int64_t{1} << 62 : std::int64_t{1} << n_s;
  if (i < 0 || j < 0 || i >= dim || j >= dim)
    throw ValidationError("interaction gate index out of range");

  const unsigned diff = static_cast<unsigned>(i ^ j);
  const int pivot = std::countr_zero(diff);

  std::vector<Gate> gates;

  // CNOT ladder: fold every other differing bit onto the pivot, highest
  // differing bit first.
  std::vector<int> ladder;
  for (int b = n_s - 1; b >= 0; --b)
    if (b != pivot && ((diff >> b) & 1u)) ladder.push_back(b);
  for (int b : ladder) gates.push_back(Gate::cnot(pivot, b));

  // After the ladder both states share the same non-pivot pattern; X-conjugate
  // the zeros so the multi-controlled rotation can demand all-ones.
  const int i_pivot = (i >> pivot) & 1;
  std::vector<int> flipped;
  for (int b = 0; b < n_s; ++b) {
    if (b == pivot) continue;
    const int required =
        ((diff >> b) & 1u) ? (((i >> b) & 1) ^ i_pivot) : ((i >> b) & 1);
    if (required == 0) flipped.push_back(b);
  }
  for (int b : flipped) gates.push_back(Gate::x(b));

  std::vector<int> controls;
  for (int b = 0; b < n_s; ++b)
    if (b != pivot) controls.push_back(b);
  controls.push_back(layout.time());
  gates.push_back(Gate::mcrx(controls, pivot, -2.0 * t));

  for (auto it = flipped.rbegin(); it != flipped.rend(); ++it)
    gates.push_back(Gate::x(*it));
  for (auto it = ladder.rbegin(); it != ladder.rend(); ++it)
    gates.push_back(Gate::cnot(pivot, *it));
  return gates;
}

Circuit synthesize_controlled_evolution(const EvolutionSpec& spec) {
  spec.validate();
  Circuit fragment;
  fragment.layout.n_system = spec.n_system;
  fragment.n_qubits = spec.n_system + 1;
  fragment.append(Gate::phase(fragment.layout.time(), spec.phi));
  auto couplings = spec.couplings;
  std::sort(couplings.begin(), couplings.end());
  for (const auto& [i, j] : couplings)
    fragment.append(synthesize_interaction_gate(i, j, spec.t, fragment.layout));
  return fragment;
}

Circuit invert_fragment(const Circuit& fragment) { return fragment.inverted(); }

namespace {

using GateSink = std::function<void(const Gate&)>;

// Exact Toffoli over six CNOTs with PHASE(+-pi/4) phase corrections.
void emit_ccx(int a, int b, int t, const GateSink& sink) {
  const double quarter = std::numbers::pi / 4;
  sink(Gate::h(t));
  sink(Gate::cnot(b, t));
  sink(Gate::phase(t, -quarter));
  sink(Gate::cnot(a, t));
  sink(Gate::phase(t, quarter));
  sink(Gate::cnot(b, t));
  sink(Gate::phase(t, -quarter));
  sink(Gate::cnot(a, t));
  sink(Gate::phase(b, quarter));
  sink(Gate::phase(t, quarter));
  sink(Gate::h(t));
  sink(Gate::cnot(a, b));
  sink(Gate::phase(a, quarter));
  sink(Gate::phase(b, -quarter));
  sink(Gate::cnot(a, b));
}

// Toffoli ladder with m-2 borrowed (possibly dirty) qubits; 4(m-2) Toffolis,
// every borrowed qubit restored.
void emit_mcx_ladder(const std::vector<int>& controls, int target,
                     const std::vector<int>& borrowed, const GateSink& sink) {
  const int m = static_cast<int>(controls.size());
  auto toffoli_at = [&](int k) {
    // k in [2, m): CCX(controls[k], borrowed[k-2], next), next = target at the
    // top of the ladder.
    const int next = (k == m - 1) ? target : borrowed[static_cast<std::size_t>(k - 1)];
    emit_ccx(controls[static_cast<std::size_t>(k)],
             borrowed[static_cast<std::size_t>(k - 2)], next, sink);
  };
  auto one_pass = [&] {
    for (int k = m - 1; k >= 2; --k) toffoli_at(k);
    emit_ccx(controls[0], controls[1], borrowed[0], sink);
    for (int k = 2; k <= m - 2; ++k) toffoli_at(k);
  };
  one_pass();
  one_pass();
}

void emit_mcx(std::vector<int> controls, int target, std::vector<int> free,
              const GateSink& sink) {
  const int m = static_cast<int>(controls.size());
  if (m == 0) {
    sink(Gate::x(target));
    return;
  }
  if (m == 1) {
    sink(Gate::cnot(controls[0], target));
    return;
  }
  if (m == 2) {
    emit_ccx(controls[0], controls[1], target, sink);
    return;
  }
  if (static_cast<int>(free.size()) >= m - 2) {
    free.resize(static_cast<std::size_t>(m - 2));
    emit_mcx_ladder(controls, target, free, sink);
    return;
  }
  if (free.empty())
    throw ValidationError(
        "MCX lowering needs one idle qubit to borrow and none is available");

  // Split through the borrowed qubit; each half then has enough dirty
  // ancillas from the opposite half.
  const int borrow = free[0];
  const int m1 = (m + 1) / 2;
  std::vector<int> first(controls.begin(), controls.begin() + m1);
  std::vector<int> second(controls.begin() + m1, controls.end());
  std::vector<int> second_plus = second;
  second_plus.push_back(borrow);
  std::vector<int> free_for_first = second;
  free_for_first.push_back(target);
  for (int rep = 0; rep < 2; ++rep) {
    emit_mcx(second_plus, target, first, sink);
    emit_mcx(first, borrow, free_for_first, sink);
  }
}

void lower_gate(const Gate& gate, int n_qubits, const GateSink& sink) {
  switch (gate.kind) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::Phase:
    case GateKind::RX:
    case GateKind::RZ:
      if (!gate.controls.empty())
        throw ValidationError("lowering does not support controls on " +
                              to_string(gate.kind));
      sink(gate);
      return;
    case GateKind::CNOT:
      sink(gate);
      return;
    case GateKind::MCX:
    case GateKind::MCRX:
      break;
  }

  std::vector<bool> busy(static_cast<std::size_t>(n_qubits), false);
  busy[static_cast<std::size_t>(gate.target)] = true;
  for (int c : gate.controls) busy[static_cast<std::size_t>(c)] = true;
  std::vector<int> free;
  for (int q = n_qubits - 1; q >= 0; --q)
    if (!busy[static_cast<std::size_t>(q)]) free.push_back(q);

  if (gate.kind == GateKind::MCX) {
    emit_mcx(gate.controls, gate.target, free, sink);
    return;
  }
  // MCRX: rotate the target into the Z basis, then kick the phase through two
  // MCX applications.
  const int t = gate.target;
  sink(Gate::h(t));
  emit_mcx(gate.controls, t, free, sink);
  sink(Gate::rz(t, -gate.angle / 2));
  emit_mcx(gate.controls, t, free, sink);
  sink(Gate::rz(t, gate.angle / 2));
  sink(Gate::h(t));
}

std::int64_t chain_distance(const Gate& gate) {
  if (gate.n_qubits_touched() != 2) return 0;
  return std::abs(gate.controls[0] - gate.target);
}

}  // namespace

std::int64_t linear_chain_charge(const Gate& gate) {
  const std::int64_t d = chain_distance(gate);
  return d == 0 ? 0 : 1 + 3 * (d - 1);
}

std::pair<Circuit, SynthesisReport> lower_and_count(const Circuit& circuit,
                                                    Topology topology) {
  circuit.validate();
  Circuit lowered;
  lowered.n_qubits = circuit.n_qubits;
  lowered.layout = circuit.layout;
  SynthesisReport report;
  report.topology = topology;
  report.ir_gate_count = static_cast<std::int64_t>(circuit.gates.size());
  GateSink sink = [&](const Gate& g) {
    lowered.append(g);
    if (g.n_qubits_touched() == 2) {
      ++report.lowered_2q_count;
      report.two_q_charged += topology == Topology::all_to_all
                                  ? 1
                                  : linear_chain_charge(g);
    } else {
      ++report.lowered_1q_count;
    }
  };
  for (const auto& gate : circuit.gates)
    lower_gate(gate, circuit.n_qubits, sink);
  return {std::move(lowered), report};
}

SynthesisReport count_lowered(const Circuit& circuit, Topology topology) {
  circuit.validate();
  SynthesisReport report;
  report.topology = topology;
  report.ir_gate_count = static_cast<std::int64_t>(circuit.gates.size());
  GateSink sink = [&](const Gate& g) {
    if (g.n_qubits_touched() == 2) {
      ++report.lowered_2q_count;
      report.two_q_charged += topology == Topology::all_to_all
                                  ? 1
                                  : linear_chain_charge(g);
    } else {
      ++report.lowered_1q_count;
    }
  };
  for (const auto& gate : circuit.gates)
    lower_gate(gate, circuit.n_qubits, sink);
  return report;
}

void annotate_report(SynthesisReport& report, const EvolutionSpec& spec) {
  int max_dh = 0;
  std::map<int, int> degree;
  for (const auto& [i, j] : spec.couplings) {
    max_dh = std::max(max_dh,
                      std::popcount(static_cast<unsigned>(i ^ j)));
    ++degree[i];
    ++degree[j];
  }
  std::int64_t overlapping_pairs = 0;
  for (const auto& [state, d] : degree)
    overlapping_pairs += static_cast<std::int64_t>(d) * (d - 1) / 2;
  report.max_hamming_distance = max_dh;
  report.trotter_error_bound =
      0.5 * spec.t * spec.t * static_cast<double>(overlapping_pairs);
}

void to_json(nlohmann::json& j, const SynthesisReport& report) {
  j = {{"ir_gate_count", report.ir_gate_count},
       {"lowered_1q_count", report.lowered_1q_count},
       {"lowered_2q_count", report.lowered_2q_count},
       {"two_q_charged", report.two_q_charged},
       {"topology", report.topology == Topology::all_to_all ? "all_to_all"
                                                            : "linear_chain"},
       {"max_hamming_distance", report.max_hamming_distance},
       {"trotter_error_bound", report.trotter_error_bound}};
}

}  // namespace qtf::dss
