#include "qtf/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qtf/errors.hpp"

namespace qtf::qsim {

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::CNOT: return "CNOT";
    case GateKind::Phase: return "PHASE";
    case GateKind::RX: return "RX";
    case GateKind::RZ: return "RZ";
    case GateKind::MCX: return "MCX";
    case GateKind::MCRX: return "MCRX";
  }
  return "?";
}

GateKind gate_kind_from_string(const std::string& name) {
  if (name == "H") return GateKind::H;
  if (name == "X") return GateKind::X;
  if (name == "CNOT") return GateKind::CNOT;
  if (name == "PHASE") return GateKind::Phase;
  if (name == "RX") return GateKind::RX;
  if (name == "RZ") return GateKind::RZ;
  if (name == "MCX") return GateKind::MCX;
  if (name == "MCRX") return GateKind::MCRX;
  throw ValidationError("unknown gate kind: " + name);
}

Gate Gate::inverse() const {
  Gate inv = *this;
  switch (kind) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::CNOT:
    case GateKind::MCX:
      break;  // self-inverse
    case GateKind::Phase:
    case GateKind::RX:
    case GateKind::RZ:
    case GateKind::MCRX:
      inv.angle = -angle;
      break;
  }
  return inv;
}

void Circuit::validate() const {
  if (n_qubits < 1) throw ValidationError("circuit needs at least 1 qubit");
  for (const auto& g : gates) {
    if (g.target < 0 || g.target >= n_qubits)
      throw ValidationError("gate target out of range");
    std::set<int> qubits{g.target};
    for (int c : g.controls) {
      if (c < 0 || c >= n_qubits)
        throw ValidationError("gate control out of range");
      if (!qubits.insert(c).second)
        throw ValidationError("gate controls must be disjoint from target");
    }
    if (!std::isfinite(g.angle))
      throw ValidationError("gate angle must be finite");
    if (g.kind == GateKind::CNOT && g.controls.size() != 1)
      throw ValidationError("CNOT takes exactly one control");
  }
}

Circuit Circuit::inverted() const {
  Circuit inv;
  inv.n_qubits = n_qubits;
  inv.layout = layout;
  inv.gates.reserve(gates.size());
  for (auto it = gates.rbegin(); it != gates.rend(); ++it)
    inv.gates.push_back(it->inverse());
  return inv;
}

void to_json(nlohmann::json& j, const Gate& gate) {
  j = {{"kind", to_string(gate.kind)},
       {"controls", gate.controls},
       {"target", gate.target},
       {"angle", gate.angle}};
}

void from_json(const nlohmann::json& j, Gate& gate) {
  gate.kind = gate_kind_from_string(j.at("kind").get<std::string>());
  gate.controls = j.at("controls").get<std::vector<int>>();
  gate.target = j.at("target").get<int>();
  gate.angle = j.value("angle", 0.0);
}

void to_json(nlohmann::json& j, const Circuit& circuit) {
  j = {{"n_qubits", circuit.n_qubits},
       {"n_system", circuit.layout.n_system},
       {"gates", circuit.gates}};
}

void from_json(const nlohmann::json& j, Circuit& circuit) {
  circuit.n_qubits = j.at("n_qubits").get<int>();
  circuit.layout.n_system = j.value("n_system", 0);
  circuit.gates = j.at("gates").get<std::vector<Gate>>();
  circuit.validate();
}

}  // namespace qtf::qsim
