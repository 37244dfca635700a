#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace qtf::qsim {

enum class GateKind { H, X, CNOT, Phase, RX, RZ, MCX, MCRX };

std::string to_string(GateKind kind);
GateKind gate_kind_from_string(const std::string& name);

struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> controls;
  int target = 0;
  double angle = 0;  // radians; used by Phase/RX/RZ/MCRX

  static Gate h(int q) { return {GateKind::H, {}, q, 0}; }
  static Gate x(int q) { return {GateKind::X, {}, q, 0}; }
  static Gate cnot(int control, int target) {
    return {GateKind::CNOT, {control}, target, 0};
  }
  static Gate phase(int q, double phi) { return {GateKind::Phase, {}, q, phi}; }
  static Gate rx(int q, double theta) { return {GateKind::RX, {}, q, theta}; }
  static Gate rz(int q, double theta) { return {GateKind::RZ, {}, q, theta}; }
  static Gate mcx(std::vector<int> controls, int target) {
    return {GateKind::MCX, std::move(controls), target, 0};
  }
  static Gate mcrx(std::vector<int> controls, int target, double theta) {
    return {GateKind::MCRX, std::move(controls), target, theta};
  }

  Gate inverse() const;
  int n_qubits_touched() const {
    return static_cast<int>(controls.size()) + 1;
  }
};

/// Register map for filter circuits: [A | T | S] with the ancilla most
/// significant. Qubit 0 is the least significant bit of the basis index.
struct RegisterLayout {
  int n_system = 0;
  int time() const { return n_system; }
  int ancilla() const { return n_system + 1; }
};

struct Circuit {
  int n_qubits = 0;
  RegisterLayout layout;
  std::vector<Gate> gates;

  void validate() const;
  void append(Gate gate) { gates.push_back(std::move(gate)); }
  void append(const std::vector<Gate>& more) {
    gates.insert(gates.end(), more.begin(), more.end());
  }
  /// Reversed order, each gate replaced by its exact inverse.
  Circuit inverted() const;
};

void to_json(nlohmann::json& j, const Gate& gate);
void from_json(const nlohmann::json& j, Gate& gate);
void to_json(nlohmann::json& j, const Circuit& circuit);
void from_json(const nlohmann::json& j, Circuit& circuit);

}  // namespace qtf::qsim
