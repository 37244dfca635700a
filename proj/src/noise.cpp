#include "qtf/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qtf/errors.hpp"
#include "qtf/parallel.hpp"
#include "qtf/rng.hpp"

namespace qtf::qsim {

namespace {

// Pauli index: 0 = X, 1 = Y, 2 = Z.
void apply_pauli(StateVector& state, int qubit, int pauli) {
  Gate g;
  g.target = qubit;
  switch (pauli) {
    case 0:
      g.kind = GateKind::X;
      apply_gate(state, g);
      return;
    case 1: {
      // Y = i X Z applied directly as a 2x2 kernel via RX(pi) up to phase is
      // not exact; do it explicitly.
      const std::uint64_t bit = std::uint64_t{1} << qubit;
      const Amplitude i(0, 1);
      for (std::int64_t k = 0; k < state.dim(); ++k) {
        if (static_cast<std::uint64_t>(k) & bit) continue;
        const auto lo = static_cast<Eigen::Index>(k);
        const auto hi = static_cast<Eigen::Index>(k | static_cast<std::int64_t>(bit));
        const Amplitude a = state.amplitudes[lo];
        const Amplitude b = state.amplitudes[hi];
        state.amplitudes[lo] = -i * b;
        state.amplitudes[hi] = i * a;
      }
      return;
    }
    case 2:
      g.kind = GateKind::Phase;
      g.angle = std::numbers::pi;
      apply_gate(state, g);
      return;
    default:
      throw ValidationError("bad pauli index");
  }
}

}  // namespace

void NoiseParams::validate() const {
  auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!ok(p1) || !ok(p2) || !ok(p_ro))
    throw ValidationError("noise probabilities must lie in [0, 1]");
}

Counts run_noisy(const Circuit& lowered, const NoiseParams& noise,
                 std::int64_t shots, std::uint64_t seed) {
  noise.validate();
  lowered.validate();
  if (shots < 1) throw ValidationError("run_noisy: shots must be >= 1");
  if (lowered.n_qubits > 16)
    throw CapacityError("run_noisy limited to 16 qubits");
  for (const auto& g : lowered.gates)
    if (g.n_qubits_touched() > 2)
      throw ValidationError("run_noisy requires a lowered 1q/2q circuit");

  const int n = lowered.n_qubits;
  std::vector<std::int64_t> outcomes(static_cast<std::size_t>(shots));

  parallel_for(shots, [&](std::int64_t shot) {
    rng::Stream rs(rng::derive(seed, 0x707a, static_cast<std::uint64_t>(shot)));
    StateVector state = StateVector::zero_state(n);
    for (const auto& gate : lowered.gates) {
      apply_gate(state, gate);
      const bool two_qubit = gate.n_qubits_touched() == 2;
      const double p_err = two_qubit ? noise.p2 : noise.p1;
      const double draw = rs.uniform01();
      if (draw < p_err) {
        if (two_qubit) {
          // 15 non-identity two-qubit Paulis.
          const int idx = static_cast<int>(rs.below(15)) + 1;
          const int pa = idx / 4;
          const int pb = idx % 4;
          if (pa > 0) apply_pauli(state, gate.controls[0], pa - 1);
          if (pb > 0) apply_pauli(state, gate.target, pb - 1);
        } else {
          apply_pauli(state, gate.target, static_cast<int>(rs.below(3)));
        }
      }
    }
    // Measure all qubits, then readout flips.
    double acc = 0;
    const double u = rs.uniform01();
    std::int64_t idx = state.dim() - 1;
    for (std::int64_t k = 0; k < state.dim(); ++k) {
      acc += std::norm(state.amplitudes[k]);
      if (u < acc) {
        idx = k;
        break;
      }
    }
    if (noise.p_ro > 0) {
      for (int q = 0; q < n; ++q)
        if (rs.uniform01() < noise.p_ro) idx ^= std::int64_t{1} << q;
    }
    outcomes[static_cast<std::size_t>(shot)] = idx;
  });

  Counts counts;
  counts.total_shots = shots;
  std::string key(static_cast<std::size_t>(n), '0');
  for (std::int64_t shot = 0; shot < shots; ++shot) {
    const std::int64_t idx = outcomes[static_cast<std::size_t>(shot)];
    for (int q = 0; q < n; ++q)
      key[static_cast<std::size_t>(n - 1 - q)] = (idx >> q) & 1 ? '1' : '0';
    ++counts.histogram[key];
  }
  return counts;
}

}  // namespace qtf::qsim
