#pragma once

#include <cstdint>

#include "qtf/statevector.hpp"

namespace qtf::qsim {

/// Parametric stand-in for hardware noise: stochastic Pauli insertion after
/// each lowered gate plus classical readout flips.
struct NoiseParams {
  double p1 = 0;    // per 1-qubit gate
  double p2 = 0;    // per 2-qubit gate
  double p_ro = 0;  // per measured bit

  void validate() const;
  bool is_zero() const { return p1 == 0 && p2 == 0 && p_ro == 0; }
};

/// Monte Carlo trajectories over a lowered (1q/2q only) circuit. Per shot:
/// after each gate, with probability p1 (p2) a uniformly random non-identity
/// Pauli hits the touched qubit(s); every measured bit flips with probability
/// p_ro. All qubits are measured, most significant leftmost. Shot i uses a
/// stream derived from (seed, i).
Counts run_noisy(const Circuit& lowered, const NoiseParams& noise,
                 std::int64_t shots, std::uint64_t seed);

}  // namespace qtf::qsim
