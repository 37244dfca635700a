#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtf/circuit.hpp"

namespace qtf::qsim {

using Amplitude = std::complex<double>;

struct StateVector {
  int n_qubits = 0;
  Eigen::VectorXcd amplitudes;

  static StateVector zero_state(int n_qubits);
  double norm_sq() const { return amplitudes.squaredNorm(); }
  std::int64_t dim() const { return amplitudes.size(); }
};

/// Applies one gate in place. Multi-controlled gates touch only amplitudes
/// with every control bit set.
void apply_gate(StateVector& state, const Gate& gate);

StateVector run_exact(const Circuit& circuit,
                      std::optional<StateVector> initial = std::nullopt);

/// Full 2^n x 2^n matrix; column c is the circuit applied to basis state |c>.
/// Capped at 12 qubits.
Eigen::MatrixXcd dense_unitary(const Circuit& circuit);

struct Counts {
  std::map<std::string, std::int64_t> histogram;
  std::int64_t total_shots = 0;
};

/// Multinomial draws from the marginal distribution on `qubits`. The first
/// listed qubit maps to the leftmost character of each bitstring key. Shot i
/// draws from an independent stream derived from (seed, i), so results do not
/// depend on any parallel schedule.
Counts sample_counts(const StateVector& state, const std::vector<int>& qubits,
                     std::int64_t shots, std::uint64_t seed);

/// Counts exported as CSV rows "bitstring,count", keys sorted.
void write_counts_csv(const Counts& counts, std::ostream& out);

/// Probability of `outcome` on `qubit` and the renormalized collapsed state.
std::pair<double, StateVector> project(const StateVector& state, int qubit,
                                       int outcome);

}  // namespace qtf::qsim
