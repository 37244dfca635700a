#include "qtf/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "qtf/errors.hpp"
#include "qtf/parallel.hpp"
#include "qtf/rng.hpp"

namespace qtf::qsim {

namespace {

using Matrix2 = Eigen::Matrix2cd;

Matrix2 single_qubit_matrix(const Gate& gate) {
  const Amplitude i(0, 1);
  Matrix2 u;
  switch (gate.kind) {
    case GateKind::H:
      u << 1, 1, 1, -1;
      u /= std::numbers::sqrt2;
      break;
    case GateKind::X:
    case GateKind::CNOT:
    case GateKind::MCX:
      u << 0, 1, 1, 0;
      break;
    case GateKind::Phase:
      u << 1, 0, 0, std::exp(i * gate.angle);
      break;
    case GateKind::RX:
    case GateKind::MCRX:
      u << std::cos(gate.angle / 2), -i * std::sin(gate.angle / 2),
          -i * std::sin(gate.angle / 2), std::cos(gate.angle / 2);
      break;
    case GateKind::RZ:
      u << std::exp(-i * (gate.angle / 2)), 0, 0, std::exp(i * (gate.angle / 2));
      break;
  }
  return u;
}

// Applies a 2x2 matrix on `target` restricted to basis states with every
// control bit set. Iterates exactly once over each affected amplitude pair by
// scattering a compact counter into the free bit positions.
void apply_controlled_2x2(Eigen::VectorXcd& amps, int n_qubits,
                          std::uint64_t control_mask, int target,
                          const Matrix2& u) {
  const std::uint64_t target_bit = std::uint64_t{1} << target;
  std::vector<int> free_bits;
  free_bits.reserve(static_cast<std::size_t>(n_qubits));
  for (int q = 0; q < n_qubits; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << q;
    if (q != target && !(control_mask & bit)) free_bits.push_back(q);
  }
  const std::int64_t pairs = std::int64_t{1}
                             << static_cast<int>(free_bits.size());
  const Amplitude u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::int64_t idx = 0; idx < pairs; ++idx) {
    std::uint64_t base = control_mask;
    std::uint64_t rest = static_cast<std::uint64_t>(idx);
    for (int q : free_bits) {
      base |= (rest & 1u) << q;
      rest >>= 1;
    }
    const std::uint64_t hi = base | target_bit;
    const Amplitude a = amps[static_cast<Eigen::Index>(base)];
    const Amplitude b = amps[static_cast<Eigen::Index>(hi)];
    amps[static_cast<Eigen::Index>(base)] = u00 * a + u01 * b;
    amps[static_cast<Eigen::Index>(hi)] = u10 * a + u11 * b;
  }
}

}  // namespace

StateVector StateVector::zero_state(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 30)
    throw CapacityError("statevector supports 1..30 qubits");
  StateVector sv;
  sv.n_qubits = n_qubits;
  sv.amplitudes = Eigen::VectorXcd::Zero(std::int64_t{1} << n_qubits);
  sv.amplitudes[0] = 1.0;
  return sv;
}

void apply_gate(StateVector& state, const Gate& gate) {
  if (gate.target < 0 || gate.target >= state.n_qubits)
    throw ValidationError("gate target out of range");
  std::uint64_t control_mask = 0;
  for (int c : gate.controls) {
    if (c < 0 || c >= state.n_qubits)
      throw ValidationError("gate control out of range");
    control_mask |= std::uint64_t{1} << c;
  }
  apply_controlled_2x2(state.amplitudes, state.n_qubits, control_mask,
                       gate.target, single_qubit_matrix(gate));
}

StateVector run_exact(const Circuit& circuit, std::optional<StateVector> initial) {
  circuit.validate();
  StateVector state = initial ? std::move(*initial)
                              : StateVector::zero_state(circuit.n_qubits);
  if (state.n_qubits != circuit.n_qubits)
    throw ValidationError("initial state size does not match circuit");
  for (const auto& gate : circuit.gates) apply_gate(state, gate);
  return state;
}

Eigen::MatrixXcd dense_unitary(const Circuit& circuit) {
  if (circuit.n_qubits > 12)
    throw CapacityError("dense_unitary limited to 12 qubits");
  circuit.validate();
  const std::int64_t dim = std::int64_t{1} << circuit.n_qubits;
  Eigen::MatrixXcd u(dim, dim);
  for (std::int64_t col = 0; col < dim; ++col) {
    StateVector sv;
    sv.n_qubits = circuit.n_qubits;
    sv.amplitudes = Eigen::VectorXcd::Zero(dim);
    sv.amplitudes[col] = 1.0;
    for (const auto& gate : circuit.gates) apply_gate(sv, gate);
    u.col(col) = sv.amplitudes;
  }
  return u;
}

Counts sample_counts(const StateVector& state, const std::vector<int>& qubits,
                     std::int64_t shots, std::uint64_t seed) {
  if (qubits.empty()) throw ValidationError("sample_counts: empty qubit set");
  if (shots < 1) throw ValidationError("sample_counts: shots must be >= 1");
  for (int q : qubits)
    if (q < 0 || q >= state.n_qubits)
      throw ValidationError("sample_counts: qubit out of range");

  const std::int64_t dim = state.dim();
  std::vector<double> cdf(static_cast<std::size_t>(dim));
  double acc = 0;
  for (std::int64_t i = 0; i < dim; ++i) {
    acc += std::norm(state.amplitudes[i]);
    cdf[static_cast<std::size_t>(i)] = acc;
  }

  std::vector<std::int64_t> sampled(static_cast<std::size_t>(shots));
  parallel_for(shots, [&](std::int64_t shot) {
    rng::Stream rs(rng::derive(seed, 0x5a3c, static_cast<std::uint64_t>(shot)));
    const double u = rs.uniform01() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    sampled[static_cast<std::size_t>(shot)] =
        std::min<std::int64_t>(it - cdf.begin(), dim - 1);
  });

  Counts counts;
  counts.total_shots = shots;
  std::string key(qubits.size(), '0');
  for (std::int64_t shot = 0; shot < shots; ++shot) {
    const std::int64_t idx = sampled[static_cast<std::size_t>(shot)];
    for (std::size_t pos = 0; pos < qubits.size(); ++pos)
      key[pos] = (idx >> qubits[pos]) & 1 ? '1' : '0';
    ++counts.histogram[key];
  }
  return counts;
}

void write_counts_csv(const Counts& counts, std::ostream& out) {
  out << "bitstring,count\n";
  for (const auto& [key, value] : counts.histogram)
    out << key << "," << value << "\n";
}

std::pair<double, StateVector> project(const StateVector& state, int qubit,
                                       int outcome) {
  if (qubit < 0 || qubit >= state.n_qubits)
    throw ValidationError("project: qubit out of range");
  if (outcome != 0 && outcome != 1)
    throw ValidationError("project: outcome must be 0 or 1");
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  double p = 0;
  for (std::int64_t i = 0; i < state.dim(); ++i)
    if (((static_cast<std::uint64_t>(i) & bit) != 0) ==
        (outcome == 1))
      p += std::norm(state.amplitudes[i]);
  if (p <= 1e-300)
    throw ValidationError("project: zero-probability branch");
  StateVector collapsed = state;
  const double scale = 1.0 / std::sqrt(p);
  for (std::int64_t i = 0; i < state.dim(); ++i) {
    if (((static_cast<std::uint64_t>(i) & bit) != 0) == (outcome == 1))
      collapsed.amplitudes[i] *= scale;
    else
      collapsed.amplitudes[i] = 0;
  }
  return {p, std::move(collapsed)};
}

}  // namespace qtf::qsim
