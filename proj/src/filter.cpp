#include "qtf/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qtf/errors.hpp"
#include "qtf/rng.hpp"
#include "qtf/statevector.hpp"

namespace qtf::filter {

using qsim::Circuit;
using qsim::Gate;

void FilterConfig::validate() const {
  if (!(lambda_c > 0)) throw ValidationError("lambda_c must be positive");
  if (!(selection_tau > 0) || selection_tau > 1)
    throw ValidationError("selection_tau must lie in (0, 1]");
  if (shots < 1) throw ValidationError("shots must be >= 1");
}

Circuit build_filter_circuit(const hamiltonian::TrackingSystem& system,
                             const FilterConfig& config) {
  config.validate();
  if (system.N < 2) throw ValidationError("filter needs N >= 2 segments");

  auto spec = dss::EvolutionSpec::from_system(system, config.t());
  const int n_s = spec.n_system;

  Circuit circuit;
  circuit.layout.n_system = n_s;
  circuit.n_qubits = n_s + 2;
  const int time = circuit.layout.time();
  const int ancilla = circuit.layout.ancilla();

  // Step 1: |b> on the system register, superposition on the time register.
  for (int q = 0; q < n_s; ++q) circuit.append(Gate::h(q));
  circuit.append(Gate::h(time));

  // Step 2: controlled evolution plus 1-bit inverse QFT.
  const Circuit fragment = dss::synthesize_controlled_evolution(spec);
  circuit.append(fragment.gates);
  circuit.append(Gate::h(time));

  // Step 3: zero-controlled flip of the ancilla.
  circuit.append(Gate::x(time));
  circuit.append(Gate::cnot(time, ancilla));
  circuit.append(Gate::x(time));

  // Step 4: exact inverse of the estimation block.
  circuit.append(Gate::h(time));
  circuit.append(dss::invert_fragment(fragment).gates);
  circuit.append(Gate::h(time));
  return circuit;
}

namespace {

constexpr double kEmptyThreshold = 1e-12;

FilterResult finalize_selection(FilterResult result, const FilterConfig& config,
                                int n_segments) {
  if (!result.empty_result)
    result.accepted_segments =
        select_segments(result, config.selection_tau, n_segments);
  return result;
}

}  // namespace

FilterResult run_exact_filter(const hamiltonian::TrackingSystem& system,
                              const FilterConfig& config) {
  const Circuit circuit = build_filter_circuit(system, config);
  if (circuit.n_qubits > config.qubit_cap)
    throw CapacityError("filter needs " + std::to_string(circuit.n_qubits) +
                        " qubits; cap is " + std::to_string(config.qubit_cap));
  const auto state = qsim::run_exact(circuit);

  const int n_s = circuit.layout.n_system;
  const std::int64_t system_dim = std::int64_t{1} << n_s;
  const std::uint64_t ancilla_bit = std::uint64_t{1} << circuit.layout.ancilla();
  const std::uint64_t time_bit = std::uint64_t{1} << circuit.layout.time();

  FilterResult result;
  double p_t1 = 0;
  std::vector<double> post(static_cast<std::size_t>(system_dim), 0.0);
  for (std::int64_t idx = 0; idx < state.dim(); ++idx) {
    const auto bits = static_cast<std::uint64_t>(idx);
    if (!(bits & ancilla_bit)) continue;
    const double w = std::norm(state.amplitudes[idx]);
    result.p_succ += w;
    post[static_cast<std::size_t>(idx & (system_dim - 1))] += w;
    if (bits & time_bit) p_t1 += w;
  }

  if (result.p_succ < kEmptyThreshold) {
    result.empty_result = true;
    return result;
  }
  result.p_t1_given_a1 = p_t1 / result.p_succ;
  for (std::int64_t s = 0; s < system_dim; ++s) {
    const double p = post[static_cast<std::size_t>(s)] / result.p_succ;
    if (p > 0) result.post_dist[static_cast<int>(s)] = p;
  }
  return finalize_selection(std::move(result), config, system.N);
}

FilterResult run_sampled_filter(const hamiltonian::TrackingSystem& system,
                                const FilterConfig& config,
                                const std::optional<qsim::NoiseParams>& noise,
                                std::uint64_t seed) {
  const Circuit circuit = build_filter_circuit(system, config);
  if (circuit.n_qubits > config.qubit_cap)
    throw CapacityError("filter needs " + std::to_string(circuit.n_qubits) +
                        " qubits; cap is " + std::to_string(config.qubit_cap));
  const int n_s = circuit.layout.n_system;

  qsim::Counts counts;
  if (noise && !noise->is_zero()) {
    auto [lowered, report] =
        dss::lower_and_count(circuit, dss::Topology::all_to_all);
    counts = qsim::run_noisy(lowered, *noise, config.shots, seed);
  } else {
    const auto state = qsim::run_exact(circuit);
    std::vector<int> qubits;  // descending: bitstring equals the index, MSB left
    for (int q = circuit.n_qubits - 1; q >= 0; --q) qubits.push_back(q);
    counts = qsim::sample_counts(state, qubits, config.shots, seed);
  }

  FilterResult result;
  result.shots_used = config.shots;
  std::int64_t successes = 0;
  std::map<int, std::int64_t> post_counts;
  for (const auto& [bits, count] : counts.histogram) {
    // bits: [A][T][S_{n_s-1} .. S_0]
    if (bits[0] != '1') continue;
    successes += count;
    int seg = 0;
    for (int b = 0; b < n_s; ++b)
      seg = (seg << 1) | (bits[static_cast<std::size_t>(2 + b)] == '1');
    post_counts[seg] += count;
  }
  result.p_succ = static_cast<double>(successes) /
                  static_cast<double>(config.shots);
  if (successes == 0) {
    result.empty_result = true;
    return result;
  }
  for (const auto& [seg, count] : post_counts)
    result.post_dist[seg] =
        static_cast<double>(count) / static_cast<double>(successes);
  return finalize_selection(std::move(result), config, system.N);
}

std::set<int> select_segments(const FilterResult& result, double tau,
                              int n_segments) {
  if (result.post_dist.empty())
    throw ValidationError("select_segments: empty distribution");
  double max_p = 0;
  for (const auto& [seg, p] : result.post_dist)
    if (seg < n_segments) max_p = std::max(max_p, p);
  std::set<int> accepted;
  for (const auto& [seg, p] : result.post_dist)
    if (seg < n_segments && p >= tau * max_p) accepted.insert(seg);
  return accepted;
}

double hellinger_fidelity(const std::map<int, double>& p_exp,
                          const std::map<int, double>& p_ideal) {
  auto total = [](const std::map<int, double>& d) {
    double s = 0;
    for (const auto& [k, v] : d) s += v;
    return s;
  };
  if (std::abs(total(p_exp) - 1.0) > 1e-6 ||
      std::abs(total(p_ideal) - 1.0) > 1e-6)
    throw ValidationError("hellinger_fidelity: inputs must be normalized");
  double overlap = 0;
  for (const auto& [k, p] : p_exp) {
    const auto it = p_ideal.find(k);
    if (it != p_ideal.end() && p > 0 && it->second > 0)
      overlap += std::sqrt(p * it->second);
  }
  return overlap * overlap;
}

double signal_separation_index(const std::map<int, double>& post_dist,
                               const std::set<int>& valid_segments,
                               int n_segments) {
  double signal_mass = 0;
  std::vector<double> noise_masses;
  for (const auto& [seg, p] : post_dist) {
    if (seg >= n_segments) continue;  // padding states are not segments
    if (valid_segments.count(seg))
      signal_mass += p;
    else
      noise_masses.push_back(p);
  }
  std::sort(noise_masses.rbegin(), noise_masses.rend());
  double noise_mass = 0;
  const std::size_t m = valid_segments.size();
  for (std::size_t i = 0; i < noise_masses.size() && i < m; ++i)
    noise_mass += noise_masses[i];
  if (noise_mass < 1e-12) return std::numeric_limits<double>::infinity();
  return signal_mass / noise_mass;
}

CollectReport collect_until_complete(
    const hamiltonian::TrackingSystem& system, const FilterConfig& config,
    std::uint64_t seed, std::int64_t cap,
    const std::optional<std::set<int>>& targets) {
  std::set<int> required;
  if (targets) {
    required = *targets;
  } else {
    const auto coupled = system.coupled_segments();
    required.insert(coupled.begin(), coupled.end());
  }
  if (required.empty())
    throw ValidationError("collect_until_complete: no valid segments");

  const Circuit circuit = build_filter_circuit(system, config);
  if (circuit.n_qubits > config.qubit_cap)
    throw CapacityError("filter exceeds qubit cap");
  const auto state = qsim::run_exact(circuit);
  const int n_s = circuit.layout.n_system;
  const std::uint64_t ancilla_bit = std::uint64_t{1} << circuit.layout.ancilla();
  const std::int64_t system_mask = (std::int64_t{1} << n_s) - 1;

  std::vector<double> cdf(static_cast<std::size_t>(state.dim()));
  double acc = 0;
  for (std::int64_t i = 0; i < state.dim(); ++i) {
    acc += std::norm(state.amplitudes[i]);
    cdf[static_cast<std::size_t>(i)] = acc;
  }

  CollectReport report;
  report.distinct_required = static_cast<int>(required.size());
  std::set<int> seen;
  while (report.shots_used < cap) {
    rng::Stream rs(rng::derive(seed, 0xc011,
                               static_cast<std::uint64_t>(report.shots_used)));
    ++report.shots_used;
    const double u = rs.uniform01() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::int64_t idx =
        std::min<std::int64_t>(it - cdf.begin(), state.dim() - 1);
    if (!(static_cast<std::uint64_t>(idx) & ancilla_bit)) continue;
    const int seg = static_cast<int>(idx & system_mask);
    if (required.count(seg)) seen.insert(seg);
    if (static_cast<int>(seen.size()) == report.distinct_required) {
      report.completed = true;
      break;
    }
  }
  report.distinct_seen = static_cast<int>(seen.size());
  return report;
}

void to_json(nlohmann::json& j, const FilterResult& result) {
  j = nlohmann::json::object();
  j["p_succ"] = result.p_succ;
  auto dist = nlohmann::json::object();
  for (const auto& [seg, p] : result.post_dist)
    dist[std::to_string(seg)] = p;
  j["post_dist"] = dist;
  j["accepted"] = result.accepted_segments;
  j["shots_used"] = result.shots_used;
  j["empty"] = result.empty_result;
  j["p_t1_given_a1"] = result.p_t1_given_a1;
}

}  // namespace qtf::filter
