#pragma once

#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include "json.hpp"
#include "qtf/dss.hpp"
#include "qtf/hamiltonian.hpp"
#include "qtf/noise.hpp"

namespace qtf::filter {

/// Evolution time is tied to the central (noise) eigenvalue: t * lambda_c = pi
/// exactly, so isolated segments land on cos^2(pi/2) = 0.
struct FilterConfig {
  double lambda_c = 3.0;
  double selection_tau = 0.25;  // relative acceptance threshold in (0, 1]
  std::int64_t shots = 100000;
  int qubit_cap = 24;

  double t() const { return std::numbers::pi / lambda_c; }
  void validate() const;
  static FilterConfig for_system(const hamiltonian::TrackingSystem& system) {
    FilterConfig c;
    c.lambda_c = system.diag_c();
    return c;
  }
};

struct FilterResult {
  double p_succ = 0;
  /// System-register distribution conditioned on ancilla = 1, time register
  /// marginalized. Keys are system basis states; ids >= N are padding and
  /// carry mass only under noise.
  std::map<int, double> post_dist;
  std::set<int> accepted_segments;
  std::int64_t shots_used = 0;
  bool empty_result = false;  // no post-selected support (noise-only systems)
  double p_t1_given_a1 = 0;   // diagnostic: time register is not exactly restored
};

/// Registers [A | T | S], n_s = ceil(log2 N). Hadamards on S and T, the
/// controlled evolution fragment, a Hadamard as 1-bit inverse QFT, the
/// zero-controlled ancilla flip, then the exact inverse of the estimation
/// block. Basis states >= N behave as isolated segments and are filtered.
qsim::Circuit build_filter_circuit(const hamiltonian::TrackingSystem& system,
                                   const FilterConfig& config);

FilterResult run_exact_filter(const hamiltonian::TrackingSystem& system,
                              const FilterConfig& config);

/// Multinomial sampling of the exact state, or stochastic Pauli trajectories
/// over the lowered circuit when noise parameters are given.
FilterResult run_sampled_filter(const hamiltonian::TrackingSystem& system,
                                const FilterConfig& config,
                                const std::optional<qsim::NoiseParams>& noise,
                                std::uint64_t seed);

/// Accepts segment ids (< N) whose probability reaches tau * max.
std::set<int> select_segments(const FilterResult& result, double tau, int n_segments);

/// Squared Bhattacharyya overlap of two distributions over the same outcome
/// space. Inputs must each sum to 1 within 1e-6.
double hellinger_fidelity(const std::map<int, double>& p_exp,
                          const std::map<int, double>& p_ideal);

/// Mass on the valid segments over the mass of the equally many
/// largest-probability invalid segments. Returns +infinity when the
/// denominator vanishes.
double signal_separation_index(const std::map<int, double>& post_dist,
                               const std::set<int>& valid_segments,
                               int n_segments);

struct CollectReport {
  std::int64_t shots_used = 0;
  bool completed = false;
  int distinct_seen = 0;
  int distinct_required = 0;
};

/// Samples single circuit executions until every target segment has shown up
/// in a post-selected outcome, or the cap is reached. Targets default to the
/// coupled segments of the system.
CollectReport collect_until_complete(
    const hamiltonian::TrackingSystem& system, const FilterConfig& config,
    std::uint64_t seed, std::int64_t cap,
    const std::optional<std::set<int>>& targets = std::nullopt);

void to_json(nlohmann::json& j, const FilterResult& result);

}  // namespace qtf::filter
