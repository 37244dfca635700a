#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "json.hpp"
#include "qtf/errors.hpp"
#include "qtf/filter.hpp"
#include "qtf/rng.hpp"
#include "reference.hpp"

using namespace qtf;
using namespace qtf::filter;
using hamiltonian::Coupling;
using hamiltonian::Segment;
using hamiltonian::TrackingSystem;

namespace {

Segment stub_segment(int id) {
  Segment s;
  s.seg_id = id;
  s.from_hit = 2 * id;
  s.to_hit = 2 * id + 1;
  s.direction = Eigen::Vector3d(0, 0, 1);
  return s;
}

TrackingSystem synthetic_system(int n, std::vector<std::pair<int, int>> couplings) {
  std::vector<Segment> segments;
  for (int i = 0; i < n; ++i) segments.push_back(stub_segment(i));
  std::vector<Coupling> cs;
  for (const auto& [i, j] : couplings) cs.push_back({i, j, 1.0});
  return hamiltonian::assemble_system(std::move(segments), std::move(cs), 2.0,
                                      1.0, 1e-6);
}

TrackingSystem event_system(int tracks, int layers, std::uint64_t seed = 21) {
  toysim::GenConfig config;
  config.tracks_per_vertex = tracks;
  config.seed = seed;
  const auto event = toysim::generate_event(
      config, toysim::DetectorGeometry::uniform(layers));
  auto segments = hamiltonian::build_candidate_segments(event);
  auto couplings = hamiltonian::build_couplings(segments, 1e-12);
  return hamiltonian::assemble_system(std::move(segments), std::move(couplings),
                                      2.0, 1.0, 1e-12);
}

double total_variation(const std::map<int, double>& a,
                       const std::map<int, double>& b) {
  double tv = 0;
  std::set<int> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  for (int k : keys) {
    const double pa = a.count(k) ? a.at(k) : 0.0;
    const double pb = b.count(k) ? b.at(k) : 0.0;
    tv += std::abs(pa - pb);
  }
  return 0.5 * tv;
}

}  // namespace

TEST_CASE("filter circuit shape and register budget") {
  const auto minimal = event_system(1, 3);
  const auto config = FilterConfig::for_system(minimal);
  CHECK(config.t() * config.lambda_c == doctest::Approx(std::numbers::pi));
  CHECK(build_filter_circuit(minimal, config).n_qubits == 3);

  const auto eight = event_system(2, 3);
  CHECK(build_filter_circuit(eight, FilterConfig::for_system(eight)).n_qubits == 5);

  auto too_small = synthetic_system(1, {});
  CHECK_THROWS_AS(
      build_filter_circuit(too_small, FilterConfig::for_system(too_small)),
      ValidationError);
}

TEST_CASE("minimal system matches the dense oracle exactly") {
  const auto system = event_system(1, 3);
  const auto result = run_exact_filter(system, FilterConfig::for_system(system));
  CHECK(std::abs(result.p_succ - 0.25) <= 1e-10);
  CHECK(std::abs(result.post_dist.at(0) - 0.5) <= 1e-10);
  CHECK(std::abs(result.post_dist.at(1) - 0.5) <= 1e-10);

  const auto oracle = reference::dense_filter(system, std::numbers::pi / 3.0);
  CHECK(std::abs(result.p_succ - oracle.p_succ) <= 1e-12);
  CHECK(std::abs(result.p_t1_given_a1 - oracle.p_t1_given_a1) <= 1e-12);
}

TEST_CASE("noise-only and coupling-free systems are filtered to nothing") {
  for (int n : {2, 5, 16}) {
    const auto system = synthetic_system(n, {});
    const auto result = run_exact_filter(system, FilterConfig::for_system(system));
    CHECK(result.p_succ <= 1e-10);
    CHECK(result.empty_result);
  }
  // Two layers: no couplings can exist, same outcome.
  const auto flat = event_system(3, 2);
  CHECK(flat.couplings.empty());
  const auto result = run_exact_filter(flat, FilterConfig::for_system(flat));
  CHECK(result.p_succ <= 1e-10);
  CHECK(result.empty_result);
}

TEST_CASE("padding states acquire no post-selected probability") {
  const auto system = synthetic_system(6, {{0, 1}, {2, 3}});
  const auto result = run_exact_filter(system, FilterConfig::for_system(system));
  for (int padded : {6, 7}) {
    const auto it = result.post_dist.find(padded);
    if (it != result.post_dist.end()) CHECK(it->second <= 1e-10);
  }
  // Isolated real segments are filtered just the same.
  for (int isolated : {4, 5}) {
    const auto it = result.post_dist.find(isolated);
    if (it != result.post_dist.end()) CHECK(it->second <= 1e-10);
  }
}

TEST_CASE("exact filter agrees with the dense reference pipeline") {
  rng::Stream rs(404);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 3 + static_cast<int>(rs.below(30));
    // Random disjoint pair couplings plus one overlapping chain now and then.
    std::vector<std::pair<int, int>> couplings;
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i)
      std::swap(ids[i], ids[rs.below(static_cast<std::uint64_t>(i + 1))]);
    const int pairs = 1 + static_cast<int>(rs.below(static_cast<std::uint64_t>(n / 2)));
    for (int p = 0; p < pairs; ++p) {
      int a = ids[2 * p], b = ids[2 * p + 1];
      couplings.emplace_back(std::min(a, b), std::max(a, b));
    }
    if (trial % 3 == 0 && 2 * pairs < n)
      couplings.emplace_back(std::min(ids[1], ids[2 * pairs]),
                             std::max(ids[1], ids[2 * pairs]));
    const auto system = synthetic_system(n, couplings);
    const auto config = FilterConfig::for_system(system);
    const auto result = run_exact_filter(system, config);
    const auto oracle = reference::dense_filter(system, config.t());

    CHECK(std::abs(result.p_succ - oracle.p_succ) <= 1e-8);
    if (!result.empty_result) {
      std::map<int, double> oracle_dist;
      for (int s = 0; s < oracle.post.size(); ++s)
        if (oracle.post(s) > 0) oracle_dist[s] = oracle.post(s);
      CHECK(total_variation(result.post_dist, oracle_dist) <= 1e-8);
      CHECK(std::abs(result.p_t1_given_a1 - oracle.p_t1_given_a1) <= 1e-9);
    }
  }
}

TEST_CASE("sampled filter tracks the exact filter within shot noise") {
  const auto system = event_system(1, 3);
  const auto config = FilterConfig::for_system(system);
  const auto sampled = run_sampled_filter(system, config, std::nullopt, 8);
  REQUIRE(config.shots == 100000);
  const double sigma = std::sqrt(0.25 * 0.75 / 100000.0);
  CHECK(std::abs(sampled.p_succ - 0.25) <= 3 * sigma);

  const auto exact = run_exact_filter(system, config);
  CHECK(total_variation(sampled.post_dist, exact.post_dist) <= 0.02);
  CHECK(sampled.shots_used == 100000);
}

TEST_CASE("segment selection applies the relative threshold") {
  FilterResult uniform;
  for (int i = 0; i < 4; ++i) uniform.post_dist[i] = 0.25;
  CHECK(select_segments(uniform, 0.25, 4).size() == 4);

  FilterResult peaked;
  peaked.post_dist[0] = 0.9;
  peaked.post_dist[1] = 0.01;
  peaked.post_dist[2] = 0.09;
  CHECK(select_segments(peaked, 0.25, 3) == std::set<int>{0});

  // End-to-end noiseless reconstruction on the 8-segment event.
  const auto system = event_system(2, 3);
  const auto result = run_exact_filter(system, FilterConfig::for_system(system));
  std::set<int> coupled;
  for (const auto& c : system.couplings) {
    coupled.insert(c.i);
    coupled.insert(c.j);
  }
  CHECK(result.accepted_segments == coupled);
}

TEST_CASE("hellinger fidelity is the squared bhattacharyya overlap") {
  std::map<int, double> p{{0, 0.5}, {1, 0.5}};
  CHECK(hellinger_fidelity(p, p) == doctest::Approx(1.0).epsilon(1e-12));

  std::map<int, double> q{{2, 1.0}};
  CHECK(hellinger_fidelity(p, q) == 0.0);

  std::map<int, double> point{{0, 1.0}};
  std::map<int, double> flat{{0, 0.5}, {1, 0.5}};
  CHECK(hellinger_fidelity(point, flat) == doctest::Approx(0.5).epsilon(1e-12));

  std::map<int, double> bad{{0, 0.7}};
  CHECK_THROWS_AS(hellinger_fidelity(bad, p), ValidationError);
}

TEST_CASE("signal separation index and its sentinel") {
  const auto system = event_system(2, 3);
  const auto result = run_exact_filter(system, FilterConfig::for_system(system));
  std::set<int> valid;
  for (const auto& c : system.couplings) {
    valid.insert(c.i);
    valid.insert(c.j);
  }
  CHECK(std::isinf(signal_separation_index(result.post_dist, valid, system.N)));

  std::map<int, double> mixed{{0, 0.4}, {1, 0.4}, {2, 0.1}, {3, 0.1}};
  CHECK(signal_separation_index(mixed, {0, 1}, 4) ==
        doctest::Approx(4.0).epsilon(1e-12));
  // Denominator takes only the M = 2 largest noise masses.
  std::map<int, double> spread{{0, 0.4}, {1, 0.4}, {2, 0.08}, {3, 0.07},
                               {4, 0.05}};
  CHECK(signal_separation_index(spread, {0, 1}, 5) ==
        doctest::Approx(0.8 / 0.15).epsilon(1e-12));
}

TEST_CASE("coupon collection with a single target is geometric") {
  const auto system = event_system(1, 3);
  auto config = FilterConfig::for_system(system);
  // p_succ = 1/4, p(segment 0 | success) = 1/2 -> mean executions 8.
  double total = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const auto report = collect_until_complete(
        system, config, 1000 + static_cast<std::uint64_t>(trial), 100000,
        std::set<int>{0});
    REQUIRE(report.completed);
    total += static_cast<double>(report.shots_used);
  }
  const double mean = total / trials;
  CHECK(mean > 8.0 * 0.8);
  CHECK(mean < 8.0 * 1.2);

  // Noise-only system: explicit target can never complete, cap is honored.
  const auto lonely = synthetic_system(4, {});
  const auto capped = collect_until_complete(lonely, FilterConfig::for_system(lonely),
                                             3, 500, std::set<int>{0});
  CHECK(!capped.completed);
  CHECK(capped.shots_used == 500);
  CHECK_THROWS_AS(collect_until_complete(lonely, FilterConfig::for_system(lonely),
                                         3, 500),
                  ValidationError);
}

TEST_CASE("filter result serializes with the documented fields") {
  const auto system = event_system(1, 3);
  const auto result = run_exact_filter(system, FilterConfig::for_system(system));
  const nlohmann::json j = result;
  CHECK(j.contains("p_succ"));
  CHECK(j.contains("post_dist"));
  CHECK(j.contains("accepted"));
  CHECK(j.contains("shots_used"));
  CHECK(j.at("post_dist").contains("0"));
}
