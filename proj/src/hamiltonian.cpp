#include "qtf/hamiltonian.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "qtf/errors.hpp"

namespace qtf::hamiltonian {

std::vector<std::vector<int>> TrackingSystem::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(N));
  for (const auto& c : couplings) {
    adj[static_cast<std::size_t>(c.i)].push_back(c.j);
    adj[static_cast<std::size_t>(c.j)].push_back(c.i);
  }
  return adj;
}

std::vector<int> TrackingSystem::coupled_segments() const {
  std::set<int> ids;
  for (const auto& c : couplings) {
    ids.insert(c.i);
    ids.insert(c.j);
  }
  return {ids.begin(), ids.end()};
}

Eigen::MatrixXd TrackingSystem::dense_matrix(int dense_limit) const {
  if (N > dense_limit)
    throw CapacityError("dense materialization limited to N <= " +
                        std::to_string(dense_limit));
  Eigen::MatrixXd a = diag_c() * Eigen::MatrixXd::Identity(N, N);
  for (const auto& c : couplings) {
    a(c.i, c.j) -= 1.0;
    a(c.j, c.i) -= 1.0;
  }
  return a;
}

std::vector<Segment> build_candidate_segments(const toysim::Event& event) {
  if (event.geometry.n_layers() < 2)
    throw ValidationError("segment building needs at least 2 layers");
  std::vector<Segment> segments;
  const int l = event.geometry.n_layers();
  for (int layer = 0; layer + 1 < l; ++layer) {
    auto from_hits = event.hits[static_cast<std::size_t>(layer)];
    auto to_hits = event.hits[static_cast<std::size_t>(layer + 1)];
    auto by_id = [](const toysim::Hit& a, const toysim::Hit& b) {
      return a.hit_id < b.hit_id;
    };
    std::sort(from_hits.begin(), from_hits.end(), by_id);
    std::sort(to_hits.begin(), to_hits.end(), by_id);
    for (const auto& from : from_hits) {
      for (const auto& to : to_hits) {
        Segment s;
        s.from_hit = from.hit_id;
        s.to_hit = to.hit_id;
        s.direction =
            Eigen::Vector3d(to.x - from.x, to.y - from.y, to.z - from.z)
                .normalized();
        segments.push_back(s);
      }
    }
  }
  for (std::size_t i = 0; i < segments.size(); ++i)
    segments[i].seg_id = static_cast<int>(i);
  return segments;
}

std::vector<Coupling> build_couplings(const std::vector<Segment>& segments,
                                      double epsilon) {
  if (epsilon < 0) throw ValidationError("epsilon must be >= 0");
  std::map<int, std::vector<int>> by_from_hit;
  for (const auto& s : segments) by_from_hit[s.from_hit].push_back(s.seg_id);
  std::vector<Coupling> couplings;
  for (const auto& s : segments) {
    auto it = by_from_hit.find(s.to_hit);
    if (it == by_from_hit.end()) continue;
    for (int j : it->second) {
      const auto& next = segments[static_cast<std::size_t>(j)];
      const double cos_theta = s.direction.dot(next.direction);
      if (cos_theta >= 1.0 - epsilon)
        couplings.push_back({s.seg_id, next.seg_id, cos_theta});
    }
  }
  std::sort(couplings.begin(), couplings.end(),
            [](const Coupling& a, const Coupling& b) {
              return std::pair(a.i, a.j) < std::pair(b.i, b.j);
            });
  return couplings;
}

TrackingSystem assemble_system(std::vector<Segment> segments,
                               std::vector<Coupling> couplings, double alpha,
                               double beta, double epsilon) {
  TrackingSystem sys;
  sys.N = static_cast<int>(segments.size());
  sys.alpha = alpha;
  sys.beta = beta;
  sys.epsilon = epsilon;
  std::set<std::pair<int, int>> seen;
  for (auto& c : couplings) {
    if (c.i > c.j) std::swap(c.i, c.j);
    if (c.i < 0 || c.j >= sys.N || c.i == c.j)
      throw ValidationError("coupling ids out of range");
    if (!seen.emplace(c.i, c.j).second)
      throw ValidationError("duplicate coupling");
  }
  std::sort(couplings.begin(), couplings.end(),
            [](const Coupling& a, const Coupling& b) {
              return std::pair(a.i, a.j) < std::pair(b.i, b.j);
            });
  sys.segments = std::move(segments);
  sys.couplings = std::move(couplings);
  return sys;
}

Eigen::VectorXd solve_classical(const TrackingSystem& system) {
  const int n = system.N;
  if (n == 0) throw ValidationError("empty system");
  Eigen::SparseMatrix<double> a(n, n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(system.couplings.size() * 2 + static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, system.diag_c());
  for (const auto& c : system.couplings) {
    triplets.emplace_back(c.i, c.j, -1.0);
    triplets.emplace_back(c.j, c.i, -1.0);
  }
  a.setFromTriplets(triplets.begin(), triplets.end());

  const Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
      cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(20 * n + 100);
  cg.compute(a);
  const Eigen::VectorXd x = cg.solve(b);
  const double rel_residual = (a * x - b).norm() / b.norm();
  if (!std::isfinite(rel_residual) || rel_residual > 1e-10)
    throw ValidationError("classical solve failed; matrix not positive definite?");
  return x;
}

std::set<int> select_by_threshold(const Eigen::VectorXd& x, double threshold) {
  std::set<int> accepted;
  for (int i = 0; i < x.size(); ++i)
    if (x(i) > threshold) accepted.insert(i);
  return accepted;
}

Spectrum eigendecompose(const TrackingSystem& system, int dense_limit) {
  const Eigen::MatrixXd a = system.dense_matrix(dense_limit);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    throw ValidationError("eigendecomposition failed");
  Spectrum spectrum;
  spectrum.eigenvalues = solver.eigenvalues();
  spectrum.eigenvectors = solver.eigenvectors();
  const Eigen::VectorXd b_normalized =
      Eigen::VectorXd::Constant(system.N, 1.0 / std::sqrt(double(system.N)));
  spectrum.overlaps = spectrum.eigenvectors.transpose() * b_normalized;
  return spectrum;
}

std::pair<double, double> gershgorin_bounds(const TrackingSystem& system) {
  std::vector<int> degree(static_cast<std::size_t>(system.N), 0);
  for (const auto& c : system.couplings) {
    ++degree[static_cast<std::size_t>(c.i)];
    ++degree[static_cast<std::size_t>(c.j)];
  }
  const int max_degree =
      degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
  return {system.diag_c() - max_degree, system.diag_c() + max_degree};
}

double predict_success(const Spectrum& spectrum, double t) {
  double p = 0;
  for (int j = 0; j < spectrum.eigenvalues.size(); ++j) {
    const double c = std::cos(0.5 * spectrum.eigenvalues(j) * t);
    p += c * c * spectrum.overlaps(j) * spectrum.overlaps(j);
  }
  return p;
}

double filtered_signal_mass(const Spectrum& spectrum,
                            const TrackingSystem& system, double t) {
  const auto coupled = system.coupled_segments();
  double mass = 0;
  for (int j = 0; j < spectrum.eigenvalues.size(); ++j) {
    const double c = std::cos(0.5 * spectrum.eigenvalues(j) * t);
    if (c * c > 1e-12) continue;
    double coupled_weight = 0;
    for (int id : coupled)
      coupled_weight += spectrum.eigenvectors(id, j) * spectrum.eigenvectors(id, j);
    if (coupled_weight > 1e-8)
      mass += spectrum.overlaps(j) * spectrum.overlaps(j);
  }
  return mass;
}

void to_json(nlohmann::json& j, const TrackingSystem& system) {
  j = nlohmann::json::object();
  j["alpha"] = system.alpha;
  j["beta"] = system.beta;
  j["epsilon"] = system.epsilon;
  j["N"] = system.N;
  auto segments = nlohmann::json::array();
  for (const auto& s : system.segments)
    segments.push_back({{"id", s.seg_id}, {"from", s.from_hit}, {"to", s.to_hit}});
  j["segments"] = segments;
  auto couplings = nlohmann::json::array();
  for (const auto& c : system.couplings) couplings.push_back({c.i, c.j});
  j["couplings"] = couplings;
}

void from_json(const nlohmann::json& j, TrackingSystem& system) {
  system = TrackingSystem{};
  system.alpha = j.at("alpha").get<double>();
  system.beta = j.at("beta").get<double>();
  system.epsilon = j.at("epsilon").get<double>();
  system.N = j.at("N").get<int>();
  for (const auto& sj : j.at("segments")) {
    Segment s;
    s.seg_id = sj.at("id").get<int>();
    s.from_hit = sj.at("from").get<int>();
    s.to_hit = sj.at("to").get<int>();
    system.segments.push_back(s);
  }
  if (static_cast<int>(system.segments.size()) != system.N)
    throw ValidationError("system JSON: N does not match segment count");
  std::set<std::pair<int, int>> seen;
  for (const auto& cj : j.at("couplings")) {
    Coupling c;
    c.i = cj.at(0).get<int>();
    c.j = cj.at(1).get<int>();
    if (c.i > c.j) std::swap(c.i, c.j);
    if (c.i < 0 || c.j >= system.N || c.i == c.j)
      throw ValidationError("system JSON: coupling ids out of range");
    if (!seen.emplace(c.i, c.j).second)
      throw ValidationError("system JSON: duplicate coupling");
    system.couplings.push_back(c);
  }
}

}  // namespace qtf::hamiltonian
