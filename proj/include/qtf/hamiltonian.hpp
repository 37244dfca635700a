#pragma once

#include <Eigen/Dense>
#include <set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qtf/toysim.hpp"

namespace qtf::hamiltonian {

/// Candidate doublet connecting hits on adjacent layers.
struct Segment {
  int seg_id = -1;
  int from_hit = -1;
  int to_hit = -1;
  Eigen::Vector3d direction = Eigen::Vector3d::Zero();  // unit vector
};

/// Angular-compatibility relation between two segments sharing a hit.
struct Coupling {
  int i = -1;
  int j = -1;
  double cos_theta = 0;
};

/// Sparse view of the linear system A x = b with A = (alpha+beta) I - B,
/// B binary symmetric with one off-diagonal pair per coupling, b the
/// all-ones vector.
struct TrackingSystem {
  int N = 0;
  std::vector<Segment> segments;
  std::vector<Coupling> couplings;
  double alpha = 2.0;
  double beta = 1.0;
  double epsilon = 1e-6;

  double diag_c() const { return alpha + beta; }
  /// Per-segment list of coupled partners.
  std::vector<std::vector<int>> adjacency() const;
  /// Segment ids participating in at least one coupling, ascending.
  std::vector<int> coupled_segments() const;
  Eigen::MatrixXd dense_matrix(int dense_limit = 4096) const;
};

/// Enumerates every (hit on layer p) x (hit on layer p+1) pair, ordered by
/// (layer, from_hit, to_hit).
std::vector<Segment> build_candidate_segments(const toysim::Event& event);

/// Keeps segment pairs that share a middle hit and satisfy
/// cos(theta) >= 1 - epsilon between their unit directions.
std::vector<Coupling> build_couplings(const std::vector<Segment>& segments,
                                      double epsilon);

TrackingSystem assemble_system(std::vector<Segment> segments,
                               std::vector<Coupling> couplings, double alpha,
                               double beta, double epsilon = 1e-6);

/// Conjugate-gradient solve of A x = 1; relative residual <= 1e-10.
Eigen::VectorXd solve_classical(const TrackingSystem& system);

/// Classical discretization: accept segments with x strictly above threshold.
std::set<int> select_by_threshold(const Eigen::VectorXd& x, double threshold);

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // column j pairs with eigenvalues[j]
  Eigen::VectorXd overlaps;      // <u_j | b / ||b||>
};

Spectrum eigendecompose(const TrackingSystem& system, int dense_limit = 4096);

/// (diag - max_degree, diag + max_degree); encloses every eigenvalue.
std::pair<double, double> gershgorin_bounds(const TrackingSystem& system);

/// Filter response sum_j cos^2(lambda_j t / 2) |beta_j|^2.
double predict_success(const Spectrum& spectrum, double t);

/// Diagnostic: |beta|^2 mass on coupled-subspace eigencomponents that the
/// filter nulls (|cos(lambda t / 2)| ~ 0). Zero for detectors under 6 layers.
double filtered_signal_mass(const Spectrum& spectrum,
                            const TrackingSystem& system, double t);

void to_json(nlohmann::json& j, const TrackingSystem& system);
void from_json(const nlohmann::json& j, TrackingSystem& system);

}  // namespace qtf::hamiltonian
