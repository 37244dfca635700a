#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "json.hpp"

namespace qtf::toysim {

/// Sequential measurement planes in z, all sharing one square transverse
/// acceptance window.
struct DetectorGeometry {
  std::vector<double> layer_z;       // mm, strictly increasing
  double transverse_halfwidth = 50;  // mm

  int n_layers() const { return static_cast<int>(layer_z.size()); }
  void validate() const;

  static DetectorGeometry uniform(int n_layers, double pitch = 20.0,
                                  double first_z = 20.0,
                                  double halfwidth = 50.0);
};

/// Track state (x, y, tx, ty, q/p) at a given z.
struct TrackState {
  double x = 0;
  double y = 0;
  double tx = 0;  // dx/dz
  double ty = 0;  // dy/dz
  double q_over_p = 0;  // 1/GeV
};

/// Straight-line transport over dz; slopes and q/p unchanged.
TrackState propagate(const TrackState& state, double dz);

struct GenConfig {
  int n_vertices = 1;
  int tracks_per_vertex = 1;
  double sigma_meas = 0;         // mm
  double sigma_scatt_coeff = 0;  // rad*GeV, kick sigma = coeff * |q/p| per layer
  std::pair<double, double> momentum_range{1.0, 5.0};  // GeV, log-uniform
  double ghost_rate = 0;
  double dropout_rate = 0;
  std::uint64_t seed = 0;
  double z0 = 0;         // mm, vertex z (window center)
  double z0_window = 0;  // mm, uniform spread for multi-vertex events
  double slope_max = 0.3;

  void validate() const;
};

struct Hit {
  int hit_id = -1;
  int layer_index = -1;
  double x = 0, y = 0, z = 0;
  std::optional<int> truth_track_id;  // absent for ghost hits
};

struct Event {
  DetectorGeometry geometry;
  std::vector<Eigen::Vector3d> vertices;  // (0, 0, z0)
  std::vector<std::vector<Hit>> hits;     // per layer
  std::set<std::pair<int, int>> truth_segments;  // adjacent-layer hit id pairs
  int n_tracks = 0;
  int n_dropped = 0;
  int n_ghosts = 0;

  int total_hits() const;
  std::map<int, const Hit*> hit_index() const;
};

/// Deterministic toy event: straight tracks from beam-axis vertices, Gaussian
/// hit smearing, per-layer scattering kicks, optional ghosts and dropouts.
Event generate_event(const GenConfig& config, const DetectorGeometry& geometry);

struct SegmentMetrics {
  double efficiency = 0;
  double fake_rate = 0;
  std::int64_t n_true_accepted = 0;
  std::int64_t n_true_generated = 0;
  std::int64_t n_false_accepted = 0;
  std::int64_t n_all_accepted = 0;
};

/// Scores an accepted segment set against event truth. Throws on unknown hit
/// ids. fake_rate is 0 when nothing was accepted; efficiency is 1 when the
/// event has no truth segments.
SegmentMetrics segment_metrics(const std::set<std::pair<int, int>>& accepted,
                               const Event& event);

void to_json(nlohmann::json& j, const Event& event);
void from_json(const nlohmann::json& j, Event& event);

/// Newline-delimited JSON, one document per event.
void write_events(const std::vector<Event>& events, std::ostream& out);
std::vector<Event> read_events(std::istream& in);

}  // namespace qtf::toysim
