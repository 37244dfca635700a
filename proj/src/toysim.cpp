#include "qtf/toysim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "qtf/errors.hpp"
#include "qtf/rng.hpp"

namespace qtf::toysim {

namespace {

// Stream purposes; one independent draw sequence per concern.
enum Purpose : std::uint64_t {
  kVertexZ = 1,
  kSlopes = 2,
  kMomentum = 3,
  kMeasSmear = 4,
  kScatter = 5,
  kDropout = 6,
  kGhostGate = 7,
  kGhostPos = 8,
};

}  // namespace

void DetectorGeometry::validate() const {
  if (n_layers() < 2) throw ValidationError("geometry needs at least 2 layers");
  for (std::size_t i = 1; i < layer_z.size(); ++i) {
    if (!(layer_z[i] > layer_z[i - 1]))
      throw ValidationError("layer_z must be strictly increasing");
  }
  if (!(transverse_halfwidth > 0))
    throw ValidationError("transverse_halfwidth must be positive");
}

DetectorGeometry DetectorGeometry::uniform(int n_layers, double pitch,
                                           double first_z, double halfwidth) {
  DetectorGeometry g;
  g.transverse_halfwidth = halfwidth;
  g.layer_z.reserve(static_cast<std::size_t>(n_layers));
  for (int i = 0; i < n_layers; ++i) g.layer_z.push_back(first_z + pitch * i);
  g.validate();
  return g;
}

TrackState propagate(const TrackState& state, double dz) {
  if (!std::isfinite(dz)) throw ValidationError("propagate: dz must be finite");
  TrackState out = state;
  out.x += state.tx * dz;
  out.y += state.ty * dz;
  return out;
}

void GenConfig::validate() const {
  if (tracks_per_vertex < 1)
    throw ValidationError("tracks_per_vertex must be >= 1");
  if (n_vertices < 1) throw ValidationError("n_vertices must be >= 1");
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(ghost_rate) || !rate_ok(dropout_rate))
    throw ValidationError("rates must lie in [0, 1]");
  if (sigma_meas < 0 || sigma_scatt_coeff < 0)
    throw ValidationError("sigma values must be >= 0");
  if (!(momentum_range.first > 0) ||
      !(momentum_range.second >= momentum_range.first))
    throw ValidationError("momentum_range must satisfy 0 < pmin <= pmax");
  if (!(slope_max > 0)) throw ValidationError("slope_max must be positive");
}

int Event::total_hits() const {
  int n = 0;
  for (const auto& layer : hits) n += static_cast<int>(layer.size());
  return n;
}

std::map<int, const Hit*> Event::hit_index() const {
  std::map<int, const Hit*> index;
  for (const auto& layer : hits)
    for (const auto& h : layer) index.emplace(h.hit_id, &h);
  return index;
}

Event generate_event(const GenConfig& config, const DetectorGeometry& geometry) {
  config.validate();
  geometry.validate();

  rng::Stream s_vz(rng::derive(config.seed, kVertexZ));
  rng::Stream s_slope(rng::derive(config.seed, kSlopes));
  rng::Stream s_mom(rng::derive(config.seed, kMomentum));
  rng::Stream s_meas(rng::derive(config.seed, kMeasSmear));
  rng::Stream s_scat(rng::derive(config.seed, kScatter));
  rng::Stream s_drop(rng::derive(config.seed, kDropout));
  rng::Stream s_ggate(rng::derive(config.seed, kGhostGate));
  rng::Stream s_gpos(rng::derive(config.seed, kGhostPos));

  Event event;
  event.geometry = geometry;
  event.hits.resize(static_cast<std::size_t>(geometry.n_layers()));

  const int l = geometry.n_layers();
  const double half = geometry.transverse_halfwidth;
  int next_hit_id = 0;
  int track_id = 0;

  for (int v = 0; v < config.n_vertices; ++v) {
    const double z0 = config.z0_window > 0
                          ? s_vz.uniform(config.z0 - 0.5 * config.z0_window,
                                         config.z0 + 0.5 * config.z0_window)
                          : config.z0;
    if (z0 >= geometry.layer_z.front())
      throw ValidationError("vertex z0 must lie before the first layer");
    event.vertices.emplace_back(0.0, 0.0, z0);

    for (int trk = 0; trk < config.tracks_per_vertex; ++trk, ++track_id) {
      // Draw slopes until the ideal straight line stays inside acceptance on
      // every layer.
      double tx = 0, ty = 0;
      bool accepted = false;
      for (int attempt = 0; attempt < 100000; ++attempt) {
        tx = s_slope.uniform(-config.slope_max, config.slope_max);
        ty = s_slope.uniform(-config.slope_max, config.slope_max);
        accepted = true;
        for (double z : geometry.layer_z) {
          const double dz = z - z0;
          if (std::abs(tx * dz) > half || std::abs(ty * dz) > half) {
            accepted = false;
            break;
          }
        }
        if (accepted) break;
      }
      if (!accepted)
        throw ValidationError(
            "could not draw a track inside the acceptance window");

      const double p = std::exp(s_mom.uniform(std::log(config.momentum_range.first),
                                              std::log(config.momentum_range.second)));
      const double charge = s_mom.uniform01() < 0.5 ? 1.0 : -1.0;

      TrackState state;
      state.tx = tx;
      state.ty = ty;
      state.q_over_p = charge / p;
      double z_cur = z0;
      int prev_hit_id = -1;

      for (int layer = 0; layer < l; ++layer) {
        const double z = geometry.layer_z[static_cast<std::size_t>(layer)];
        state = propagate(state, z - z_cur);
        z_cur = z;

        const double mx = s_meas.normal() * config.sigma_meas;
        const double my = s_meas.normal() * config.sigma_meas;
        const bool dropped = s_drop.uniform01() < config.dropout_rate;
        if (dropped) {
          ++event.n_dropped;
          prev_hit_id = -1;
        } else {
          Hit h;
          h.hit_id = next_hit_id++;
          h.layer_index = layer;
          h.x = state.x + mx;
          h.y = state.y + my;
          h.z = z;
          h.truth_track_id = track_id;
          event.hits[static_cast<std::size_t>(layer)].push_back(h);
          if (prev_hit_id >= 0)
            event.truth_segments.emplace(prev_hit_id, h.hit_id);
          prev_hit_id = h.hit_id;
        }

        // Scattering kick after traversing the plane.
        if (config.sigma_scatt_coeff > 0) {
          const double sigma =
              config.sigma_scatt_coeff * std::abs(state.q_over_p);
          state.tx += s_scat.normal() * sigma;
          state.ty += s_scat.normal() * sigma;
        }
      }
    }
  }
  event.n_tracks = track_id;

  for (int layer = 0; layer < l; ++layer) {
    if (s_ggate.uniform01() < config.ghost_rate) {
      Hit h;
      h.hit_id = next_hit_id++;
      h.layer_index = layer;
      h.x = s_gpos.uniform(-half, half);
      h.y = s_gpos.uniform(-half, half);
      h.z = geometry.layer_z[static_cast<std::size_t>(layer)];
      event.hits[static_cast<std::size_t>(layer)].push_back(h);
      ++event.n_ghosts;
    }
  }
  return event;
}

SegmentMetrics segment_metrics(const std::set<std::pair<int, int>>& accepted,
                               const Event& event) {
  const auto index = event.hit_index();
  SegmentMetrics m;
  m.n_true_generated = static_cast<std::int64_t>(event.truth_segments.size());
  m.n_all_accepted = static_cast<std::int64_t>(accepted.size());
  for (const auto& seg : accepted) {
    if (!index.count(seg.first) || !index.count(seg.second))
      throw ValidationError("segment_metrics: unknown hit id");
    if (event.truth_segments.count(seg))
      ++m.n_true_accepted;
    else
      ++m.n_false_accepted;
  }
  m.efficiency = m.n_true_generated == 0
                     ? 1.0
                     : static_cast<double>(m.n_true_accepted) /
                           static_cast<double>(m.n_true_generated);
  m.fake_rate = m.n_all_accepted == 0
                    ? 0.0
                    : static_cast<double>(m.n_false_accepted) /
                          static_cast<double>(m.n_all_accepted);
  return m;
}

void to_json(nlohmann::json& j, const Event& event) {
  j = nlohmann::json::object();
  j["geometry"] = {{"layer_z", event.geometry.layer_z},
                   {"transverse_halfwidth", event.geometry.transverse_halfwidth}};
  auto vertices = nlohmann::json::array();
  for (const auto& v : event.vertices)
    vertices.push_back({v.x(), v.y(), v.z()});
  j["vertices"] = vertices;
  auto hits = nlohmann::json::array();
  for (const auto& layer : event.hits) {
    for (const auto& h : layer) {
      nlohmann::json hj = {{"id", h.hit_id}, {"layer", h.layer_index},
                           {"x", h.x},       {"y", h.y},
                           {"z", h.z}};
      if (h.truth_track_id)
        hj["truth_track_id"] = *h.truth_track_id;
      else
        hj["truth_track_id"] = nullptr;
      hits.push_back(hj);
    }
  }
  j["hits"] = hits;
  auto segments = nlohmann::json::array();
  for (const auto& s : event.truth_segments)
    segments.push_back({s.first, s.second});
  j["truth_segments"] = segments;
  j["n_tracks"] = event.n_tracks;
  j["n_dropped"] = event.n_dropped;
  j["n_ghosts"] = event.n_ghosts;
}

void from_json(const nlohmann::json& j, Event& event) {
  event = Event{};
  event.geometry.layer_z = j.at("geometry").at("layer_z").get<std::vector<double>>();
  event.geometry.transverse_halfwidth =
      j.at("geometry").at("transverse_halfwidth").get<double>();
  event.geometry.validate();
  for (const auto& v : j.at("vertices"))
    event.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>(),
                                v.at(2).get<double>());
  event.hits.resize(static_cast<std::size_t>(event.geometry.n_layers()));
  for (const auto& hj : j.at("hits")) {
    Hit h;
    h.hit_id = hj.at("id").get<int>();
    h.layer_index = hj.at("layer").get<int>();
    h.x = hj.at("x").get<double>();
    h.y = hj.at("y").get<double>();
    h.z = hj.at("z").get<double>();
    if (!hj.at("truth_track_id").is_null())
      h.truth_track_id = hj.at("truth_track_id").get<int>();
    if (h.layer_index < 0 || h.layer_index >= event.geometry.n_layers())
      throw ValidationError("event hit references unknown layer");
    event.hits[static_cast<std::size_t>(h.layer_index)].push_back(h);
  }
  for (const auto& s : j.at("truth_segments"))
    event.truth_segments.emplace(s.at(0).get<int>(), s.at(1).get<int>());
  event.n_tracks = j.value("n_tracks", 0);
  event.n_dropped = j.value("n_dropped", 0);
  event.n_ghosts = j.value("n_ghosts", 0);
}

void write_events(const std::vector<Event>& events, std::ostream& out) {
  for (const auto& e : events) {
    nlohmann::json j = e;
    out << j.dump() << "\n";
  }
}

std::vector<Event> read_events(std::istream& in) {
  std::vector<Event> events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(nlohmann::json::parse(line).get<Event>());
  }
  return events;
}

}  // namespace qtf::toysim
