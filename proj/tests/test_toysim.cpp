#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qtf/errors.hpp"
#include "qtf/rng.hpp"
#include "qtf/toysim.hpp"

using namespace qtf;
using namespace qtf::toysim;

namespace {

GenConfig clean_config(int tracks, std::uint64_t seed = 7) {
  GenConfig c;
  c.tracks_per_vertex = tracks;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("propagate is linear transport") {
  TrackState s;
  s.tx = 0.2;
  CHECK(propagate(s, 10.0).x == doctest::Approx(2.0).epsilon(1e-15));
  const TrackState same = propagate(s, 0.0);
  CHECK(same.x == s.x);
  CHECK(same.tx == s.tx);

  rng::Stream rs(42);
  for (int trial = 0; trial < 50; ++trial) {
    TrackState t;
    t.x = rs.uniform(-5, 5);
    t.y = rs.uniform(-5, 5);
    t.tx = rs.uniform(-0.3, 0.3);
    t.ty = rs.uniform(-0.3, 0.3);
    const double a = rs.uniform(-40, 40);
    const double b = rs.uniform(-40, 40);
    const TrackState two_steps = propagate(propagate(t, a), b);
    const TrackState one_step = propagate(t, a + b);
    CHECK(two_steps.x == doctest::Approx(one_step.x).epsilon(1e-12));
    CHECK(two_steps.y == doctest::Approx(one_step.y).epsilon(1e-12));
  }
}

TEST_CASE("zero-noise events are exact and fully accounted") {
  const auto geometry = DetectorGeometry::uniform(5);
  const auto event = generate_event(clean_config(4), geometry);

  CHECK(event.total_hits() == 20);
  CHECK(event.n_dropped == 0);
  CHECK(event.n_ghosts == 0);
  CHECK(event.truth_segments.size() == 16);

  // All hits of a track lie on one straight line through its vertex.
  std::map<int, std::vector<const Hit*>> by_track;
  for (const auto& layer : event.hits)
    for (const auto& h : layer) by_track[*h.truth_track_id].push_back(&h);
  for (const auto& [track, hits] : by_track) {
    REQUIRE(hits.size() == 5);
    const auto& vertex = event.vertices[0];
    const double tx = (hits[0]->x - vertex.x()) / (hits[0]->z - vertex.z());
    const double ty = (hits[0]->y - vertex.y()) / (hits[0]->z - vertex.z());
    for (const auto* h : hits) {
      const double dz = h->z - vertex.z();
      CHECK(std::abs(h->x - (vertex.x() + tx * dz)) <=
            1e-12 * std::max(1.0, std::abs(h->x)));
      CHECK(std::abs(h->y - (vertex.y() + ty * dz)) <=
            1e-12 * std::max(1.0, std::abs(h->y)));
    }
  }
}

TEST_CASE("generation is deterministic and ghost draws are independent") {
  const auto geometry = DetectorGeometry::uniform(4);
  GenConfig config = clean_config(3, 99);
  config.sigma_meas = 0.05;
  config.sigma_scatt_coeff = 2e-4;

  const nlohmann::json a = generate_event(config, geometry);
  const nlohmann::json b = generate_event(config, geometry);
  CHECK(a.dump() == b.dump());

  // Turning ghosts on must not move any track hit.
  GenConfig with_ghosts = config;
  with_ghosts.ghost_rate = 0.9;
  const auto plain = generate_event(config, geometry);
  const auto ghosted = generate_event(with_ghosts, geometry);
  CHECK(ghosted.n_ghosts > 0);
  for (int layer = 0; layer < geometry.n_layers(); ++layer) {
    for (std::size_t i = 0; i < plain.hits[layer].size(); ++i) {
      CHECK(plain.hits[layer][i].x == ghosted.hits[layer][i].x);
      CHECK(plain.hits[layer][i].y == ghosted.hits[layer][i].y);
    }
  }
}

TEST_CASE("hit count equals tracks*layers - dropped + ghosts") {
  const auto geometry = DetectorGeometry::uniform(6);
  GenConfig config = clean_config(8, 3);
  config.dropout_rate = 0.2;
  config.ghost_rate = 0.5;
  const auto event = generate_event(config, geometry);
  CHECK(event.total_hits() ==
        event.n_tracks * geometry.n_layers() - event.n_dropped + event.n_ghosts);
  for (const auto& seg : event.truth_segments) {
    const auto index = event.hit_index();
    CHECK(index.at(seg.second)->layer_index ==
          index.at(seg.first)->layer_index + 1);
  }
}

TEST_CASE("generation rejects bad inputs") {
  DetectorGeometry one_layer;
  one_layer.layer_z = {10.0};
  CHECK_THROWS_AS(generate_event(clean_config(1), one_layer), ValidationError);

  DetectorGeometry unsorted;
  unsorted.layer_z = {20.0, 10.0};
  CHECK_THROWS_AS(generate_event(clean_config(1), unsorted), ValidationError);

  GenConfig no_tracks = clean_config(1);
  no_tracks.tracks_per_vertex = 0;
  CHECK_THROWS_AS(generate_event(no_tracks, DetectorGeometry::uniform(3)),
                  ValidationError);

  GenConfig bad_rate = clean_config(1);
  bad_rate.ghost_rate = 1.5;
  CHECK_THROWS_AS(generate_event(bad_rate, DetectorGeometry::uniform(3)),
                  ValidationError);
}

TEST_CASE("segment metrics count accepted segments against truth") {
  const auto geometry = DetectorGeometry::uniform(3);
  const auto event = generate_event(clean_config(2, 5), geometry);
  REQUIRE(event.truth_segments.size() == 4);

  const auto perfect = segment_metrics(event.truth_segments, event);
  CHECK(perfect.efficiency == 1.0);
  CHECK(perfect.fake_rate == 0.0);

  // One extra fake on top of all four truth segments.
  auto accepted = event.truth_segments;
  const int a = event.hits[0][0].hit_id;
  const int b = event.hits[1][1].hit_id;
  REQUIRE(!accepted.count({a, b}));
  accepted.insert({a, b});
  const auto with_fake = segment_metrics(accepted, event);
  CHECK(with_fake.efficiency == 1.0);
  CHECK(with_fake.fake_rate == doctest::Approx(0.2).epsilon(1e-15));

  CHECK_THROWS_AS(segment_metrics({{123456, 0}}, event), ValidationError);
}

TEST_CASE("events round-trip through ndjson") {
  const auto geometry = DetectorGeometry::uniform(4);
  GenConfig config = clean_config(2, 11);
  config.sigma_meas = 0.1;
  config.ghost_rate = 0.4;
  std::vector<Event> events{generate_event(config, geometry)};

  std::stringstream buffer;
  write_events(events, buffer);
  const auto loaded = read_events(buffer);
  REQUIRE(loaded.size() == 1);
  CHECK(nlohmann::json(loaded[0]).dump() == nlohmann::json(events[0]).dump());
}
