/*
 * Copyright 2026 The Relidar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "relidar/fuse/fuse.hpp"

using namespace relidar;

namespace {

SensorModel fuse_sensor() {
  SensorModel s;
  s.name = "fuse16";
  for (int i = 0; i < 16; ++i) s.elevation_deg.push_back(8.0 - 1.25 * i);
  s.columns = 180;
  s.range_min_m = 0.5;
  s.range_max_m = 80.0;
  s.validate();
  return s;
}

PointCloud random_structured_cloud(const SensorModel& sensor, std::uint64_t seed,
                                   double coverage, std::uint32_t cls) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> range(1.0, 75.0);
  PointCloud cloud;
  cloud.frame = Frame::Sensor;
  for (int row = 0; row < sensor.rows(); ++row) {
    for (int col = 0; col < sensor.columns; ++col) {
      if (u(rng) > coverage) continue;
      const double az =
          (sensor.azimuth_min_deg + (col + 0.5) * sensor.azimuth_step_deg()) *
          kDegToRad;
      const double el = sensor.elevation_deg[row] * kDegToRad;
      const double r = range(rng);
      SemanticPoint p;
      p.x = r * std::cos(el) * std::cos(az);
      p.y = r * std::cos(el) * std::sin(az);
      p.z = r * std::sin(el);
      p.semantic_class = cls;
      p.instance_id = static_cast<std::uint32_t>(row);
      p.intensity = static_cast<float>(u(rng));
      p.confidence = static_cast<float>(u(rng));
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

}  // namespace

TEST_CASE("filter_pseudo boundary behavior") {
  PointCloud cloud;
  for (const float conf : {0.9f, 0.84f, 0.85f}) {
    SemanticPoint p;
    p.confidence = conf;
    cloud.points.push_back(p);
  }

  const PointCloud all = filter_pseudo(cloud, 0.0);
  CHECK(all.size() == 3);

  const PointCloud at_085 = filter_pseudo(cloud, 0.85);
  REQUIRE(at_085.size() == 2);
  CHECK(at_085.points[0].confidence == 0.9f);
  CHECK(at_085.points[1].confidence == 0.85f);  // >= keeps the boundary point

  const PointCloud none = filter_pseudo(cloud, 1.0);
  CHECK(none.empty());
}

TEST_CASE("filter_pseudo never reorders or increases") {
  const SensorModel sensor = fuse_sensor();
  const PointCloud cloud = random_structured_cloud(sensor, 3, 0.8, 1);
  const PointCloud kept = filter_pseudo(cloud, 0.5);
  CHECK(kept.size() <= cloud.size());
  std::size_t cursor = 0;
  for (const SemanticPoint& p : cloud.points) {
    if (p.confidence >= 0.5f) {
      REQUIRE(cursor < kept.size());
      CHECK(kept.points[cursor] == p);
      ++cursor;
    }
  }
  CHECK(cursor == kept.size());
}

TEST_CASE("fuse with an empty side projects the other") {
  const SensorModel sensor = fuse_sensor();
  const PointCloud gen = random_structured_cloud(sensor, 11, 0.5, 1);
  PointCloud empty;
  empty.frame = Frame::Sensor;

  const FuseResult left = fuse_frames(gen, empty, sensor);
  const PointCloud reprojected = build_range_image(sensor, gen).flatten();
  REQUIRE(left.cloud.size() == reprojected.size());
  for (std::size_t i = 0; i < left.cloud.size(); ++i) {
    CHECK(left.cloud.points[i] == reprojected.points[i]);
    CHECK(left.tags[i] == kTagGenerated);
  }

  const FuseResult right = fuse_frames(empty, gen, sensor);
  REQUIRE(right.cloud.size() == reprojected.size());
  for (std::size_t i = 0; i < right.cloud.size(); ++i) {
    CHECK(right.cloud.points[i] == reprojected.points[i]);
    CHECK(right.tags[i] == kTagReal);
  }
}

TEST_CASE("per-cell minimum rule with donor fidelity") {
  const SensorModel sensor = fuse_sensor();

  SUBCASE("hand case: real nearer wins") {
    PointCloud gen, real;
    gen.frame = real.frame = Frame::Sensor;
    SemanticPoint g;
    g.x = 7.0;
    g.semantic_class = 1;
    gen.points.push_back(g);
    SemanticPoint r;
    r.x = 4.0;
    r.semantic_class = 2;
    real.points.push_back(r);

    const FuseResult fused = fuse_frames(gen, real, sensor);
    REQUIRE(fused.cloud.size() == 1);
    CHECK(fused.cloud.points[0] == r);
    CHECK(fused.tags[0] == kTagReal);
    CHECK(fused.cells_from_real == 1);
  }

  SUBCASE("exhaustive per-cell oracle on random frames") {
    const PointCloud gen = random_structured_cloud(sensor, 21, 0.6, 1);
    const PointCloud real = random_structured_cloud(sensor, 22, 0.6, 2);
    const FuseResult fused = fuse_frames(gen, real, sensor);

    // Independent oracle: project each input separately and apply the rule.
    const RangeImage gi = build_range_image(sensor, gen);
    const RangeImage ri = build_range_image(sensor, real);
    std::size_t expected_count = 0;
    std::size_t cursor = 0;
    for (int row = 0; row < sensor.rows(); ++row) {
      for (int col = 0; col < sensor.columns; ++col) {
        const bool gv = gi.valid(row, col);
        const bool rv = ri.valid(row, col);
        if (!gv && !rv) continue;
        ++expected_count;
        const SemanticPoint winner =
            (gv && (!rv || gi.range(row, col) <= ri.range(row, col)))
                ? gi.point(row, col)
                : ri.point(row, col);
        REQUIRE(cursor < fused.cloud.size());
        CHECK(fused.cloud.points[cursor] == winner);
        ++cursor;
      }
    }
    CHECK(fused.cloud.size() == expected_count);
  }
}

TEST_CASE("fuse idempotence: fuse(x, x) reprojects x") {
  const SensorModel sensor = fuse_sensor();
  const PointCloud x = random_structured_cloud(sensor, 31, 0.7, 3);
  const FuseResult fused = fuse_frames(x, x, sensor);
  const PointCloud reprojected = build_range_image(sensor, x).flatten();
  REQUIRE(fused.cloud.size() == reprojected.size());
  for (std::size_t i = 0; i < fused.cloud.size(); ++i) {
    CHECK(fused.cloud.points[i] == reprojected.points[i]);
  }
}

TEST_CASE("fuse rejects non-sensor frames") {
  const SensorModel sensor = fuse_sensor();
  PointCloud world;
  world.frame = Frame::World;
  PointCloud ok;
  ok.frame = Frame::Sensor;
  CHECK_THROWS(fuse_frames(world, ok, sensor));
  CHECK_THROWS(fuse_frames(ok, world, sensor));
}

TEST_CASE("pairing is seeded and uniform-ish") {
  const auto a = pair_frames(10, 2, 99);
  const auto b = pair_frames(10, 2, 99);
  CHECK(a == b);
  const auto c = pair_frames(10, 2, 100);
  CHECK(a != c);  // overwhelmingly likely with 2^10 combinations

  const auto pairing = pair_frames(1, 1, 0);
  CHECK(pairing == std::vector<std::size_t>{0});

  CHECK_THROWS(pair_frames(0, 5, 0));
  CHECK_THROWS(pair_frames(5, 0, 0));
}

TEST_CASE("build_mixed_dataset counts and filtering") {
  const SensorModel sensor = fuse_sensor();
  std::vector<PointCloud> gen(4), real(2);
  for (std::size_t i = 0; i < gen.size(); ++i) {
    gen[i] = random_structured_cloud(sensor, 100 + i, 0.4, 1);
  }
  for (std::size_t i = 0; i < real.size(); ++i) {
    real[i] = random_structured_cloud(sensor, 200 + i, 0.4, 2);
  }

  FusionParams params;
  params.confidence_threshold = 0.85;
  params.pairing_seed = 7;
  const MixedDataset mixed = build_mixed_dataset(gen, real, sensor, params);
  CHECK(mixed.fused.size() == 4);
  CHECK(mixed.pairing.size() == 4);

  // Real donors below the confidence threshold never appear in the output.
  for (std::size_t i = 0; i < mixed.fused.size(); ++i) {
    for (std::size_t j = 0; j < mixed.fused[i].cloud.size(); ++j) {
      const SemanticPoint& p = mixed.fused[i].cloud.points[j];
      if (mixed.fused[i].tags[j] == kTagReal) {
        CHECK(p.confidence >= 0.85f);
      }
    }
  }
}
