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

#include <filesystem>

#include "relidar/core/projection.hpp"
#include "relidar/ingest/cuboids.hpp"
#include "relidar/ingest/manifest.hpp"
#include "relidar/synth/synthworld.hpp"

using namespace relidar;
namespace fs = std::filesystem;

namespace {

SynthWorld plane_only_world() {
  SynthWorld world;
  Primitive ground;
  ground.shape = Primitive::Shape::Ground;
  ground.semantic_class = synth_class::kRoad;
  ground.road_half_width = 4.0;
  world.primitives.push_back(ground);
  return world;
}

SensorModel single_beam_sensor(double elevation_deg, double mount_height) {
  SensorModel s;
  s.name = "beam";
  s.elevation_deg = {elevation_deg};
  s.columns = 1;
  s.azimuth_min_deg = -0.5;
  s.azimuth_max_deg = 0.5;
  s.range_min_m = 0.5;
  s.range_max_m = 100.0;
  s.mount = PoseSE3::translation_only({0.0, 0.0, mount_height});
  s.validate();
  return s;
}

}  // namespace

TEST_CASE("generate_world is deterministic and bounded") {
  const SynthWorld a = generate_world(42, Complexity::Medium);
  const SynthWorld b = generate_world(42, Complexity::Medium);
  REQUIRE(a.primitives.size() == b.primitives.size());
  for (std::size_t i = 0; i < a.primitives.size(); ++i) {
    CHECK(a.primitives[i].center == b.primitives[i].center);
    CHECK(a.primitives[i].semantic_class == b.primitives[i].semantic_class);
  }

  const SynthWorld small = generate_world(7, Complexity::Small);
  CHECK(small.primitives.size() <= 15);

  for (const Primitive& p : a.primitives) {
    CHECK(p.center.head<2>().norm() <= 120.0);
  }
  CHECK_FALSE(a.dynamic_instance_ids().empty());
}

TEST_CASE("horizontal beam over a plane misses") {
  const SynthWorld world = plane_only_world();
  const SensorModel sensor = single_beam_sensor(0.0, 2.0);
  const PointCloud cloud = raytrace_analytic(world, sensor, PoseSE3::identity(), 0.0);
  CHECK(cloud.empty());
}

TEST_CASE("beam at -30 degrees from 2 m hits the plane at range 4") {
  const SynthWorld world = plane_only_world();
  const SensorModel sensor = single_beam_sensor(-30.0, 2.0);
  const PointCloud cloud = raytrace_analytic(world, sensor, PoseSE3::identity(), 0.0);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0].position().norm() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(cloud.points[0].semantic_class == synth_class::kRoad);
}

TEST_CASE("nearest primitive wins along a beam") {
  SynthWorld world;
  Primitive box;
  box.shape = Primitive::Shape::Box;
  box.semantic_class = synth_class::kStructure;
  box.instance_id = 1;
  box.center = {10.0, 0.0, 1.0};
  box.half_extent = {1.0, 1.0, 1.0};
  world.primitives.push_back(box);

  Primitive cyl;
  cyl.shape = Primitive::Shape::Cylinder;
  cyl.semantic_class = synth_class::kNature;
  cyl.instance_id = 2;
  cyl.center = {20.0, 0.0, 2.0};
  cyl.radius = 0.5;
  cyl.half_extent = {0.5, 0.5, 2.0};
  world.primitives.push_back(cyl);

  const SensorModel sensor = single_beam_sensor(0.0, 1.0);
  const PointCloud cloud = raytrace_analytic(world, sensor, PoseSE3::identity(), 0.0);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0].semantic_class == synth_class::kStructure);
  CHECK(cloud.points[0].position().norm() == doctest::Approx(9.0).epsilon(1e-9));

  // Without the box the cylinder is hit instead.
  SynthWorld only_cyl;
  only_cyl.primitives.push_back(cyl);
  const PointCloud cloud2 =
      raytrace_analytic(only_cyl, sensor, PoseSE3::identity(), 0.0);
  REQUIRE(cloud2.size() == 1);
  CHECK(cloud2.points[0].semantic_class == synth_class::kNature);
  CHECK(cloud2.points[0].position().norm() == doctest::Approx(19.5).epsilon(1e-9));
}

TEST_CASE("ray hits satisfy the surface equations") {
  const SynthWorld world = generate_world(3, Complexity::Medium);
  SensorModel sensor;
  sensor.name = "probe";
  for (int i = 0; i < 16; ++i) sensor.elevation_deg.push_back(5.0 - i * 1.5);
  sensor.columns = 180;
  sensor.range_min_m = 0.5;
  sensor.range_max_m = 80.0;
  sensor.mount = PoseSE3::translation_only({0.0, 0.0, 1.8});
  sensor.validate();

  const PoseSE3 pose = PoseSE3::from_yaw(0.3, {5.0, 1.0, 0.0});
  const double time = 0.7;
  const PointCloud cloud = raytrace_analytic(world, sensor, pose, time);
  REQUIRE(cloud.size() > 500);

  const PoseSE3 sensor_pose = pose * sensor.mount;
  for (const SemanticPoint& p : cloud.points) {
    const Eigen::Vector3d world_point = sensor_pose.apply(p.position());
    CHECK(distance_to_surface(world, world_point, time) < 1e-9);
  }
}

TEST_CASE("moving primitives follow their velocity") {
  SynthWorld world;
  Primitive car;
  car.shape = Primitive::Shape::Box;
  car.semantic_class = synth_class::kCar;
  car.instance_id = 5;
  car.dynamic = true;
  car.center = {10.0, 0.0, 0.75};
  car.half_extent = {2.0, 1.0, 0.75};
  car.velocity = {2.0, 0.0, 0.0};
  world.primitives.push_back(car);

  const SensorModel sensor = single_beam_sensor(0.0, 0.75);
  const PointCloud at0 = raytrace_analytic(world, sensor, PoseSE3::identity(), 0.0);
  const PointCloud at1 = raytrace_analytic(world, sensor, PoseSE3::identity(), 1.0);
  REQUIRE(at0.size() == 1);
  REQUIRE(at1.size() == 1);
  CHECK(at0.points[0].position().norm() == doctest::Approx(8.0));
  CHECK(at1.points[0].position().norm() == doctest::Approx(10.0));

  const PointCloud statics_only =
      raytrace_analytic(world, sensor, PoseSE3::identity(), 0.0, false);
  CHECK(statics_only.empty());
}

TEST_CASE("distance_to_class_boundary separates road and terrain") {
  const SynthWorld world = plane_only_world();
  // A road point 1 m from the road edge (half width 4).
  CHECK(distance_to_class_boundary(world, {0.0, 3.0, 0.0}, synth_class::kRoad, 0.0) ==
        doctest::Approx(1.0));
  // A terrain point 2 m outside the road.
  CHECK(distance_to_class_boundary(world, {0.0, 6.0, 0.0}, synth_class::kTerrain,
                                   0.0) == doctest::Approx(2.0));
}

TEST_CASE("world json round trip") {
  const SynthWorld world = generate_world(9, Complexity::Small);
  const fs::path path = fs::temp_directory_path() / "relidar_world.json";
  write_world(world, path.string());
  const SynthWorld back = read_world(path.string());
  REQUIRE(back.primitives.size() == world.primitives.size());
  for (std::size_t i = 0; i < world.primitives.size(); ++i) {
    CHECK(back.primitives[i].shape == world.primitives[i].shape);
    CHECK(back.primitives[i].center == world.primitives[i].center);
    CHECK(back.primitives[i].half_extent == world.primitives[i].half_extent);
    CHECK(back.primitives[i].dynamic == world.primitives[i].dynamic);
  }
}

TEST_CASE("emit_sequence produces a loadable dataset") {
  const fs::path dir = fs::temp_directory_path() / "relidar_synth_seq";
  fs::remove_all(dir);

  const SynthWorld world = generate_world(21, Complexity::Small);
  SensorModel sensor;
  sensor.name = "seq16";
  for (int i = 0; i < 16; ++i) sensor.elevation_deg.push_back(4.0 - i * 1.5);
  sensor.columns = 360;
  sensor.range_min_m = 0.5;
  sensor.range_max_m = 60.0;
  sensor.mount = PoseSE3::translation_only({0.0, 0.0, 1.8});
  sensor.validate();

  SynthSequenceParams params;
  params.frames = 5;
  emit_sequence(world, sensor, params, dir.string());

  const SequenceManifest manifest = read_manifest((dir / "manifest.json").string());
  REQUIRE(manifest.frames.size() == 5);
  CHECK(manifest.sensor == "seq16");
  CHECK_FALSE(manifest.dynamic_instance_ids.empty());

  const PointCloud frame = manifest.load_frame(0);
  CHECK(frame.size() > 100);

  const auto cuboids = read_cuboids((dir / "cuboids.jsonl").string());
  CHECK_FALSE(cuboids.empty());

  // Cuboids are expressed in the sensor frame: the frame's dynamic points
  // must fall inside their instance's cuboid.
  for (const auto& [frame_index, cuboid] : cuboids) {
    if (frame_index != 0) continue;
    for (const SemanticPoint& p : frame.points) {
      if (p.instance_id == cuboid.instance_id) {
        CHECK(cuboid.contains(p.position(), 1e-6));
      }
    }
  }
}
