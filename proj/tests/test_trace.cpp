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

#include <algorithm>
#include <cmath>
#include <limits>

#include "relidar/core/parallel.hpp"
#include "relidar/synth/synthworld.hpp"
#include "relidar/trace/trace.hpp"

using namespace relidar;

namespace {

SensorModel grid_sensor(int rows = 8, int cols = 90) {
  SensorModel s;
  s.name = "grid";
  for (int i = 0; i < rows; ++i) {
    s.elevation_deg.push_back(7.0 - 2.0 * i);  // +7 .. -7
  }
  s.columns = cols;
  s.range_min_m = 0.5;
  s.range_max_m = 60.0;
  s.validate();
  return s;
}

// Rectangle in the x = distance plane spanning |y|, z in the given bounds.
LabeledMesh wall_mesh(double distance, double y_half, double z_lo, double z_hi,
                      std::uint32_t cls = 6, float intensity = 0.5f) {
  LabeledMesh mesh;
  mesh.vertices = {{distance, -y_half, z_lo},
                   {distance, y_half, z_lo},
                   {distance, y_half, z_hi},
                   {distance, -y_half, z_hi}};
  mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
  mesh.semantic_class.assign(4, cls);
  mesh.instance_id.assign(4, 0);
  mesh.intensity.assign(4, intensity);
  return mesh;
}

LabeledMesh merge(const LabeledMesh& a, const LabeledMesh& b) {
  LabeledMesh out = a;
  const auto base = static_cast<std::uint32_t>(a.vertices.size());
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  out.semantic_class.insert(out.semantic_class.end(), b.semantic_class.begin(),
                            b.semantic_class.end());
  out.instance_id.insert(out.instance_id.end(), b.instance_id.begin(),
                         b.instance_id.end());
  out.intensity.insert(out.intensity.end(), b.intensity.begin(), b.intensity.end());
  for (const auto& tri : b.triangles) {
    out.triangles.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
  }
  return out;
}

}  // namespace

TEST_CASE("empty mesh rasterizes to an empty buffer and cloud") {
  const SensorModel sensor = grid_sensor();
  TraceParams params;
  const DepthBuffer buffer = rasterize_spherical(LabeledMesh{}, sensor, params);
  for (const auto t : buffer.triangle) CHECK(t == -1);
  const PointCloud cloud = trace_sensor(LabeledMesh{}, sensor, params);
  CHECK(cloud.empty());
}

TEST_CASE("wall samples carry the exact ray-plane depth") {
  const SensorModel sensor = grid_sensor();
  const LabeledMesh mesh = wall_mesh(10.0, 8.0, -3.0, 3.0);
  TraceParams params;
  params.supersampling = 3;
  RasterStats stats;
  const DepthBuffer buffer = rasterize_spherical(mesh, sensor, params, &stats);
  CHECK(stats.rejected_wide == 0);

  std::size_t covered = 0;
  for (int r = 0; r < buffer.rows; ++r) {
    for (int c = 0; c < buffer.cols; ++c) {
      const std::size_t idx = buffer.index(r, c);
      if (buffer.triangle[idx] < 0) continue;
      ++covered;
      const double cos_el = std::cos(buffer.elevation_deg[r] * kDegToRad);
      const double cos_az = std::cos(buffer.azimuth_deg[c] * kDegToRad);
      const double expected = 10.0 / (cos_el * cos_az);
      CHECK(std::abs(buffer.depth[idx] - expected) < 1e-9);
    }
  }
  CHECK(covered > 100);
}

TEST_CASE("nearer wall wins the depth competition") {
  const SensorModel sensor = grid_sensor();
  // Narrow near wall in front of a wide far wall; each triangle stays well
  // under the 90 degree azimuth subtense limit.
  const LabeledMesh near = wall_mesh(5.0, 2.0, -3.0, 3.0, 1);
  const LabeledMesh far = wall_mesh(10.0, 6.0, -3.0, 3.0, 2);
  const LabeledMesh both = merge(far, near);  // far first, ids must not matter

  TraceParams params;
  const PointCloud cloud = trace_sensor(both, sensor, params);
  REQUIRE_FALSE(cloud.empty());
  const double near_limit = std::atan2(2.0, 5.0) * kRadToDeg;
  bool saw_near = false, saw_far = false;
  for (const SemanticPoint& p : cloud.points) {
    const double az = std::abs(std::atan2(p.y, p.x)) * kRadToDeg;
    if (az < near_limit - 1.0) {
      CHECK(p.semantic_class == 1);  // covered by both: nearer wall wins
      CHECK(p.position().norm() < 7.0);
      saw_near = true;
    } else if (az > near_limit + 1.0) {
      CHECK(p.semantic_class == 2);  // only the far wall reaches here
      saw_far = true;
    }
  }
  CHECK(saw_near);
  CHECK(saw_far);
}

TEST_CASE("subsample keeps the block minimum band and the closest direction") {
  SensorModel sensor = grid_sensor(1, 1);
  sensor.azimuth_min_deg = -0.5;
  sensor.azimuth_max_deg = 0.5;
  sensor.elevation_deg = {0.0};

  TraceParams params;
  params.supersampling = 3;
  params.band_m = 0.2;

  DepthBuffer buffer;
  buffer.rows = 3;
  buffer.cols = 3;
  buffer.depth.assign(9, std::numeric_limits<double>::infinity());
  buffer.triangle.assign(9, -1);
  // Reuse the real sub-angle layout.
  const DepthBuffer layout = rasterize_spherical(LabeledMesh{}, sensor, params);
  buffer.elevation_deg = layout.elevation_deg;
  buffer.azimuth_deg = layout.azimuth_deg;

  SUBCASE("uniform block keeps the center sample") {
    for (int i = 0; i < 9; ++i) {
      buffer.depth[i] = 10.0;
      buffer.triangle[i] = i;
    }
    const TracedImage traced = subsample_to_sensor(buffer, sensor, params);
    REQUIRE(traced.image.valid(0, 0));
    CHECK(traced.image.range(0, 0) == 10.0);
    CHECK(traced.triangle[0] == 4);  // center of the 3x3 block
  }

  SUBCASE("background corner outside the band is ignored") {
    for (int i = 0; i < 9; ++i) {
      buffer.depth[i] = 10.0;
      buffer.triangle[i] = 1;
    }
    buffer.depth[4] = 50.0;  // center looks past the silhouette
    buffer.triangle[4] = 2;
    const TracedImage traced = subsample_to_sensor(buffer, sensor, params);
    REQUIRE(traced.image.valid(0, 0));
    CHECK(traced.image.range(0, 0) == 10.0);
    CHECK(traced.triangle[0] == 1);
  }

  SUBCASE("all-invalid block stays invalid") {
    const TracedImage traced = subsample_to_sensor(buffer, sensor, params);
    CHECK_FALSE(traced.image.valid(0, 0));
  }

  SUBCASE("surfaces outside range limits invalidate the cell") {
    for (int i = 0; i < 9; ++i) {
      buffer.depth[i] = 0.2;  // closer than range_min
      buffer.triangle[i] = 1;
    }
    CHECK_FALSE(subsample_to_sensor(buffer, sensor, params).image.valid(0, 0));
    for (int i = 0; i < 9; ++i) buffer.depth[i] = 100.0;  // beyond range_max
    CHECK_FALSE(subsample_to_sensor(buffer, sensor, params).image.valid(0, 0));
  }
}

TEST_CASE("trace output reprojects to one point per cell") {
  const SensorModel sensor = grid_sensor();
  const LabeledMesh mesh = wall_mesh(12.0, 10.0, -3.5, 3.5);
  TraceParams params;
  const PointCloud cloud = trace_sensor(mesh, sensor, params);
  REQUIRE_FALSE(cloud.empty());

  BuildStats stats;
  const RangeImage image = build_range_image(sensor, cloud, &stats);
  CHECK(stats.dropped_out_of_view == 0);
  CHECK(stats.cell_conflicts == 0);
  CHECK(image.valid_count() == cloud.size());
}

TEST_CASE("trace attributes come from the hit triangle's nearest vertex") {
  const SensorModel sensor = grid_sensor();
  LabeledMesh mesh = wall_mesh(10.0, 8.0, -3.0, 3.0);
  // Left vertices class 1, right vertices class 2.
  mesh.semantic_class = {1, 2, 2, 1};
  const PointCloud cloud = trace_sensor(mesh, sensor, TraceParams{});
  REQUIRE_FALSE(cloud.empty());
  for (const SemanticPoint& p : cloud.points) {
    // Left of the sensor (y < 0) is nearer to the class-1 vertices.
    if (p.y < -1.0) CHECK(p.semantic_class == 1);
    if (p.y > 1.0) CHECK(p.semantic_class == 2);
  }
}

TEST_CASE("seam-spanning walls rasterize behind the sensor") {
  const SensorModel sensor = grid_sensor();
  // Wall behind the sensor at x = -8, crossing the +-180 azimuth seam.
  LabeledMesh mesh = wall_mesh(-8.0, 6.0, -2.5, 2.5);
  const PointCloud cloud = trace_sensor(mesh, sensor, TraceParams{});
  REQUIRE_FALSE(cloud.empty());
  for (const SemanticPoint& p : cloud.points) {
    CHECK(p.x < 0.0);
    CHECK(std::abs(std::abs(std::atan2(p.y, p.x) * kRadToDeg) - 180.0) < 45.0);
  }
}

TEST_CASE("triangles subtending over 90 degrees are rejected and counted") {
  const SensorModel sensor = grid_sensor();
  LabeledMesh mesh;
  // A huge triangle wrapping most of the horizon around the sensor.
  mesh.vertices = {{10.0, -100.0, 0.0}, {10.0, 100.0, 0.0}, {-100.0, 0.0, 1.0}};
  mesh.triangles = {{0, 1, 2}};
  mesh.semantic_class.assign(3, 1);
  mesh.instance_id.assign(3, 0);
  mesh.intensity.assign(3, 0.5f);

  RasterStats stats;
  rasterize_spherical(mesh, sensor, TraceParams{}, &stats);
  CHECK(stats.rejected_wide == 1);
}

TEST_CASE("tracing is deterministic across worker counts") {
  const SensorModel sensor = grid_sensor();
  LabeledMesh mesh = merge(wall_mesh(10.0, 8.0, -3.0, 3.0, 1),
                           wall_mesh(6.0, 2.0, -1.0, 1.0, 2));
  TraceParams params;

  set_worker_count(1);
  const PointCloud one = trace_sensor(mesh, sensor, params);
  set_worker_count(4);
  const PointCloud four = trace_sensor(mesh, sensor, params);
  set_worker_count(0);

  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one.points[i] == four.points[i]);
  }
}

TEST_CASE("supersampling cannot worsen the synthetic-world median error") {
  // Miniature end-to-end: trace a hand-built exact world mesh at
  // supersampling 1 and 3 and compare median range errors per beam.
  const SynthWorld world = generate_world(5, Complexity::Small);
  SensorModel sensor = grid_sensor(24, 360);
  sensor.range_max_m = 30.0;
  sensor.elevation_deg.clear();
  for (int i = 0; i < 24; ++i) sensor.elevation_deg.push_back(4.0 - i * 1.1);
  sensor.mount = PoseSE3::translation_only({0.0, 0.0, 1.7});
  sensor.validate();

  // Mesh the world's boxes exactly (walls only), so the only error source is
  // the angular sampling itself.
  LabeledMesh mesh;
  auto add_quad = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                      const Eigen::Vector3d& c, const Eigen::Vector3d& d,
                      std::uint32_t cls) {
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.insert(mesh.vertices.end(), {a, b, c, d});
    mesh.triangles.push_back({base, base + 1, base + 2});
    mesh.triangles.push_back({base, base + 2, base + 3});
    for (int v = 0; v < 4; ++v) {
      mesh.semantic_class.push_back(cls);
      mesh.instance_id.push_back(0);
      mesh.intensity.push_back(0.5f);
    }
  };
  for (const Primitive& prim : world.primitives) {
    if (prim.shape != Primitive::Shape::Box || prim.dynamic) continue;
    const Eigen::Vector3d c = prim.center;
    const Eigen::Vector3d h = prim.half_extent;
    for (int side = -1; side <= 1; side += 2) {
      add_quad({c.x() + side * h.x(), c.y() - h.y(), c.z() - h.z()},
               {c.x() + side * h.x(), c.y() + h.y(), c.z() - h.z()},
               {c.x() + side * h.x(), c.y() + h.y(), c.z() + h.z()},
               {c.x() + side * h.x(), c.y() - h.y(), c.z() + h.z()},
               prim.semantic_class);
      add_quad({c.x() - h.x(), c.y() + side * h.y(), c.z() - h.z()},
               {c.x() + h.x(), c.y() + side * h.y(), c.z() - h.z()},
               {c.x() + h.x(), c.y() + side * h.y(), c.z() + h.z()},
               {c.x() - h.x(), c.y() + side * h.y(), c.z() + h.z()},
               prim.semantic_class);
    }
  }
  REQUIRE_FALSE(mesh.triangles.empty());

  auto median_error = [&](int supersampling) {
    TraceParams params;
    params.supersampling = supersampling;
    params.virtual_pose = sensor.mount;
    const PointCloud generated = trace_sensor(mesh, sensor, params);
    const RangeImage gen = build_range_image(sensor, generated);
    std::vector<double> errors;
    for (int r = 0; r < gen.rows(); ++r) {
      for (int c = 0; c < gen.cols(); ++c) {
        if (!gen.valid(r, c)) continue;
        const double az =
            sensor.azimuth_min_deg + (c + 0.5) * sensor.azimuth_step_deg();
        const Eigen::Vector3d dir =
            sensor.mount.rotation() * beam_direction(az, sensor.elevation_deg[r]);
        const auto hit = raytrace_ray(world, sensor.mount.translation(), dir,
                                      sensor.range_max_m, 0.0, false);
        if (!hit) {
          errors.push_back(1e9);
          continue;
        }
        errors.push_back(std::abs(gen.range(r, c) - hit->range));
      }
    }
    REQUIRE_FALSE(errors.empty());
    std::sort(errors.begin(), errors.end());
    return errors[errors.size() / 2];
  };

  const double coarse = median_error(1);
  const double fine = median_error(3);
  CHECK(fine <= coarse + 1e-12);
}

TEST_CASE("supersampling 1 equals the beam grid") {
  const SensorModel sensor = grid_sensor();
  const LabeledMesh mesh = wall_mesh(10.0, 8.0, -3.0, 3.0);
  TraceParams params;
  params.supersampling = 1;
  const DepthBuffer buffer = rasterize_spherical(mesh, sensor, params);
  CHECK(buffer.rows == sensor.rows());
  CHECK(buffer.cols == sensor.columns);
  for (int r = 0; r < buffer.rows; ++r) {
    CHECK(buffer.elevation_deg[r] == sensor.elevation_deg[r]);
  }
  const PointCloud cloud = trace_sensor(mesh, sensor, params);
  CHECK_FALSE(cloud.empty());
}
