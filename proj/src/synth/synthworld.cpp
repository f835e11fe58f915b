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

#include "relidar/synth/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "relidar/core/parallel.hpp"
#include "relidar/core/projection.hpp"
#include "relidar/ingest/cuboids.hpp"
#include "relidar/ingest/kitti.hpp"
#include "relidar/ingest/manifest.hpp"

namespace relidar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRayEps = 1e-9;

std::optional<double> intersect_ground(const Primitive& g, const Eigen::Vector3d& o,
                                       const Eigen::Vector3d& d) {
  if (std::abs(d.z()) < 1e-15) return std::nullopt;
  const double s = (g.ground_z - o.z()) / d.z();
  if (s <= kRayEps) return std::nullopt;
  return s;
}

std::optional<double> intersect_box(const Eigen::Vector3d& center,
                                    const Eigen::Vector3d& half,
                                    const Eigen::Vector3d& o,
                                    const Eigen::Vector3d& d) {
  double tnear = -std::numeric_limits<double>::infinity();
  double tfar = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double lo = center[a] - half[a];
    const double hi = center[a] + half[a];
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < lo || o[a] > hi) return std::nullopt;
      continue;
    }
    double t1 = (lo - o[a]) / d[a];
    double t2 = (hi - o[a]) / d[a];
    if (t1 > t2) std::swap(t1, t2);
    tnear = std::max(tnear, t1);
    tfar = std::min(tfar, t2);
    if (tnear > tfar) return std::nullopt;
  }
  if (tnear <= kRayEps) return std::nullopt;  // origin inside or behind
  return tnear;
}

std::optional<double> intersect_cylinder(const Eigen::Vector3d& center, double radius,
                                         double z0, double z1, const Eigen::Vector3d& o,
                                         const Eigen::Vector3d& d) {
  std::optional<double> best;
  // Lateral surface.
  const double a = d.x() * d.x() + d.y() * d.y();
  if (a > 1e-15) {
    const double ox = o.x() - center.x();
    const double oy = o.y() - center.y();
    const double b = 2.0 * (ox * d.x() + oy * d.y());
    const double c = ox * ox + oy * oy - radius * radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (const double s : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (s <= kRayEps) continue;
        const double z = o.z() + s * d.z();
        if (z < z0 || z > z1) continue;
        if (!best || s < *best) best = s;
        break;  // roots are ordered; the first valid is the nearest
      }
    }
  }
  // Top cap.
  if (std::abs(d.z()) > 1e-15) {
    const double s = (z1 - o.z()) / d.z();
    if (s > kRayEps && (!best || s < *best)) {
      const double px = o.x() + s * d.x() - center.x();
      const double py = o.y() + s * d.y() - center.y();
      if (px * px + py * py <= radius * radius) best = s;
    }
  }
  return best;
}

double point_to_box_surface(const Eigen::Vector3d& p, const Eigen::Vector3d& center,
                            const Eigen::Vector3d& half) {
  const Eigen::Vector3d q = (p - center).cwiseAbs() - half;
  const Eigen::Vector3d outside = q.cwiseMax(0.0);
  const double inside = std::min(q.maxCoeff(), 0.0);
  return std::abs(outside.norm() + inside);
}

double point_to_cylinder_surface(const Eigen::Vector3d& p, const Eigen::Vector3d& center,
                                 double radius, double z0, double z1) {
  const double dxy =
      std::hypot(p.x() - center.x(), p.y() - center.y()) - radius;
  const double dz = std::max(z0 - p.z(), p.z() - z1);
  const double outside =
      std::hypot(std::max(dxy, 0.0), std::max(dz, 0.0));
  const double inside = std::min(std::max(dxy, dz), 0.0);
  return std::abs(outside + inside);
}

// Distance to the road strip or to the terrain complement of the ground.
double point_to_ground_part(const Eigen::Vector3d& p, const Primitive& g, bool road) {
  const double dz = std::abs(p.z() - g.ground_z);
  const double dy = road ? std::max(std::abs(p.y()) - g.road_half_width, 0.0)
                         : std::max(g.road_half_width - std::abs(p.y()), 0.0);
  return std::hypot(dz, dy);
}

}  // namespace

std::vector<std::uint32_t> SynthWorld::dynamic_instance_ids() const {
  std::vector<std::uint32_t> ids;
  for (const Primitive& p : primitives) {
    if (p.dynamic) ids.push_back(p.instance_id);
  }
  return ids;
}

SynthWorld generate_world(std::uint64_t seed, Complexity complexity) {
  SynthWorld world;
  world.seed = seed;
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  std::uint32_t next_instance = 1;

  Primitive ground;
  ground.shape = Primitive::Shape::Ground;
  ground.semantic_class = synth_class::kRoad;
  ground.terrain_class = synth_class::kTerrain;
  ground.instance_id = kNoInstance;
  ground.ground_z = 0.0;
  ground.road_half_width = uniform(3.5, 5.0);
  ground.intensity = static_cast<float>(uniform(0.3, 0.45));
  ground.terrain_intensity = static_cast<float>(uniform(0.15, 0.3));
  world.primitives.push_back(ground);

  const int boxes = complexity == Complexity::Small ? 5 : 14;
  const int cylinders = complexity == Complexity::Small ? 5 : 12;
  const int dynamics = complexity == Complexity::Small ? 2 : 6;

  std::vector<Eigen::Vector2d> placed;
  auto place_off_road = [&](double min_separation) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double x = uniform(-12.0, 42.0);
      const double side = uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      const double y = side * uniform(ground.road_half_width + 2.5, 24.0);
      bool ok = true;
      for (const auto& q : placed) {
        if ((q - Eigen::Vector2d(x, y)).norm() < min_separation) {
          ok = false;
          break;
        }
      }
      if (ok) {
        placed.emplace_back(x, y);
        return Eigen::Vector2d(x, y);
      }
    }
    const Eigen::Vector2d fallback(uniform(-12.0, 42.0),
                                   ground.road_half_width + 3.0 + placed.size());
    placed.push_back(fallback);
    return fallback;
  };

  for (int b = 0; b < boxes; ++b) {
    Primitive box;
    box.shape = Primitive::Shape::Box;
    box.semantic_class = synth_class::kStructure;
    box.instance_id = next_instance++;
    box.intensity = static_cast<float>(uniform(0.4, 0.9));
    const Eigen::Vector2d xy = place_off_road(5.0);
    const double hx = uniform(1.0, 2.6);
    const double hy = uniform(1.0, 2.6);
    const double hz = uniform(1.0, 2.2);
    box.center = {xy.x(), xy.y(), hz};
    box.half_extent = {hx, hy, hz};
    world.primitives.push_back(box);
  }

  for (int c = 0; c < cylinders; ++c) {
    Primitive cyl;
    cyl.shape = Primitive::Shape::Cylinder;
    cyl.semantic_class = synth_class::kNature;
    cyl.instance_id = next_instance++;
    cyl.intensity = static_cast<float>(uniform(0.2, 0.6));
    const Eigen::Vector2d xy = place_off_road(4.0);
    cyl.radius = uniform(0.45, 0.9);
    const double hz = uniform(1.2, 2.6);
    cyl.center = {xy.x(), xy.y(), hz};
    cyl.half_extent = {cyl.radius, cyl.radius, hz};
    world.primitives.push_back(cyl);
  }

  for (int d = 0; d < dynamics; ++d) {
    Primitive obj;
    obj.shape = Primitive::Shape::Box;
    obj.dynamic = true;
    obj.instance_id = next_instance++;
    const bool car = d % 2 == 0;
    obj.semantic_class = car ? synth_class::kCar : synth_class::kPedestrian;
    obj.intensity = static_cast<float>(uniform(0.35, 0.8));
    const double lane = uniform(0.0, 1.0) < 0.5 ? -0.5 : 0.5;
    const double y = lane * ground.road_half_width;
    const double x = uniform(4.0, 34.0);
    if (car) {
      obj.half_extent = {2.25, 0.95, 0.75};
      obj.velocity = {uniform(3.0, 8.0) * (lane < 0 ? 1.0 : -1.0), 0.0, 0.0};
    } else {
      obj.half_extent = {0.3, 0.3, 0.85};
      obj.velocity = {uniform(0.5, 1.5), 0.0, 0.0};
    }
    obj.center = {x, y, obj.half_extent.z()};
    world.primitives.push_back(obj);
  }
  return world;
}

std::optional<RayHit> raytrace_ray(const SynthWorld& world, const Eigen::Vector3d& origin,
                                   const Eigen::Vector3d& direction, double max_range,
                                   double time_s, bool include_dynamic) {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < world.primitives.size(); ++i) {
    const Primitive& prim = world.primitives[i];
    if (prim.dynamic && !include_dynamic) continue;

    std::optional<double> s;
    const Eigen::Vector3d center = prim.center_at(time_s);
    switch (prim.shape) {
      case Primitive::Shape::Ground:
        s = intersect_ground(prim, origin, direction);
        break;
      case Primitive::Shape::Box:
        s = intersect_box(center, prim.half_extent, origin, direction);
        break;
      case Primitive::Shape::Cylinder:
        s = intersect_cylinder(center, prim.radius, center.z() - prim.half_extent.z(),
                               center.z() + prim.half_extent.z(), origin, direction);
        break;
    }
    if (!s || *s > max_range) continue;
    if (best && *s >= best->range) continue;

    RayHit hit;
    hit.range = *s;
    hit.point = origin + *s * direction;
    hit.primitive = static_cast<int>(i);
    hit.instance_id = prim.instance_id;
    if (prim.shape == Primitive::Shape::Ground &&
        std::abs(hit.point.y()) > prim.road_half_width) {
      hit.semantic_class = prim.terrain_class;
      hit.intensity = prim.terrain_intensity;
    } else {
      hit.semantic_class = prim.semantic_class;
      hit.intensity = prim.intensity;
    }
    best = hit;
  }
  return best;
}

PointCloud raytrace_analytic(const SynthWorld& world, const SensorModel& sensor,
                             const PoseSE3& vehicle_pose, double time_s,
                             bool include_dynamic) {
  const PoseSE3 sensor_pose = vehicle_pose * sensor.mount;
  const Eigen::Vector3d origin = sensor_pose.translation();

  PointCloud cloud;
  cloud.frame = Frame::Sensor;
  const int rows = sensor.rows();
  const int cols = sensor.columns;
  std::vector<std::vector<SemanticPoint>> per_row(rows);

  parallel_for(static_cast<std::size_t>(rows), [&](std::size_t begin, std::size_t end) {
    for (std::size_t row = begin; row < end; ++row) {
      auto& out = per_row[row];
      for (int col = 0; col < cols; ++col) {
        const double az =
            sensor.azimuth_min_deg + (col + 0.5) * sensor.azimuth_step_deg();
        const Eigen::Vector3d dir_sensor =
            beam_direction(az, sensor.elevation_deg[row]);
        const Eigen::Vector3d dir_world = sensor_pose.rotation() * dir_sensor;
        const auto hit = raytrace_ray(world, origin, dir_world, sensor.range_max_m,
                                      time_s, include_dynamic);
        if (!hit || hit->range < sensor.range_min_m) continue;
        SemanticPoint p;
        const Eigen::Vector3d ps = hit->range * dir_sensor;
        p.x = ps.x();
        p.y = ps.y();
        p.z = ps.z();
        p.intensity = hit->intensity;
        p.semantic_class = hit->semantic_class;
        p.instance_id = hit->instance_id;
        out.push_back(p);
      }
    }
  });
  for (auto& row_points : per_row) {
    cloud.points.insert(cloud.points.end(), row_points.begin(), row_points.end());
  }
  return cloud;
}

double distance_to_class_boundary(const SynthWorld& world, const Eigen::Vector3d& point,
                                  std::uint32_t point_class, double time_s) {
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& prim : world.primitives) {
    const Eigen::Vector3d center = prim.center_at(time_s);
    switch (prim.shape) {
      case Primitive::Shape::Ground: {
        if (prim.semantic_class != point_class) {
          best = std::min(best, point_to_ground_part(point, prim, true));
        }
        if (prim.terrain_class != point_class) {
          best = std::min(best, point_to_ground_part(point, prim, false));
        }
        break;
      }
      case Primitive::Shape::Box: {
        if (prim.semantic_class == point_class) break;
        best = std::min(best, point_to_box_surface(point, center, prim.half_extent));
        break;
      }
      case Primitive::Shape::Cylinder: {
        if (prim.semantic_class == point_class) break;
        best = std::min(best,
                        point_to_cylinder_surface(point, center, prim.radius,
                                                  center.z() - prim.half_extent.z(),
                                                  center.z() + prim.half_extent.z()));
        break;
      }
    }
  }
  return best;
}

double distance_to_surface(const SynthWorld& world, const Eigen::Vector3d& point,
                           double time_s, bool include_dynamic) {
  double best = std::numeric_limits<double>::infinity();
  for (const Primitive& prim : world.primitives) {
    if (prim.dynamic && !include_dynamic) continue;
    const Eigen::Vector3d center = prim.center_at(time_s);
    switch (prim.shape) {
      case Primitive::Shape::Ground:
        best = std::min(best, std::abs(point.z() - prim.ground_z));
        break;
      case Primitive::Shape::Box:
        best = std::min(best, point_to_box_surface(point, center, prim.half_extent));
        break;
      case Primitive::Shape::Cylinder:
        best = std::min(best,
                        point_to_cylinder_surface(point, center, prim.radius,
                                                  center.z() - prim.half_extent.z(),
                                                  center.z() + prim.half_extent.z()));
        break;
    }
  }
  return best;
}

void write_world(const SynthWorld& world, const std::string& path) {
  json doc;
  doc["seed"] = world.seed;
  json prims = json::array();
  for (const Primitive& p : world.primitives) {
    json e;
    switch (p.shape) {
      case Primitive::Shape::Ground: e["shape"] = "ground"; break;
      case Primitive::Shape::Box: e["shape"] = "box"; break;
      case Primitive::Shape::Cylinder: e["shape"] = "cylinder"; break;
    }
    e["class"] = p.semantic_class;
    e["instance"] = p.instance_id;
    e["intensity"] = p.intensity;
    e["dynamic"] = p.dynamic;
    e["velocity"] = {p.velocity.x(), p.velocity.y(), p.velocity.z()};
    e["center"] = {p.center.x(), p.center.y(), p.center.z()};
    e["half_extent"] = {p.half_extent.x(), p.half_extent.y(), p.half_extent.z()};
    e["radius"] = p.radius;
    e["ground_z"] = p.ground_z;
    e["road_half_width"] = p.road_half_width;
    e["terrain_class"] = p.terrain_class;
    e["terrain_intensity"] = p.terrain_intensity;
    prims.push_back(std::move(e));
  }
  doc["primitives"] = std::move(prims);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write world: " + path);
  out << doc.dump(2) << '\n';
}

SynthWorld read_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open world: " + path);
  const json doc = json::parse(in);

  SynthWorld world;
  world.seed = doc.value("seed", 0ull);
  for (const auto& e : doc.at("primitives")) {
    Primitive p;
    const std::string shape = e.at("shape").get<std::string>();
    if (shape == "ground") {
      p.shape = Primitive::Shape::Ground;
    } else if (shape == "box") {
      p.shape = Primitive::Shape::Box;
    } else if (shape == "cylinder") {
      p.shape = Primitive::Shape::Cylinder;
    } else {
      throw std::runtime_error(path + ": unknown primitive shape '" + shape + "'");
    }
    p.semantic_class = e.at("class").get<std::uint32_t>();
    p.instance_id = e.at("instance").get<std::uint32_t>();
    p.intensity = e.at("intensity").get<float>();
    p.dynamic = e.at("dynamic").get<bool>();
    const auto vel = e.at("velocity").get<std::vector<double>>();
    p.velocity = {vel.at(0), vel.at(1), vel.at(2)};
    const auto center = e.at("center").get<std::vector<double>>();
    p.center = {center.at(0), center.at(1), center.at(2)};
    const auto half = e.at("half_extent").get<std::vector<double>>();
    p.half_extent = {half.at(0), half.at(1), half.at(2)};
    p.radius = e.value("radius", 0.0);
    p.ground_z = e.value("ground_z", 0.0);
    p.road_half_width = e.value("road_half_width", 4.0);
    p.terrain_class = e.value("terrain_class", synth_class::kTerrain);
    p.terrain_intensity = e.value("terrain_intensity", 0.25f);
    world.primitives.push_back(p);
  }
  return world;
}

std::vector<PoseSE3> sequence_poses(const SynthSequenceParams& params) {
  std::vector<PoseSE3> poses;
  poses.reserve(params.frames);
  for (std::size_t i = 0; i < params.frames; ++i) {
    const double yaw =
        params.yaw_amplitude_rad * std::sin(0.35 * static_cast<double>(i));
    poses.push_back(PoseSE3::from_yaw(
        yaw, {params.frame_spacing_m * static_cast<double>(i), 0.0, 0.0}));
  }
  return poses;
}

void emit_sequence(const SynthWorld& world, const SensorModel& sensor,
                   const SynthSequenceParams& params, const std::string& out_dir) {
  if (params.frames == 0) throw std::invalid_argument("emit_sequence: zero frames");
  fs::create_directories(fs::path(out_dir) / "points");
  fs::create_directories(fs::path(out_dir) / "labels");

  const auto poses = sequence_poses(params);
  SequenceManifest manifest;
  manifest.sensor = sensor.name;
  for (const auto id : world.dynamic_instance_ids()) {
    manifest.dynamic_instance_ids.insert(id);
  }
  manifest.dynamic_class_ids = default_dynamic_classes();

  std::vector<std::pair<std::size_t, Cuboid>> cuboids;
  for (std::size_t i = 0; i < params.frames; ++i) {
    const double t = params.frame_dt_s * static_cast<double>(i);
    const PointCloud frame = raytrace_analytic(world, sensor, poses[i], t, true);

    char name[32];
    std::snprintf(name, sizeof(name), "%06zu", i);
    const std::string point_rel = std::string("points/") + name + ".bin";
    const std::string label_rel = std::string("labels/") + name + ".label";
    write_kitti_frame(frame, (fs::path(out_dir) / point_rel).string(),
                      (fs::path(out_dir) / label_rel).string());

    FrameEntry entry;
    entry.point_file = point_rel;
    entry.label_file = label_rel;
    entry.pose = poses[i];
    entry.timestamp = t;
    manifest.frames.push_back(std::move(entry));

    // Dynamic boxes as sensor-frame ground-truth cuboids.
    const PoseSE3 sensor_pose = poses[i] * sensor.mount;
    const PoseSE3 world_to_sensor = sensor_pose.inverse();
    for (const Primitive& prim : world.primitives) {
      if (!prim.dynamic || prim.shape != Primitive::Shape::Box) continue;
      Cuboid c;
      c.center = world_to_sensor.apply(prim.center_at(t));
      c.size = 2.0 * prim.half_extent;
      const Eigen::Matrix3d& r = world_to_sensor.rotation();
      c.yaw_rad = std::atan2(r(1, 0), r(0, 0));  // box is world-axis aligned
      c.semantic_class = prim.semantic_class;
      c.instance_id = prim.instance_id;
      c.score = 1.0;
      cuboids.emplace_back(i, c);
    }
  }
  write_poses(poses, (fs::path(out_dir) / "poses.txt").string());
  write_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  write_cuboids(cuboids, (fs::path(out_dir) / "cuboids.jsonl").string());
  write_world(world, (fs::path(out_dir) / "world.json").string());
}

}  // namespace relidar
