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

#include "relidar/aggregate/aggregate.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "relidar/core/parallel.hpp"
#include "relidar/ingest/kitti.hpp"

namespace relidar {

namespace fs = std::filesystem;
using nlohmann::json;

const Eigen::Vector3d& SceneCloud::origin_for_frame(std::uint32_t frame_id) const {
  for (std::size_t i = 0; i < selected_frame_ids.size(); ++i) {
    if (selected_frame_ids[i] == frame_id) return sensor_origins[i];
  }
  throw std::out_of_range("frame " + std::to_string(frame_id) +
                          " did not contribute to this scene");
}

const PoseSE3& SceneCloud::pose_for_frame(std::uint32_t frame_id) const {
  for (std::size_t i = 0; i < selected_frame_ids.size(); ++i) {
    if (selected_frame_ids[i] == frame_id) return sensor_poses[i];
  }
  throw std::out_of_range("frame " + std::to_string(frame_id) +
                          " did not contribute to this scene");
}

Eigen::Vector3d SceneCloud::viewpoint_of(std::size_t point_index) const {
  return origin_for_frame(source_frame_ids.at(point_index));
}

PointCloud remove_dynamic(const PointCloud& cloud,
                          const std::set<std::uint32_t>& dynamic_ids) {
  PointCloud out;
  out.frame = cloud.frame;
  out.points.reserve(cloud.size());
  for (const SemanticPoint& p : cloud.points) {
    if (dynamic_ids.count(p.instance_id) == 0) out.points.push_back(p);
  }
  return out;
}

SceneCloud accumulate(const SequenceManifest& sequence, const SensorModel& sensor,
                      const AggregateParams& params) {
  if (params.stride == 0) throw std::invalid_argument("accumulate: stride must be >= 1");
  const std::size_t end = params.frame_end == 0
                              ? sequence.frames.size()
                              : std::min(params.frame_end, sequence.frames.size());
  if (params.frame_begin >= end) {
    throw std::invalid_argument("accumulate: empty frame window");
  }

  std::vector<std::size_t> selected;
  for (std::size_t i = params.frame_begin; i < end; i += params.stride) {
    selected.push_back(i);
  }

  struct FrameResult {
    PointCloud world_points;
    PoseSE3 sensor_pose;
  };
  std::vector<FrameResult> results(selected.size());

  parallel_for(selected.size(), [&](std::size_t begin, std::size_t end_chunk) {
    for (std::size_t s = begin; s < end_chunk; ++s) {
      const std::size_t frame_id = selected[s];
      const FrameEntry& entry = sequence.frames[frame_id];
      if (!entry.pose.valid(1e-4)) {
        throw std::runtime_error("accumulate: frame " + std::to_string(frame_id) +
                                 " has no valid pose");
      }
      PointCloud cloud = sequence.load_frame(frame_id);
      const auto dynamic_ids = sequence.dynamic_ids_for(frame_id, cloud);
      PointCloud static_cloud = remove_dynamic(cloud, dynamic_ids);

      const PoseSE3 sensor_pose = entry.pose * sensor.mount;
      PointCloud world = se3_apply(sensor_pose, static_cloud);
      world.frame = Frame::World;

      const Eigen::Vector3d& origin = sensor_pose.translation();
      if (params.world_radius_m > 0.0) {
        PointCloud bounded;
        bounded.frame = Frame::World;
        bounded.points.reserve(world.size());
        const double r2 = params.world_radius_m * params.world_radius_m;
        for (const SemanticPoint& p : world.points) {
          if ((p.position() - origin).squaredNorm() <= r2) bounded.points.push_back(p);
        }
        world = std::move(bounded);
      }
      results[s].world_points = std::move(world);
      results[s].sensor_pose = sensor_pose;
    }
  });

  SceneCloud scene;
  scene.cloud.frame = Frame::World;
  scene.sensor_name = sensor.name;
  std::size_t total = 0;
  for (const auto& r : results) total += r.world_points.size();
  scene.cloud.points.reserve(total);
  scene.source_frame_ids.reserve(total);
  for (std::size_t s = 0; s < selected.size(); ++s) {
    const auto frame_id = static_cast<std::uint32_t>(selected[s]);
    scene.selected_frame_ids.push_back(frame_id);
    scene.sensor_poses.push_back(results[s].sensor_pose);
    scene.sensor_origins.push_back(results[s].sensor_pose.translation());
    for (const SemanticPoint& p : results[s].world_points.points) {
      scene.cloud.points.push_back(p);
      scene.source_frame_ids.push_back(frame_id);
    }
  }
  return scene;
}

void write_scene(const SceneCloud& scene, const std::string& directory) {
  fs::create_directories(directory);
  const fs::path dir(directory);
  write_kitti_frame(scene.cloud, (dir / "scene.bin").string(),
                    (dir / "scene.label").string());

  json meta;
  meta["frame"] = "world";
  meta["sensor"] = scene.sensor_name;
  meta["source_frame_ids"] = scene.source_frame_ids;
  meta["selected_frame_ids"] = scene.selected_frame_ids;
  json poses = json::array();
  for (const auto& pose : scene.sensor_poses) {
    json flat = json::array();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) flat.push_back(pose.rotation()(row, col));
      flat.push_back(pose.translation()(row));
    }
    poses.push_back(std::move(flat));
  }
  meta["sensor_poses"] = std::move(poses);

  std::ofstream out(dir / "scene_meta.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write scene metadata in " + directory);
  out << meta.dump(2) << '\n';
}

SceneCloud read_scene(const std::string& directory) {
  const fs::path dir(directory);
  SceneCloud scene;
  scene.cloud = read_kitti_frame((dir / "scene.bin").string(),
                                 (dir / "scene.label").string());
  scene.cloud.frame = Frame::World;

  std::ifstream in(dir / "scene_meta.json");
  if (!in) throw std::runtime_error("missing scene_meta.json in " + directory);
  json meta = json::parse(in);
  scene.sensor_name = meta.value("sensor", "");
  scene.source_frame_ids = meta.at("source_frame_ids").get<std::vector<std::uint32_t>>();
  scene.selected_frame_ids =
      meta.at("selected_frame_ids").get<std::vector<std::uint32_t>>();
  for (const auto& flat : meta.at("sensor_poses")) {
    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) r(row, col) = flat.at(row * 4 + col).get<double>();
      t(row) = flat.at(row * 4 + 3).get<double>();
    }
    scene.sensor_poses.emplace_back(r, t);
    scene.sensor_origins.push_back(t);
  }
  if (scene.source_frame_ids.size() != scene.cloud.size()) {
    throw std::runtime_error("scene metadata does not match point count in " +
                             directory);
  }
  return scene;
}

}  // namespace relidar
