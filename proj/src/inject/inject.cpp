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

#include "relidar/inject/inject.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "relidar/ingest/kitti.hpp"

namespace relidar {

namespace fs = std::filesystem;
using nlohmann::json;

void InstanceBank::rebuild_class_index() {
  by_class.clear();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    by_class[entries[i].cuboid.semantic_class].push_back(i);
  }
}

std::vector<InstanceBank::Entry> extract_instances(const PointCloud& frame,
                                                   const std::vector<Cuboid>& cuboids,
                                                   std::size_t source_frame,
                                                   const ExtractParams& params,
                                                   ExtractStats* stats) {
  ExtractStats local;
  std::vector<InstanceBank::Entry> out;
  std::uint32_t next_instance = 1;

  for (const Cuboid& cuboid : cuboids) {
    cuboid.validate();
    if (cuboid.score < params.score_threshold) {
      ++local.below_score;
      continue;
    }
    InstanceBank::Entry entry;
    entry.cuboid = cuboid;
    entry.source_frame = source_frame;
    entry.points.frame = frame.frame;
    for (const SemanticPoint& p : frame.points) {
      if (!cuboid.contains(p.position(), params.containment_tol)) continue;
      const Eigen::Vector3d local_pos = cuboid.to_local(p.position());
      SemanticPoint q = p;
      q.x = local_pos.x();
      q.y = local_pos.y();
      q.z = local_pos.z();
      q.semantic_class = cuboid.semantic_class;
      q.instance_id = next_instance;
      entry.points.points.push_back(q);
    }
    if (entry.points.size() < params.min_points) {
      ++local.below_min_points;
      continue;
    }
    ++next_instance;
    out.push_back(std::move(entry));
  }
  if (stats) *stats = local;
  return out;
}

PointCloud inject_instances(const PointCloud& scene_frame, const SensorModel& sensor,
                            const InstanceBank& bank, const InjectionPolicy& policy,
                            std::uint64_t frame_index, InjectStats* stats) {
  if (scene_frame.frame != Frame::Sensor) {
    throw std::invalid_argument("inject_instances: scene frame must be sensor-frame");
  }

  std::uint32_t max_instance = 0;
  for (const SemanticPoint& p : scene_frame.points) {
    max_instance = std::max(max_instance, p.instance_id);
  }
  std::uint32_t next_instance = max_instance + 1;

  // One stream per (seed, frame), so frames are independent of each other
  // and of how many frames a worker handled before this one.
  std::seed_seq seq{policy.seed, frame_index};
  std::mt19937_64 rng(seq);

  InjectStats local;
  PointCloud combined = scene_frame;
  for (const auto& [semantic_class, rate] : policy.rates) {
    if (rate < 0.0) {
      throw std::invalid_argument("inject_instances: negative rate for class " +
                                  std::to_string(semantic_class));
    }
    if (rate == 0.0) continue;
    const auto it = bank.by_class.find(semantic_class);
    std::poisson_distribution<int> poisson(rate);
    const int draws = poisson(rng);
    if (it == bank.by_class.end() || it->second.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, it->second.size() - 1);
    for (int d = 0; d < draws; ++d) {
      const InstanceBank::Entry& entry = bank.entries[it->second[pick(rng)]];
      const std::uint32_t instance = next_instance++;
      for (const SemanticPoint& p : entry.points.points) {
        const Eigen::Vector3d sensor_pos = entry.cuboid.to_parent(p.position());
        SemanticPoint q = p;
        q.x = sensor_pos.x();
        q.y = sensor_pos.y();
        q.z = sensor_pos.z();
        q.instance_id = instance;
        combined.points.push_back(q);
      }
      ++local.drawn;
      ++local.drawn_per_class[semantic_class];
    }
  }

  // Injected objects occlude the background and vice versa.
  const RangeImage image = build_range_image(sensor, combined);
  if (stats) *stats = local;
  return image.flatten();
}

void write_bank(const InstanceBank& bank, const std::string& directory) {
  fs::create_directories(fs::path(directory) / "entries");
  json index;
  json entries = json::array();
  for (std::size_t i = 0; i < bank.entries.size(); ++i) {
    const auto& entry = bank.entries[i];
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu", i);
    const std::string points_rel = std::string("entries/") + name + ".bin";
    const std::string labels_rel = std::string("entries/") + name + ".label";
    write_kitti_frame(entry.points, (fs::path(directory) / points_rel).string(),
                      (fs::path(directory) / labels_rel).string());
    json e;
    e["points"] = points_rel;
    e["labels"] = labels_rel;
    e["source_frame"] = entry.source_frame;
    e["center"] = {entry.cuboid.center.x(), entry.cuboid.center.y(),
                   entry.cuboid.center.z()};
    e["size"] = {entry.cuboid.size.x(), entry.cuboid.size.y(), entry.cuboid.size.z()};
    e["yaw"] = entry.cuboid.yaw_rad;
    e["class"] = entry.cuboid.semantic_class;
    e["instance"] = entry.cuboid.instance_id;
    e["score"] = entry.cuboid.score;
    entries.push_back(std::move(e));
  }
  index["entries"] = std::move(entries);
  std::ofstream out(fs::path(directory) / "bank_index.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write bank index in " + directory);
  out << index.dump(2) << '\n';
}

InstanceBank read_bank(const std::string& directory) {
  std::ifstream in(fs::path(directory) / "bank_index.json");
  if (!in) throw std::runtime_error("missing bank_index.json in " + directory);
  const json index = json::parse(in);

  InstanceBank bank;
  for (const auto& e : index.at("entries")) {
    InstanceBank::Entry entry;
    entry.points = read_kitti_frame(
        (fs::path(directory) / e.at("points").get<std::string>()).string(),
        (fs::path(directory) / e.at("labels").get<std::string>()).string());
    entry.source_frame = e.at("source_frame").get<std::size_t>();
    const auto center = e.at("center").get<std::vector<double>>();
    const auto size = e.at("size").get<std::vector<double>>();
    entry.cuboid.center = {center.at(0), center.at(1), center.at(2)};
    entry.cuboid.size = {size.at(0), size.at(1), size.at(2)};
    entry.cuboid.yaw_rad = e.at("yaw").get<double>();
    entry.cuboid.semantic_class = e.at("class").get<std::uint32_t>();
    entry.cuboid.instance_id = e.at("instance").get<std::uint32_t>();
    entry.cuboid.score = e.at("score").get<double>();
    bank.entries.push_back(std::move(entry));
  }
  bank.rebuild_class_index();
  return bank;
}

}  // namespace relidar
