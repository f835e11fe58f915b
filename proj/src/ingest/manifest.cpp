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

#include "relidar/ingest/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "relidar/ingest/kitti.hpp"

namespace relidar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

PoseSE3 pose_from_flat(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 12) {
    throw std::runtime_error(what + ": pose needs 12 row-major 3x4 values");
  }
  Eigen::Matrix3d r;
  Eigen::Vector3d t;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r(row, col) = v[row * 4 + col];
    t(row) = v[row * 4 + 3];
  }
  PoseSE3 pose(r, t);
  const PoseSE3 snapped = pose.orthonormalized();
  if ((snapped.rotation() - r).cwiseAbs().maxCoeff() > 1e-4) {
    throw std::runtime_error(what + ": rotation deviates from SE(3) beyond 1e-4");
  }
  return snapped;
}

std::vector<double> pose_to_flat(const PoseSE3& pose) {
  std::vector<double> v(12);
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) v[row * 4 + col] = pose.rotation()(row, col);
    v[row * 4 + 3] = pose.translation()(row);
  }
  return v;
}

}  // namespace

const std::set<std::uint32_t>& default_dynamic_classes() {
  static const std::set<std::uint32_t> classes = {252, 253, 254, 255,
                                                  256, 257, 258, 259};
  return classes;
}

std::string SequenceManifest::resolve(const std::string& relative) const {
  fs::path p(relative);
  if (p.is_absolute() || base_dir.empty()) return relative;
  return (fs::path(base_dir) / p).string();
}

std::set<std::uint32_t> SequenceManifest::dynamic_ids_for(std::size_t frame_index,
                                                          const PointCloud& cloud) const {
  std::set<std::uint32_t> ids = dynamic_instance_ids;
  if (frame_index < frames.size()) {
    const auto& extra = frames[frame_index].dynamic_instance_ids;
    ids.insert(extra.begin(), extra.end());
  }
  if (!dynamic_class_ids.empty()) {
    for (const SemanticPoint& p : cloud.points) {
      if (p.instance_id != kNoInstance &&
          dynamic_class_ids.count(p.semantic_class) > 0) {
        ids.insert(p.instance_id);
      }
    }
  }
  return ids;
}

PointCloud SequenceManifest::load_frame(std::size_t frame_index) const {
  if (frame_index >= frames.size()) {
    throw std::out_of_range("frame index " + std::to_string(frame_index) +
                            " outside manifest with " + std::to_string(frames.size()) +
                            " frames");
  }
  const FrameEntry& entry = frames[frame_index];
  std::optional<std::string> label_path;
  if (entry.label_file) label_path = resolve(*entry.label_file);
  PointCloud cloud = read_kitti_frame(resolve(entry.point_file), label_path);

  if (entry.pseudo_file) {
    const auto pseudo = read_pseudo_labels(resolve(*entry.pseudo_file), cloud.size());
    apply_pseudo_labels(cloud, pseudo);
  }
  if (intensity_divisor != 1.0) {
    for (SemanticPoint& p : cloud.points) {
      p.intensity = std::clamp(p.intensity / static_cast<float>(intensity_divisor),
                               0.0f, 1.0f);
    }
  }
  return cloud;
}

SequenceManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }

  SequenceManifest m;
  m.base_dir = fs::path(path).parent_path().string();
  if (!doc.contains("sensor")) throw std::runtime_error(path + ": missing 'sensor'");
  m.sensor = doc.at("sensor").get<std::string>();
  m.intensity_divisor = doc.value("intensity_divisor", 1.0);
  if (m.intensity_divisor <= 0.0) {
    throw std::runtime_error(path + ": intensity_divisor must be positive");
  }
  for (const auto& id : doc.value("dynamic_instance_ids", json::array())) {
    m.dynamic_instance_ids.insert(id.get<std::uint32_t>());
  }
  if (doc.contains("dynamic_class_ids")) {
    for (const auto& id : doc.at("dynamic_class_ids")) {
      m.dynamic_class_ids.insert(id.get<std::uint32_t>());
    }
  } else {
    m.dynamic_class_ids = default_dynamic_classes();
  }

  if (!doc.contains("frames") || !doc.at("frames").is_array() ||
      doc.at("frames").empty()) {
    throw std::runtime_error(path + ": manifest needs a non-empty 'frames' array");
  }
  std::size_t index = 0;
  for (const auto& f : doc.at("frames")) {
    FrameEntry entry;
    const std::string what = path + ": frame " + std::to_string(index);
    if (!f.contains("point_file")) throw std::runtime_error(what + ": missing point_file");
    entry.point_file = f.at("point_file").get<std::string>();
    if (f.contains("label_file")) entry.label_file = f.at("label_file").get<std::string>();
    if (f.contains("pseudo_file")) {
      entry.pseudo_file = f.at("pseudo_file").get<std::string>();
    }
    if (!f.contains("pose")) throw std::runtime_error(what + ": missing pose");
    entry.pose = pose_from_flat(f.at("pose").get<std::vector<double>>(), what);
    entry.timestamp = f.value("timestamp", 0.0);
    for (const auto& id : f.value("dynamic_instance_ids", json::array())) {
      entry.dynamic_instance_ids.insert(id.get<std::uint32_t>());
    }
    m.frames.push_back(std::move(entry));
    ++index;
  }
  return m;
}

void write_manifest(const SequenceManifest& manifest, const std::string& path) {
  json doc;
  doc["sensor"] = manifest.sensor;
  doc["intensity_divisor"] = manifest.intensity_divisor;
  doc["dynamic_instance_ids"] = manifest.dynamic_instance_ids;
  doc["dynamic_class_ids"] = manifest.dynamic_class_ids;
  json frames = json::array();
  for (const FrameEntry& entry : manifest.frames) {
    json f;
    f["point_file"] = entry.point_file;
    if (entry.label_file) f["label_file"] = *entry.label_file;
    if (entry.pseudo_file) f["pseudo_file"] = *entry.pseudo_file;
    f["pose"] = pose_to_flat(entry.pose);
    f["timestamp"] = entry.timestamp;
    if (!entry.dynamic_instance_ids.empty()) {
      f["dynamic_instance_ids"] = entry.dynamic_instance_ids;
    }
    frames.push_back(std::move(f));
  }
  doc["frames"] = std::move(frames);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace relidar
