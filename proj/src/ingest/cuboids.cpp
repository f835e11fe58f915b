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

#include "relidar/ingest/cuboids.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace relidar {

using nlohmann::json;

Eigen::Vector3d Cuboid::to_local(const Eigen::Vector3d& point) const {
  const double c = std::cos(yaw_rad);
  const double s = std::sin(yaw_rad);
  const Eigen::Vector3d d = point - center;
  // R_yaw^T * d
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Eigen::Vector3d Cuboid::to_parent(const Eigen::Vector3d& local) const {
  const double c = std::cos(yaw_rad);
  const double s = std::sin(yaw_rad);
  return {c * local.x() - s * local.y() + center.x(),
          s * local.x() + c * local.y() + center.y(), local.z() + center.z()};
}

bool Cuboid::contains(const Eigen::Vector3d& point, double tol) const {
  const Eigen::Vector3d local = to_local(point);
  return std::abs(local.x()) <= 0.5 * size.x() + tol &&
         std::abs(local.y()) <= 0.5 * size.y() + tol &&
         std::abs(local.z()) <= 0.5 * size.z() + tol;
}

void Cuboid::validate() const {
  if (!(size.x() > 0.0 && size.y() > 0.0 && size.z() > 0.0)) {
    throw std::runtime_error("cuboid size components must be positive");
  }
  if (!(score >= 0.0 && score <= 1.0)) {
    throw std::runtime_error("cuboid score must be in [0, 1]");
  }
}

std::vector<std::pair<std::size_t, Cuboid>> read_cuboids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cuboid file: " + path);

  std::vector<std::pair<std::size_t, Cuboid>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string what = path + ":" + std::to_string(line_no);
    for (const char* key : {"frame", "center", "size", "yaw", "class", "instance"}) {
      if (!doc.contains(key)) {
        throw std::runtime_error(what + ": missing mandatory key '" + key + "'");
      }
    }
    Cuboid c;
    const auto center = doc.at("center").get<std::vector<double>>();
    const auto size = doc.at("size").get<std::vector<double>>();
    if (center.size() != 3 || size.size() != 3) {
      throw std::runtime_error(what + ": center and size need 3 values each");
    }
    c.center = {center[0], center[1], center[2]};
    c.size = {size[0], size[1], size[2]};
    c.yaw_rad = doc.at("yaw").get<double>();
    c.semantic_class = doc.at("class").get<std::uint32_t>();
    c.instance_id = doc.at("instance").get<std::uint32_t>();
    c.score = doc.value("score", 1.0);
    try {
      c.validate();
    } catch (const std::exception& e) {
      throw std::runtime_error(what + ": " + e.what());
    }
    out.emplace_back(doc.at("frame").get<std::size_t>(), c);
  }
  return out;
}

void write_cuboids(const std::vector<std::pair<std::size_t, Cuboid>>& cuboids,
                   const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write cuboid file: " + path);
  for (const auto& [frame, c] : cuboids) {
    json doc;
    doc["frame"] = frame;
    doc["center"] = {c.center.x(), c.center.y(), c.center.z()};
    doc["size"] = {c.size.x(), c.size.y(), c.size.z()};
    doc["yaw"] = c.yaw_rad;
    doc["class"] = c.semantic_class;
    doc["instance"] = c.instance_id;
    doc["score"] = c.score;
    out << doc.dump() << '\n';
  }
}

}  // namespace relidar
