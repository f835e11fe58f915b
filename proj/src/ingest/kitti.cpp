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

#include "relidar/ingest/kitti.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relidar {

namespace {

constexpr std::size_t kPointRecordBytes = 16;
constexpr std::size_t kLabelRecordBytes = 4;
constexpr std::size_t kPseudoRecordBytes = 6;

// Explicit little-endian codecs; no-ops on LE hosts but keep the formats
// well defined everywhere.

std::uint32_t read_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(static_cast<std::uint16_t>(p[0]) |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

float read_f32le(const std::uint8_t* p) {
  const std::uint32_t bits = read_u32le(p);
  float out;
  std::memcpy(&out, &bits, sizeof(out));
  return out;
}

void write_u32le(std::uint32_t v, std::uint8_t* p) {
  p[0] = static_cast<std::uint8_t>(v & 0xFF);
  p[1] = static_cast<std::uint8_t>((v >> 8) & 0xFF);
  p[2] = static_cast<std::uint8_t>((v >> 16) & 0xFF);
  p[3] = static_cast<std::uint8_t>((v >> 24) & 0xFF);
}

void write_u16le(std::uint16_t v, std::uint8_t* p) {
  p[0] = static_cast<std::uint8_t>(v & 0xFF);
  p[1] = static_cast<std::uint8_t>((v >> 8) & 0xFF);
}

void write_f32le(float v, std::uint8_t* p) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  write_u32le(bits, p);
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw std::runtime_error("short read on file: " + path);
  }
  return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  if (!bytes.empty()) {
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw std::runtime_error("short write on file: " + path);
}

PointCloud parse_kitti_frame(const std::vector<std::uint8_t>& point_bytes,
                             const std::vector<std::uint8_t>* label_bytes) {
  if (point_bytes.size() % kPointRecordBytes != 0) {
    throw std::runtime_error("point buffer size " + std::to_string(point_bytes.size()) +
                             " not divisible by 16");
  }
  const std::size_t n = point_bytes.size() / kPointRecordBytes;

  if (label_bytes) {
    if (label_bytes->size() % kLabelRecordBytes != 0) {
      throw std::runtime_error("label buffer size " +
                               std::to_string(label_bytes->size()) +
                               " not divisible by 4");
    }
    const std::size_t labels = label_bytes->size() / kLabelRecordBytes;
    if (labels != n) {
      throw std::runtime_error("point/label count mismatch: " + std::to_string(n) +
                               " points vs " + std::to_string(labels) + " labels");
    }
  }

  PointCloud cloud;
  cloud.frame = Frame::Sensor;
  cloud.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = point_bytes.data() + i * kPointRecordBytes;
    SemanticPoint& p = cloud.points[i];
    p.x = read_f32le(rec + 0);
    p.y = read_f32le(rec + 4);
    p.z = read_f32le(rec + 8);
    p.intensity = read_f32le(rec + 12);
    if (label_bytes) {
      const std::uint32_t raw = read_u32le(label_bytes->data() + i * kLabelRecordBytes);
      p.semantic_class = raw & 0xFFFFu;
      p.instance_id = raw >> 16;
    }
  }
  return cloud;
}

KittiFrameBytes serialize_kitti_frame(const PointCloud& cloud) {
  KittiFrameBytes out;
  out.points.resize(cloud.size() * kPointRecordBytes);
  out.labels.resize(cloud.size() * kLabelRecordBytes);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const SemanticPoint& p = cloud.points[i];
    if (p.semantic_class > 0xFFFFu) {
      throw std::runtime_error("semantic class " + std::to_string(p.semantic_class) +
                               " does not fit 16 bits");
    }
    if (p.instance_id > 0xFFFFu) {
      throw std::runtime_error("instance id " + std::to_string(p.instance_id) +
                               " does not fit 16 bits");
    }
    std::uint8_t* rec = out.points.data() + i * kPointRecordBytes;
    write_f32le(static_cast<float>(p.x), rec + 0);
    write_f32le(static_cast<float>(p.y), rec + 4);
    write_f32le(static_cast<float>(p.z), rec + 8);
    write_f32le(p.intensity, rec + 12);
    write_u32le(p.semantic_class | (p.instance_id << 16),
                out.labels.data() + i * kLabelRecordBytes);
  }
  return out;
}

PointCloud read_kitti_frame(const std::string& point_file,
                            const std::optional<std::string>& label_file) {
  const auto point_bytes = read_file_bytes(point_file);
  if (!label_file) return parse_kitti_frame(point_bytes, nullptr);
  const auto label_bytes = read_file_bytes(*label_file);
  try {
    return parse_kitti_frame(point_bytes, &label_bytes);
  } catch (const std::exception& e) {
    throw std::runtime_error(point_file + ": " + e.what());
  }
}

void write_kitti_frame(const PointCloud& cloud, const std::string& point_file,
                       const std::string& label_file) {
  const KittiFrameBytes bytes = serialize_kitti_frame(cloud);
  write_file_bytes(point_file, bytes.points);
  write_file_bytes(label_file, bytes.labels);
}

std::vector<PoseSE3> parse_poses(const std::string& text, const std::string& origin) {
  std::vector<PoseSE3> poses;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(fields >> v[i])) {
        throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                 ": expected 12 numeric fields");
      }
    }
    double extra;
    if (fields >> extra) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected exactly 12 fields");
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
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": rotation deviates from SE(3) beyond 1e-4");
    }
    poses.push_back(snapped);
  }
  return poses;
}

std::vector<PoseSE3> read_poses(const std::string& pose_file) {
  std::ifstream in(pose_file);
  if (!in) throw std::runtime_error("cannot open pose file: " + pose_file);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_poses(buffer.str(), pose_file);
}

void write_poses(const std::vector<PoseSE3>& poses, const std::string& pose_file) {
  std::ofstream out(pose_file, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write pose file: " + pose_file);
  out.precision(17);
  for (const PoseSE3& pose : poses) {
    const Eigen::Matrix3d& r = pose.rotation();
    const Eigen::Vector3d& t = pose.translation();
    for (int row = 0; row < 3; ++row) {
      out << r(row, 0) << ' ' << r(row, 1) << ' ' << r(row, 2) << ' ' << t(row);
      out << (row == 2 ? '\n' : ' ');
    }
  }
}

std::vector<PseudoLabel> read_pseudo_labels(const std::string& file,
                                            std::size_t expected_points) {
  const auto bytes = read_file_bytes(file);
  if (bytes.size() % kPseudoRecordBytes != 0) {
    throw std::runtime_error(file + ": size not divisible by 6-byte records");
  }
  const std::size_t n = bytes.size() / kPseudoRecordBytes;
  if (n != expected_points) {
    throw std::runtime_error(file + ": " + std::to_string(n) +
                             " pseudo labels for " + std::to_string(expected_points) +
                             " points");
  }
  std::vector<PseudoLabel> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * kPseudoRecordBytes;
    labels[i].semantic_class = read_u16le(rec);
    labels[i].confidence = read_f32le(rec + 2);
  }
  return labels;
}

void write_pseudo_labels(const std::vector<PseudoLabel>& labels,
                         const std::string& file) {
  std::vector<std::uint8_t> bytes(labels.size() * kPseudoRecordBytes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::uint8_t* rec = bytes.data() + i * kPseudoRecordBytes;
    write_u16le(labels[i].semantic_class, rec);
    write_f32le(labels[i].confidence, rec + 2);
  }
  write_file_bytes(file, bytes);
}

void apply_pseudo_labels(PointCloud& cloud, const std::vector<PseudoLabel>& labels) {
  if (labels.size() != cloud.size()) {
    throw std::runtime_error("pseudo label count " + std::to_string(labels.size()) +
                             " does not match cloud size " +
                             std::to_string(cloud.size()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    cloud.points[i].semantic_class = labels[i].semantic_class;
    cloud.points[i].confidence = labels[i].confidence;
  }
}

}  // namespace relidar
