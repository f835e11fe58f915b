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

#include "relidar/reconstruct/mesh.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relidar {

namespace {

const char* kVertexProps[] = {"x", "y", "z", "intensity", "semantic_class",
                              "instance_id"};

void put_f32(std::string& out, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

void put_u16(std::string& out, std::uint16_t v) {
  char buf[2];
  buf[0] = static_cast<char>(v & 0xFF);
  buf[1] = static_cast<char>((v >> 8) & 0xFF);
  out.append(buf, 2);
}

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.append(buf, 4);
}

float take_f32(const char*& p) {
  float v;
  std::memcpy(&v, p, 4);
  p += 4;
  return v;
}

std::uint16_t take_u16(const char*& p) {
  const auto b0 = static_cast<std::uint8_t>(p[0]);
  const auto b1 = static_cast<std::uint8_t>(p[1]);
  p += 2;
  return static_cast<std::uint16_t>(b0 | (b1 << 8));
}

std::uint32_t take_u32(const char*& p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
  }
  p += 4;
  return v;
}

void write_vertex_block(std::string& body, const std::vector<Eigen::Vector3d>& vertices,
                        const std::vector<float>& intensity,
                        const std::vector<std::uint32_t>& classes,
                        const std::vector<std::uint32_t>& instances) {
  const bool with_attrs = !intensity.empty();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    put_f32(body, static_cast<float>(vertices[i].x()));
    put_f32(body, static_cast<float>(vertices[i].y()));
    put_f32(body, static_cast<float>(vertices[i].z()));
    put_f32(body, with_attrs ? intensity[i] : 0.0f);
    const std::uint32_t cls = with_attrs ? classes[i] : 0;
    const std::uint32_t inst = with_attrs ? instances[i] : 0;
    if (cls > 0xFFFFu || inst > 0xFFFFu) {
      throw std::runtime_error("PLY vertex attribute does not fit uint16");
    }
    put_u16(body, static_cast<std::uint16_t>(cls));
    put_u16(body, static_cast<std::uint16_t>(inst));
  }
}

std::string ply_header(std::size_t vertex_count, std::size_t face_count,
                       bool with_faces) {
  std::ostringstream h;
  h << "ply\nformat binary_little_endian 1.0\n";
  h << "element vertex " << vertex_count << '\n';
  h << "property float x\nproperty float y\nproperty float z\n";
  h << "property float intensity\n";
  h << "property ushort semantic_class\nproperty ushort instance_id\n";
  if (with_faces) {
    h << "element face " << face_count << '\n';
    h << "property list uchar uint vertex_indices\n";
  }
  h << "end_header\n";
  return h.str();
}

}  // namespace

void LabeledMesh::validate() const {
  for (const auto& tri : triangles) {
    for (std::uint32_t idx : tri) {
      if (idx >= vertices.size()) {
        throw std::runtime_error("mesh triangle index out of range");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw std::runtime_error("mesh triangle with repeated vertex indices");
    }
  }
  const bool attrs_empty =
      semantic_class.empty() && instance_id.empty() && intensity.empty();
  if (!attrs_empty && !has_attributes()) {
    throw std::runtime_error("mesh attribute arrays do not match vertex count");
  }
}

void write_mesh_ply(const LabeledMesh& mesh, const std::string& path) {
  mesh.validate();
  std::string body;
  body.reserve(mesh.vertices.size() * 20 + mesh.triangles.size() * 13);
  write_vertex_block(body, mesh.vertices, mesh.intensity, mesh.semantic_class,
                     mesh.instance_id);
  for (const auto& tri : mesh.triangles) {
    body.push_back(static_cast<char>(3));
    put_u32(body, tri[0]);
    put_u32(body, tri[1]);
    put_u32(body, tri[2]);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write PLY: " + path);
  out << ply_header(mesh.vertices.size(), mesh.triangles.size(), true);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("short write on PLY: " + path);
}

void write_cloud_ply(const std::vector<Eigen::Vector3d>& points,
                     const std::vector<float>& intensity,
                     const std::vector<std::uint32_t>& semantic_class,
                     const std::vector<std::uint32_t>& instance_id,
                     const std::string& path) {
  std::string body;
  body.reserve(points.size() * 20);
  write_vertex_block(body, points, intensity, semantic_class, instance_id);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write PLY: " + path);
  out << ply_header(points.size(), 0, false);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("short write on PLY: " + path);
}

LabeledMesh read_mesh_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open PLY: " + path);

  std::string line;
  std::size_t vertex_count = 0, face_count = 0;
  std::size_t vertex_prop = 0;
  bool in_faces = false;
  bool header_done = false;

  if (!std::getline(in, line) || line != "ply") {
    throw std::runtime_error(path + ": not a PLY file");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    if (token == "comment") continue;
    if (token == "format") {
      std::string fmt;
      fields >> fmt;
      if (fmt != "binary_little_endian") {
        throw std::runtime_error(path + ": only binary_little_endian is supported");
      }
    } else if (token == "element") {
      std::string kind;
      std::size_t count;
      fields >> kind >> count;
      if (kind == "vertex") {
        vertex_count = count;
        in_faces = false;
      } else if (kind == "face") {
        face_count = count;
        in_faces = true;
      } else {
        throw std::runtime_error(path + ": unsupported element '" + kind + "'");
      }
    } else if (token == "property") {
      if (in_faces) {
        if (line != "property list uchar uint vertex_indices") {
          throw std::runtime_error(path + ": unsupported face property layout");
        }
      } else {
        std::string type, name;
        fields >> type >> name;
        if (vertex_prop >= 6 || name != kVertexProps[vertex_prop]) {
          throw std::runtime_error(path + ": unexpected vertex property '" + name +
                                   "'");
        }
        ++vertex_prop;
      }
    } else if (token == "end_header") {
      header_done = true;
      break;
    } else {
      throw std::runtime_error(path + ": unexpected header token '" + token + "'");
    }
  }
  if (!header_done || vertex_prop != 6) {
    throw std::runtime_error(path + ": malformed PLY header");
  }

  const std::size_t vertex_bytes = vertex_count * 20;
  const std::size_t face_bytes = face_count * 13;
  std::string body(vertex_bytes + face_bytes, '\0');
  in.read(body.data(), static_cast<std::streamsize>(body.size()));
  if (static_cast<std::size_t>(in.gcount()) != body.size()) {
    throw std::runtime_error(path + ": truncated PLY body");
  }

  LabeledMesh mesh;
  mesh.vertices.resize(vertex_count);
  mesh.intensity.resize(vertex_count);
  mesh.semantic_class.resize(vertex_count);
  mesh.instance_id.resize(vertex_count);
  const char* p = body.data();
  for (std::size_t i = 0; i < vertex_count; ++i) {
    const float x = take_f32(p), y = take_f32(p), z = take_f32(p);
    mesh.vertices[i] = {x, y, z};
    mesh.intensity[i] = take_f32(p);
    mesh.semantic_class[i] = take_u16(p);
    mesh.instance_id[i] = take_u16(p);
  }
  mesh.triangles.resize(face_count);
  for (std::size_t i = 0; i < face_count; ++i) {
    const auto n = static_cast<std::uint8_t>(*p++);
    if (n != 3) throw std::runtime_error(path + ": non-triangle face");
    mesh.triangles[i] = {take_u32(p), take_u32(p), take_u32(p)};
  }
  mesh.validate();
  return mesh;
}

}  // namespace relidar
