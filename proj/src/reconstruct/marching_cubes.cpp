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

#include "relidar/reconstruct/marching_cubes.hpp"

#include <cmath>
#include <unordered_map>

#include "mc_tables.hpp"
#include "relidar/core/parallel.hpp"

namespace relidar {

namespace {

// Lattice offsets of the 8 cell corners, same order as the case tables.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

struct SlabOutput {
  std::vector<std::uint64_t> vertex_keys;
  std::vector<Eigen::Vector3d> vertex_positions;
  std::vector<std::array<std::uint64_t, 3>> triangles;  // edge keys
};

// Global key of a lattice edge: base lattice point plus axis.
std::uint64_t edge_key(const TsdfVolume& vol, int ci, int cj, int ck, int edge) {
  const auto [a, b] = mc::kEdgeCorners[edge];
  const int ax = ci + kCorner[a][0], ay = cj + kCorner[a][1], az = ck + kCorner[a][2];
  const int bx = ci + kCorner[b][0], by = cj + kCorner[b][1], bz = ck + kCorner[b][2];
  const int gx = std::min(ax, bx), gy = std::min(ay, by), gz = std::min(az, bz);
  int axis = 0;
  if (ay != by) axis = 1;
  if (az != bz) axis = 2;
  const auto ny = static_cast<std::uint64_t>(vol.dims()[1] + 1);
  const auto nz = static_cast<std::uint64_t>(vol.dims()[2] + 1);
  return ((static_cast<std::uint64_t>(gx) * ny + gy) * nz + gz) * 3 + axis;
}

void process_slab(const TsdfVolume& vol, int i_begin, int i_end, SlabOutput& out) {
  const auto& dims = vol.dims();
  const auto& sdf = vol.sdf();
  const auto& weight = vol.weight();

  std::unordered_map<std::uint64_t, std::uint32_t> local_index;
  float corner_sdf[8];
  std::uint32_t edge_vertex[12];

  for (int i = i_begin; i < i_end; ++i) {
    for (int j = 0; j + 1 < dims[1]; ++j) {
      for (int k = 0; k + 1 < dims[2]; ++k) {
        bool observed = true;
        int case_index = 0;
        for (int c = 0; c < 8; ++c) {
          const std::size_t idx =
              vol.index(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          if (weight[idx] <= 0.0f) {
            observed = false;
            break;
          }
          corner_sdf[c] = sdf[idx];
          if (corner_sdf[c] < 0.0f) case_index |= 1 << c;
        }
        if (!observed) continue;
        const std::uint16_t edges = mc::edge_mask(case_index);
        if (edges == 0) continue;

        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1u << e))) continue;
          const std::uint64_t key = edge_key(vol, i, j, k, e);
          auto it = local_index.find(key);
          if (it != local_index.end()) {
            edge_vertex[e] = it->second;
            continue;
          }
          const auto [a, b] = mc::kEdgeCorners[e];
          const double va = corner_sdf[a];
          const double vb = corner_sdf[b];
          double t = 0.5;
          if (std::abs(vb - va) > 1e-12) t = va / (va - vb);
          if (t < 0.0) t = 0.0;
          if (t > 1.0) t = 1.0;
          const Eigen::Vector3d pa =
              vol.voxel_center(i + kCorner[a][0], j + kCorner[a][1], k + kCorner[a][2]);
          const Eigen::Vector3d pb =
              vol.voxel_center(i + kCorner[b][0], j + kCorner[b][1], k + kCorner[b][2]);
          const auto local = static_cast<std::uint32_t>(out.vertex_keys.size());
          out.vertex_keys.push_back(key);
          out.vertex_positions.push_back(pa + t * (pb - pa));
          local_index.emplace(key, local);
          edge_vertex[e] = local;
        }

        const auto* tri = mc::kTriTable[case_index];
        for (int t3 = 0; tri[t3] >= 0; t3 += 3) {
          out.triangles.push_back({out.vertex_keys[edge_vertex[tri[t3]]],
                                   out.vertex_keys[edge_vertex[tri[t3 + 1]]],
                                   out.vertex_keys[edge_vertex[tri[t3 + 2]]]});
        }
      }
    }
  }
}

}  // namespace

LabeledMesh marching_cubes(const TsdfVolume& volume) {
  const auto& dims = volume.dims();
  LabeledMesh mesh;
  if (dims[0] < 2 || dims[1] < 2 || dims[2] < 2) return mesh;

  const auto cells_x = static_cast<std::size_t>(dims[0] - 1);
  std::vector<SlabOutput> slabs(chunk_count(cells_x));
  parallel_chunks(cells_x, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    process_slab(volume, static_cast<int>(begin), static_cast<int>(end), slabs[chunk]);
  });

  // Deterministic weld: slabs merge in order, first occurrence of a key wins.
  std::unordered_map<std::uint64_t, std::uint32_t> global_index;
  for (const SlabOutput& slab : slabs) {
    for (std::size_t v = 0; v < slab.vertex_keys.size(); ++v) {
      const std::uint64_t key = slab.vertex_keys[v];
      if (global_index.find(key) != global_index.end()) continue;
      global_index.emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
      mesh.vertices.push_back(slab.vertex_positions[v]);
    }
  }
  for (const SlabOutput& slab : slabs) {
    for (const auto& tri : slab.triangles) {
      const std::uint32_t a = global_index.at(tri[0]);
      const std::uint32_t b = global_index.at(tri[1]);
      const std::uint32_t c = global_index.at(tri[2]);
      if (a == b || b == c || a == c) continue;  // collapsed on a shared corner
      mesh.triangles.push_back({a, b, c});
    }
  }
  return mesh;
}

}  // namespace relidar
