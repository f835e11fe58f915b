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

#include "relidar/trace/trace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "relidar/core/parallel.hpp"
#include "relidar/kernels/kernels.hpp"

namespace relidar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AngularVertex {
  double azimuth_deg;
  double elevation_deg;
  bool near_origin;
};

std::vector<double> sub_elevations(const SensorModel& sensor, int s) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(sensor.rows()) * s);
  for (int row = 0; row < sensor.rows(); ++row) {
    for (int sub = 0; sub < s; ++sub) {
      const double delta = (sub - (s - 1) / 2.0) / s;
      const double gap =
          delta <= 0.0 ? sensor.gap_above_deg(row) : sensor.gap_below_deg(row);
      out.push_back(sensor.elevation_deg[row] - delta * gap);
    }
  }
  return out;
}

std::vector<double> sub_azimuths(const SensorModel& sensor, int s) {
  const double sub_step = sensor.azimuth_step_deg() / s;
  std::vector<double> out(static_cast<std::size_t>(sensor.columns) * s);
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = sensor.azimuth_min_deg + (static_cast<double>(c) + 0.5) * sub_step;
  }
  return out;
}

// Signed doubled area of (b - a) x (p - a) in angle space.
double edge_function(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

void rasterize_chunk(const LabeledMesh& mesh,
                     const std::vector<Eigen::Vector3d>& sensor_vertices,
                     const std::vector<AngularVertex>& angular,
                     const SensorModel& sensor, const DepthBuffer& geometry,
                     const std::vector<double>& cos_el, const std::vector<double>& sin_el,
                     const std::vector<double>& cos_az, const std::vector<double>& sin_az,
                     std::size_t tri_begin, std::size_t tri_end, bool full_circle,
                     std::vector<double>& depth, std::vector<std::int32_t>& tri_id,
                     std::atomic<std::size_t>& rejected_wide,
                     std::atomic<std::size_t>& rejected_degenerate) {
  const int sub_cols = geometry.cols;
  const double sub_step = sensor.azimuth_step_deg() / (sub_cols / sensor.columns);
  const auto& sub_elev = geometry.elevation_deg;

  for (std::size_t t = tri_begin; t < tri_end; ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d& p0 = sensor_vertices[tri[0]];
    const Eigen::Vector3d& p1 = sensor_vertices[tri[1]];
    const Eigen::Vector3d& p2 = sensor_vertices[tri[2]];

    if (angular[tri[0]].near_origin || angular[tri[1]].near_origin ||
        angular[tri[2]].near_origin) {
      rejected_degenerate.fetch_add(1, std::memory_order_relaxed);
      continue;
    }

    double az[3] = {angular[tri[0]].azimuth_deg, angular[tri[1]].azimuth_deg,
                    angular[tri[2]].azimuth_deg};
    const double el[3] = {angular[tri[0]].elevation_deg, angular[tri[1]].elevation_deg,
                          angular[tri[2]].elevation_deg};

    double az_lo = std::min({az[0], az[1], az[2]});
    double az_hi = std::max({az[0], az[1], az[2]});
    if (full_circle && az_hi - az_lo > 180.0) {
      for (double& a : az) {
        if (a < 0.0) a += 360.0;
      }
      az_lo = std::min({az[0], az[1], az[2]});
      az_hi = std::max({az[0], az[1], az[2]});
    }
    if (az_hi - az_lo > 90.0) {
      rejected_wide.fetch_add(1, std::memory_order_relaxed);
      continue;
    }

    const Eigen::Vector3d normal = (p1 - p0).cross(p2 - p0);
    const double plane_d = normal.dot(p0);
    const double normal_len = normal.norm();
    if (!(normal_len > 0.0)) {
      rejected_degenerate.fetch_add(1, std::memory_order_relaxed);
      continue;
    }
    const double denom_floor = 1e-12 * normal_len;

    const double el_lo = std::min({el[0], el[1], el[2]});
    const double el_hi = std::max({el[0], el[1], el[2]});

    // Sub-rows whose elevation lies in [el_lo, el_hi] (descending table).
    const auto row_first =
        std::lower_bound(sub_elev.begin(), sub_elev.end(), el_hi,
                         [](double a, double b) { return a > b; }) -
        sub_elev.begin();
    auto row_last = row_first;
    while (row_last < static_cast<std::ptrdiff_t>(sub_elev.size()) &&
           sub_elev[row_last] >= el_lo) {
      ++row_last;
    }
    if (row_first >= row_last) continue;

    // Sub-columns whose center azimuth falls in [az_lo, az_hi], in the
    // seam-unwrapped coordinate.
    const double t_lo = (az_lo - sensor.azimuth_min_deg) / sub_step - 0.5;
    const double t_hi = (az_hi - sensor.azimuth_min_deg) / sub_step - 0.5;
    const auto col_first = static_cast<long>(std::ceil(t_lo));
    const auto col_last = static_cast<long>(std::floor(t_hi));
    if (col_first > col_last) continue;

    for (long c_ext = col_first; c_ext <= col_last; ++c_ext) {
      long c = c_ext;
      if (c < 0 || c >= sub_cols) {
        if (!full_circle) continue;
        c = ((c_ext % sub_cols) + sub_cols) % sub_cols;
      }
      const double sample_az_ext =
          sensor.azimuth_min_deg + (static_cast<double>(c_ext) + 0.5) * sub_step;
      for (auto r = row_first; r < row_last; ++r) {
        const double sample_el = sub_elev[r];
        const double e0 =
            edge_function(az[0], el[0], az[1], el[1], sample_az_ext, sample_el);
        const double e1 =
            edge_function(az[1], el[1], az[2], el[2], sample_az_ext, sample_el);
        const double e2 =
            edge_function(az[2], el[2], az[0], el[0], sample_az_ext, sample_el);
        const bool inside = (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) ||
                            (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0);
        if (!inside) continue;

        const Eigen::Vector3d dir(cos_el[r] * cos_az[c], cos_el[r] * sin_az[c],
                                  sin_el[r]);
        const double denom = normal.dot(dir);
        if (std::abs(denom) <= denom_floor) continue;
        const double sample_depth = plane_d / denom;
        if (!(sample_depth > 0.0)) continue;

        const std::size_t idx = static_cast<std::size_t>(r) * sub_cols + c;
        if (sample_depth < depth[idx] ||
            (sample_depth == depth[idx] &&
             static_cast<std::int32_t>(t) < tri_id[idx])) {
          depth[idx] = sample_depth;
          tri_id[idx] = static_cast<std::int32_t>(t);
        }
      }
    }
  }
}

}  // namespace

DepthBuffer rasterize_spherical(const LabeledMesh& mesh, const SensorModel& sensor,
                                const TraceParams& params, RasterStats* stats) {
  if (params.supersampling < 1) {
    throw std::invalid_argument("rasterize_spherical: supersampling must be >= 1");
  }
  if (!params.virtual_pose.valid(1e-6)) {
    throw std::invalid_argument("rasterize_spherical: virtual pose is not SE(3)");
  }
  const int s = params.supersampling;

  DepthBuffer buffer;
  buffer.rows = sensor.rows() * s;
  buffer.cols = sensor.columns * s;
  buffer.elevation_deg = sub_elevations(sensor, s);
  buffer.azimuth_deg = sub_azimuths(sensor, s);
  const std::size_t cells = static_cast<std::size_t>(buffer.rows) * buffer.cols;
  buffer.depth.assign(cells, kInf);
  buffer.triangle.assign(cells, -1);

  RasterStats local;
  if (mesh.vertices.empty() || mesh.triangles.empty()) {
    if (stats) *stats = local;
    return buffer;
  }

  // Mesh vertices into the sensor frame, in bulk.
  const PoseSE3 world_to_sensor = params.virtual_pose.inverse();
  const std::size_t n = mesh.vertices.size();
  std::vector<double> wx(n), wy(n), wz(n), sx(n), sy(n), sz(n);
  for (std::size_t i = 0; i < n; ++i) {
    wx[i] = mesh.vertices[i].x();
    wy[i] = mesh.vertices[i].y();
    wz[i] = mesh.vertices[i].z();
  }
  double r[9], tr[3];
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r[row * 3 + col] = world_to_sensor.rotation()(row, col);
    tr[row] = world_to_sensor.translation()(row);
  }
  kernels::se3_transform_soa(r, tr, wx.data(), wy.data(), wz.data(), n, sx.data(),
                             sy.data(), sz.data());

  std::vector<Eigen::Vector3d> sensor_vertices(n);
  std::vector<AngularVertex> angular(n);
  std::vector<double> vertex_range(n);
  kernels::ranges_soa(sx.data(), sy.data(), sz.data(), n, vertex_range.data());
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      sensor_vertices[i] = {sx[i], sy[i], sz[i]};
      const double range = vertex_range[i];
      if (range < 1e-9) {
        angular[i] = {0.0, 0.0, true};
        continue;
      }
      const double sin_el = std::clamp(sz[i] / range, -1.0, 1.0);
      angular[i] = {std::atan2(sy[i], sx[i]) * kRadToDeg,
                    std::asin(sin_el) * kRadToDeg, false};
    }
  });

  // Per-sub-row/-column trig tables keep sample directions canonical even
  // for seam-wrapped columns.
  std::vector<double> cos_el(buffer.rows), sin_el(buffer.rows);
  for (int row = 0; row < buffer.rows; ++row) {
    cos_el[row] = std::cos(buffer.elevation_deg[row] * kDegToRad);
    sin_el[row] = std::sin(buffer.elevation_deg[row] * kDegToRad);
  }
  std::vector<double> cos_az(buffer.cols), sin_az(buffer.cols);
  for (int col = 0; col < buffer.cols; ++col) {
    cos_az[col] = std::cos(buffer.azimuth_deg[col] * kDegToRad);
    sin_az[col] = std::sin(buffer.azimuth_deg[col] * kDegToRad);
  }

  std::atomic<std::size_t> rejected_wide{0};
  std::atomic<std::size_t> rejected_degenerate{0};
  const std::size_t chunks = chunk_count(mesh.triangles.size());

  if (chunks == 1) {
    rasterize_chunk(mesh, sensor_vertices, angular, sensor, buffer, cos_el, sin_el,
                    cos_az, sin_az, 0, mesh.triangles.size(), sensor.full_circle(),
                    buffer.depth, buffer.triangle, rejected_wide, rejected_degenerate);
  } else {
    std::vector<std::vector<double>> depths(chunks);
    std::vector<std::vector<std::int32_t>> tri_ids(chunks);
    parallel_chunks(mesh.triangles.size(),
                    [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                      depths[chunk].assign(cells, kInf);
                      tri_ids[chunk].assign(cells, -1);
                      rasterize_chunk(mesh, sensor_vertices, angular, sensor, buffer,
                                      cos_el, sin_el, cos_az, sin_az, begin, end,
                                      sensor.full_circle(), depths[chunk],
                                      tri_ids[chunk], rejected_wide,
                                      rejected_degenerate);
                    });
    // Ordered min-merge; ties keep the earlier chunk, i.e. the lower id.
    std::vector<std::uint8_t> sel(cells);
    for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
      kernels::min_select(buffer.depth.data(), depths[chunk].data(), cells,
                          buffer.depth.data(), sel.data());
      for (std::size_t i = 0; i < cells; ++i) {
        if (sel[i]) buffer.triangle[i] = tri_ids[chunk][i];
      }
    }
  }

  local.rejected_wide = rejected_wide.load();
  local.rejected_degenerate = rejected_degenerate.load();
  if (stats) *stats = local;
  return buffer;
}

TracedImage subsample_to_sensor(const DepthBuffer& buffer, const SensorModel& sensor,
                                const TraceParams& params) {
  const int s = params.supersampling;
  if (buffer.rows != sensor.rows() * s || buffer.cols != sensor.columns * s) {
    throw std::invalid_argument("subsample_to_sensor: buffer does not match sensor");
  }

  TracedImage out;
  out.image = RangeImage(sensor.rows(), sensor.columns);
  const std::size_t cells = out.image.cell_count();
  out.triangle.assign(cells, -1);
  out.sample_azimuth_deg.assign(cells, 0.0);
  out.sample_elevation_deg.assign(cells, 0.0);

  parallel_for(static_cast<std::size_t>(sensor.rows()), [&](std::size_t begin,
                                                            std::size_t end) {
    for (std::size_t row = begin; row < end; ++row) {
      for (int col = 0; col < sensor.columns; ++col) {
        const double beam_az =
            sensor.azimuth_min_deg + (col + 0.5) * sensor.azimuth_step_deg();
        const Eigen::Vector3d beam_dir =
            beam_direction(beam_az, sensor.elevation_deg[row]);

        double block_min = kInf;
        double closest_depth = kInf;
        double closest_dot = -2.0;
        for (int sr = 0; sr < s; ++sr) {
          for (int sc = 0; sc < s; ++sc) {
            const int brow = static_cast<int>(row) * s + sr;
            const int bcol = col * s + sc;
            const std::size_t idx = buffer.index(brow, bcol);
            if (buffer.triangle[idx] < 0) continue;
            if (buffer.depth[idx] < block_min) block_min = buffer.depth[idx];
            const Eigen::Vector3d dir = beam_direction(buffer.azimuth_deg[bcol],
                                                       buffer.elevation_deg[brow]);
            const double dot = dir.dot(beam_dir);
            if (dot > closest_dot) {
              closest_dot = dot;
              closest_depth = buffer.depth[idx];
            }
          }
        }
        if (!(block_min < kInf)) continue;
        if (block_min < sensor.range_min_m - kRangeSlack ||
            block_min > sensor.range_max_m + kRangeSlack) {
          continue;  // nearest surface outside the sensor's range window
        }
        // The beam's own view decides visibility: when the angularly closest
        // sample sees past the range limit, or the exact-center sample of an
        // odd block sees nothing at all, the cell stays empty instead of
        // borrowing an off-axis return.
        if (closest_depth > sensor.range_max_m + kRangeSlack) continue;
        if (s % 2 == 1) {
          const std::size_t center_idx = buffer.index(
              static_cast<int>(row) * s + (s - 1) / 2, col * s + (s - 1) / 2);
          if (buffer.triangle[center_idx] < 0) continue;
        }
        const double band = std::max(params.band_m, params.relative_band * block_min);
        const double depth_cap =
            std::min(block_min + band, sensor.range_max_m + kRangeSlack);

        double best_dot = -2.0;
        double best_depth = 0.0;
        std::int32_t best_tri = -1;
        double best_az = 0.0, best_el = 0.0;
        for (int sr = 0; sr < s; ++sr) {
          for (int sc = 0; sc < s; ++sc) {
            const int brow = static_cast<int>(row) * s + sr;
            const int bcol = col * s + sc;
            const std::size_t idx = buffer.index(brow, bcol);
            if (buffer.triangle[idx] < 0) continue;
            const double depth = buffer.depth[idx];
            if (depth > depth_cap) continue;
            const Eigen::Vector3d dir = beam_direction(buffer.azimuth_deg[bcol],
                                                       buffer.elevation_deg[brow]);
            const double dot = dir.dot(beam_dir);
            if (dot > best_dot) {
              best_dot = dot;
              best_depth = depth;
              best_tri = buffer.triangle[idx];
              best_az = buffer.azimuth_deg[bcol];
              best_el = buffer.elevation_deg[brow];
            }
          }
        }
        if (best_tri < 0) continue;

        const Eigen::Vector3d p =
            backproject(sensor, static_cast<int>(row), col, best_depth);
        SemanticPoint point;
        point.x = p.x();
        point.y = p.y();
        point.z = p.z();
        out.image.set_cell(static_cast<int>(row), col, best_depth, point,
                           kTagGenerated);
        const std::size_t cell = out.image.index(static_cast<int>(row), col);
        out.triangle[cell] = best_tri;
        out.sample_azimuth_deg[cell] = best_az;
        out.sample_elevation_deg[cell] = best_el;
      }
    }
  });
  return out;
}

PointCloud trace_sensor(const LabeledMesh& mesh, const SensorModel& sensor,
                        const TraceParams& params, TraceStats* stats) {
  if (!mesh.triangles.empty() && !mesh.has_attributes()) {
    throw std::invalid_argument("trace_sensor: mesh has no vertex attributes");
  }
  TraceStats local;
  const DepthBuffer buffer = rasterize_spherical(mesh, sensor, params, &local.raster);
  TracedImage traced = subsample_to_sensor(buffer, sensor, params);

  const PoseSE3 world_to_sensor = params.virtual_pose.inverse();
  for (int row = 0; row < traced.image.rows(); ++row) {
    for (int col = 0; col < traced.image.cols(); ++col) {
      if (!traced.image.valid(row, col)) continue;
      const std::size_t cell = traced.image.index(row, col);
      const std::int32_t tri_index = traced.triangle[cell];
      const auto& tri = mesh.triangles[tri_index];

      const Eigen::Vector3d hit =
          beam_direction(traced.sample_azimuth_deg[cell],
                         traced.sample_elevation_deg[cell]) *
          traced.image.range(row, col);

      std::uint32_t best_vertex = tri[0];
      double best_d2 = kInf;
      for (const std::uint32_t v : tri) {
        const Eigen::Vector3d vs = world_to_sensor.apply(mesh.vertices[v]);
        const double d2 = (vs - hit).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && v < best_vertex)) {
          best_d2 = d2;
          best_vertex = v;
        }
      }
      SemanticPoint point = traced.image.point(row, col);
      point.intensity = mesh.intensity[best_vertex];
      point.semantic_class = mesh.semantic_class[best_vertex];
      point.instance_id = mesh.instance_id[best_vertex];
      point.confidence = 1.0f;
      traced.image.set_cell(row, col, traced.image.range(row, col), point,
                            kTagGenerated);
      ++local.valid_cells;
    }
  }
  if (stats) *stats = local;
  return traced.image.flatten();
}

}  // namespace relidar
