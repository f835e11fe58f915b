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

#include "relidar/reconstruct/tsdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relidar/core/parallel.hpp"
#include "relidar/kernels/kernels.hpp"

namespace relidar {

namespace {

// Measured ranges are sampled bilinearly across the four beams around the
// voxel direction, with a discontinuity guard that drops neighbors farther
// than the local minimum plus the band. Nearest-beam lookup at grazing
// incidence would quantize the projective distance by up to half a channel
// gap, which smears near-horizontal surfaces.
struct BeamGrid {
  double sin_top;
  double sin_bottom;
  std::vector<double> sin_center;  // descending

  explicit BeamGrid(const SensorModel& sensor) {
    const int n = sensor.rows();
    const double top_deg =
        std::min(89.9999, sensor.elevation_deg[0] + 0.5 * sensor.gap_above_deg(0));
    const double bottom_deg = std::max(
        -89.9999, sensor.elevation_deg[n - 1] - 0.5 * sensor.gap_below_deg(n - 1));
    sin_top = std::sin(top_deg * kDegToRad);
    sin_bottom = std::sin(bottom_deg * kDegToRad);
    sin_center.resize(n);
    for (int i = 0; i < n; ++i) {
      sin_center[i] = std::sin(sensor.elevation_deg[i] * kDegToRad);
    }
  }
};

struct RowPos {
  int upper = 0;  // smaller row index (higher elevation)
  int lower = 0;
  double frac = 0.0;  // 0 at upper center, 1 at lower center
  bool ok = false;
};

RowPos row_position(const BeamGrid& grid, double sin_el) {
  RowPos pos;
  if (sin_el > grid.sin_top || sin_el < grid.sin_bottom) return pos;
  pos.ok = true;
  const int n = static_cast<int>(grid.sin_center.size());
  if (sin_el >= grid.sin_center[0]) {
    pos.upper = pos.lower = 0;
    return pos;
  }
  if (sin_el <= grid.sin_center[n - 1]) {
    pos.upper = pos.lower = n - 1;
    return pos;
  }
  // First center <= sin_el (descending list).
  const auto it = std::lower_bound(grid.sin_center.begin(), grid.sin_center.end(),
                                   sin_el, std::greater<double>());
  pos.lower = static_cast<int>(it - grid.sin_center.begin());
  pos.upper = pos.lower - 1;
  pos.frac = (grid.sin_center[pos.upper] - sin_el) /
             (grid.sin_center[pos.upper] - grid.sin_center[pos.lower]);
  return pos;
}

struct ColPos {
  int left = 0;
  int right = 0;
  double frac = 0.0;  // 0 at left center
  bool ok = false;
};

ColPos col_position(const SensorModel& sensor, double az_deg, bool full_circle) {
  ColPos pos;
  if (az_deg < sensor.azimuth_min_deg || az_deg > sensor.azimuth_max_deg) return pos;
  pos.ok = true;
  const double t =
      (az_deg - sensor.azimuth_min_deg) / sensor.azimuth_step_deg() - 0.5;
  const int cols = sensor.columns;
  if (full_circle) {
    const double f = std::floor(t);
    int c = static_cast<int>(f) % cols;
    if (c < 0) c += cols;
    pos.left = c;
    pos.right = (c + 1) % cols;
    pos.frac = t - f;
  } else {
    if (t <= 0.0) {
      pos.left = pos.right = 0;
    } else if (t >= cols - 1) {
      pos.left = pos.right = cols - 1;
    } else {
      const double f = std::floor(t);
      pos.left = static_cast<int>(f);
      pos.right = pos.left + 1;
      pos.frac = t - f;
    }
  }
  return pos;
}

// Guarded bilinear measured range; negative when unobserved. Interpolation
// is linear in inverse range, which is exact for planar surfaces even at
// grazing incidence; the guard drops neighbors across a relative inverse-
// range jump, i.e. a depth discontinuity.
double measured_range(const RangeImage& image, const RowPos& rp, const ColPos& cp,
                      double relative_guard) {
  const int rows[2] = {rp.upper, rp.lower};
  const int cols[2] = {cp.left, cp.right};
  const double wr[2] = {1.0 - rp.frac, rp.frac};
  const double wc[2] = {1.0 - cp.frac, cp.frac};

  double inv[4];
  double weight[4];
  int count = 0;
  double inv_nearest = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const double w = wr[r] * wc[c];
      if (w <= 0.0) continue;
      if (rp.upper == rp.lower && r > 0) continue;
      if (cp.left == cp.right && c > 0) continue;
      const double value = image.range(rows[r], cols[c]);
      if (value < 0.0) continue;
      inv[count] = 1.0 / value;
      weight[count] = w;
      if (count == 0 || inv[count] > inv_nearest) inv_nearest = inv[count];
      ++count;
    }
  }
  if (count == 0) return -1.0;

  // Across a discontinuity the mix would smear two surfaces; use the cell
  // the voxel direction is closest to instead.
  bool continuous = true;
  for (int i = 0; i < count; ++i) {
    if (inv_nearest - inv[i] > relative_guard * inv_nearest) {
      continuous = false;
      break;
    }
  }
  if (!continuous) {
    int best = 0;
    for (int i = 1; i < count; ++i) {
      if (weight[i] > weight[best]) best = i;
    }
    return 1.0 / inv[best];
  }

  double sum = 0.0;
  double wsum = 0.0;
  for (int i = 0; i < count; ++i) {
    sum += weight[i] * inv[i];
    wsum += weight[i];
  }
  if (wsum <= 0.0) return 1.0 / inv_nearest;
  return wsum / sum;
}

bool yaw_only(const Eigen::Matrix3d& r) {
  return r(0, 2) == 0.0 && r(1, 2) == 0.0 && r(2, 0) == 0.0 && r(2, 1) == 0.0 &&
         r(2, 2) == 1.0;
}

struct FrameSetup {
  Eigen::Matrix3d r_ws;  // world -> sensor
  Eigen::Vector3d t_ws;
  double range_max_ext2;
  double guard;
  float trunc_f;
  bool full_circle;
  BeamGrid grid;

  FrameSetup(const SensorModel& sensor, const PoseSE3& sensor_pose_world,
             double truncation)
      : grid(sensor) {
    const PoseSE3 inv = sensor_pose_world.inverse();
    r_ws = inv.rotation();
    t_ws = inv.translation();
    const double ext = sensor.range_max_m + truncation;
    range_max_ext2 = ext * ext;
    guard = 0.15;  // relative inverse-range discontinuity threshold
    trunc_f = static_cast<float>(truncation);
    full_circle = sensor.full_circle();
  }
};

void integrate_general(TsdfVolume& volume, const SensorModel& sensor,
                       const FrameSetup& setup, const RangeImage& image) {
  const auto& dims = volume.dims();
  const double voxel = volume.voxel_size();
  const Eigen::Vector3d step = setup.r_ws.col(2) * voxel;

  parallel_for(static_cast<std::size_t>(dims[0]), [&](std::size_t begin,
                                                      std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (int j = 0; j < dims[1]; ++j) {
        const Eigen::Vector3d base_w = volume.voxel_center(static_cast<int>(i), j, 0);
        const Eigen::Vector3d base_s = setup.r_ws * base_w + setup.t_ws;
        float* sdf = volume.sdf().data() + volume.index(static_cast<int>(i), j, 0);
        float* weight = volume.weight().data() + volume.index(static_cast<int>(i), j, 0);
        for (int k = 0; k < dims[2]; ++k) {
          const double x = base_s.x() + k * step.x();
          const double y = base_s.y() + k * step.y();
          const double z = base_s.z() + k * step.z();
          const double r2 = (x * x + y * y) + z * z;
          if (r2 > setup.range_max_ext2 || r2 < 1e-12) continue;
          const double r = std::sqrt(r2);
          const RowPos rp = row_position(setup.grid, z / r);
          if (!rp.ok) continue;
          const double az = std::atan2(y, x) * kRadToDeg;
          const ColPos cp = col_position(sensor, az, setup.full_circle);
          if (!cp.ok) continue;
          const double measured = measured_range(image, rp, cp, setup.guard);
          if (measured < 0.0) continue;
          const float vr = static_cast<float>(r);
          const float meas = static_cast<float>(measured);
          kernels::tsdf_update_span_varying(sdf + k, weight + k, &vr, &meas, 1,
                                            setup.trunc_f);
        }
      }
    }
  });
}

void integrate_fast_columns(TsdfVolume& volume, const SensorModel& sensor,
                            const FrameSetup& setup, const RangeImage& image) {
  const auto& dims = volume.dims();
  const double voxel = volume.voxel_size();
  const auto nz = static_cast<std::size_t>(dims[2]);

  parallel_for(static_cast<std::size_t>(dims[0]), [&](std::size_t begin,
                                                      std::size_t end) {
    std::vector<double> r_d(nz);
    std::vector<float> vr(nz);
    std::vector<float> meas(nz);
    for (std::size_t i = begin; i < end; ++i) {
      for (int j = 0; j < dims[1]; ++j) {
        const Eigen::Vector3d base_w = volume.voxel_center(static_cast<int>(i), j, 0);
        const Eigen::Vector3d base_s = setup.r_ws * base_w + setup.t_ws;
        const double x = base_s.x();
        const double y = base_s.y();
        const double rho2 = x * x + y * y;
        if (rho2 > setup.range_max_ext2) continue;

        const double az = std::atan2(y, x) * kRadToDeg;
        const ColPos cp = col_position(sensor, az, setup.full_circle);
        if (!cp.ok) continue;

        kernels::span_ranges(rho2, base_s.z(), voxel, nz, r_d.data());
        bool any = false;
        for (std::size_t k = 0; k < nz; ++k) {
          vr[k] = static_cast<float>(r_d[k]);
          meas[k] = -1.0f;
          const double z = base_s.z() + static_cast<double>(k) * voxel;
          const double r2 = rho2 + z * z;
          if (r2 > setup.range_max_ext2 || r2 < 1e-12) continue;
          const RowPos rp = row_position(setup.grid, z / r_d[k]);
          if (!rp.ok) continue;
          const double measured = measured_range(image, rp, cp, setup.guard);
          if (measured < 0.0) continue;
          meas[k] = static_cast<float>(measured);
          any = true;
        }
        if (!any) continue;

        float* sdf = volume.sdf().data() + volume.index(static_cast<int>(i), j, 0);
        float* weight = volume.weight().data() + volume.index(static_cast<int>(i), j, 0);
        kernels::tsdf_update_span_varying(sdf, weight, vr.data(), meas.data(), nz,
                                          setup.trunc_f);
      }
    }
  });
}

}  // namespace

TsdfVolume::TsdfVolume(double voxel_size, double truncation,
                       const Eigen::Vector3d& origin, const std::array<int, 3>& dims)
    : voxel_size_(voxel_size), truncation_(truncation), origin_(origin), dims_(dims) {
  if (!(voxel_size > 0.0)) throw std::invalid_argument("TSDF: voxel size must be > 0");
  if (!(truncation > 0.0)) throw std::invalid_argument("TSDF: truncation must be > 0");
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
    throw std::invalid_argument("TSDF: dims must be positive");
  }
  const std::size_t n =
      static_cast<std::size_t>(dims[0]) * dims[1] * static_cast<std::size_t>(dims[2]);
  sdf_.assign(n, 0.0f);
  weight_.assign(n, 0.0f);
}

TsdfVolume TsdfVolume::for_bounds(const Eigen::Vector3d& min, const Eigen::Vector3d& max,
                                  double voxel_size, double truncation) {
  const Eigen::Vector3d pad = Eigen::Vector3d::Constant(truncation + voxel_size);
  const Eigen::Vector3d lo = min - pad;
  const Eigen::Vector3d hi = max + pad;
  std::array<int, 3> dims;
  for (int a = 0; a < 3; ++a) {
    dims[a] = std::max(1, static_cast<int>(std::ceil((hi[a] - lo[a]) / voxel_size)));
  }
  return TsdfVolume(voxel_size, truncation, lo, dims);
}

void integrate_frame(TsdfVolume& volume, const SensorModel& sensor,
                     const PoseSE3& sensor_pose_world, const RangeImage& image,
                     IntegratePath path) {
  if (image.rows() != sensor.rows() || image.cols() != sensor.columns) {
    throw std::invalid_argument("integrate_frame: image does not match sensor grid");
  }
  if (!sensor_pose_world.valid(1e-6)) {
    throw std::invalid_argument("integrate_frame: sensor pose is not SE(3)");
  }
  const FrameSetup setup(sensor, sensor_pose_world, volume.truncation());

  const bool fast = path == IntegratePath::FastColumns ||
                    (path == IntegratePath::Auto && yaw_only(setup.r_ws));
  if (fast && !yaw_only(setup.r_ws)) {
    throw std::invalid_argument("integrate_frame: fast path needs a yaw-only pose");
  }
  if (fast) {
    integrate_fast_columns(volume, sensor, setup, image);
  } else {
    integrate_general(volume, sensor, setup, image);
  }
}

}  // namespace relidar
