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

// SIMD kernel variants. This translation unit is compiled with -mavx2 on
// x86-64 (NEON is implied on aarch64) and must only be entered through the
// runtime dispatch in kernels.cpp. Element semantics are shared with the
// scalar reference via kernels_impl.hpp; outputs are bit-identical.

#include <experimental/simd>

#include "kernels_impl.hpp"

namespace stdx = std::experimental;

namespace relidar::kernels::detail {

namespace {
using dsimd = stdx::native_simd<double>;
using fsimd = stdx::native_simd<float>;
constexpr std::size_t kDLanes = dsimd::size();
constexpr std::size_t kFLanes = fsimd::size();
}  // namespace

void ranges_soa_simd(const double* x, const double* y, const double* z,
                     std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + kDLanes <= n; i += kDLanes) {
    dsimd vx, vy, vz;
    vx.copy_from(x + i, stdx::element_aligned);
    vy.copy_from(y + i, stdx::element_aligned);
    vz.copy_from(z + i, stdx::element_aligned);
    const dsimd r = stdx::sqrt((vx * vx + vy * vy) + vz * vz);
    r.copy_to(out + i, stdx::element_aligned);
  }
  for (; i < n; ++i) out[i] = range_step(x[i], y[i], z[i]);
}

void se3_transform_soa_simd(const double r[9], const double t[3], const double* x,
                            const double* y, const double* z, std::size_t n,
                            double* ox, double* oy, double* oz) {
  std::size_t i = 0;
  for (; i + kDLanes <= n; i += kDLanes) {
    dsimd vx, vy, vz;
    vx.copy_from(x + i, stdx::element_aligned);
    vy.copy_from(y + i, stdx::element_aligned);
    vz.copy_from(z + i, stdx::element_aligned);
    const dsimd rx = ((r[0] * vx + r[1] * vy) + r[2] * vz) + t[0];
    const dsimd ry = ((r[3] * vx + r[4] * vy) + r[5] * vz) + t[1];
    const dsimd rz = ((r[6] * vx + r[7] * vy) + r[8] * vz) + t[2];
    rx.copy_to(ox + i, stdx::element_aligned);
    ry.copy_to(oy + i, stdx::element_aligned);
    rz.copy_to(oz + i, stdx::element_aligned);
  }
  for (; i < n; ++i) se3_step(r, t, x[i], y[i], z[i], ox[i], oy[i], oz[i]);
}

void min_select_simd(const double* a, const double* b, std::size_t n, double* out,
                     std::uint8_t* sel) {
  std::size_t i = 0;
  for (; i + kDLanes <= n; i += kDLanes) {
    dsimd va, vb;
    va.copy_from(a + i, stdx::element_aligned);
    vb.copy_from(b + i, stdx::element_aligned);
    const auto a_wins = (va >= 0.0) && ((vb < 0.0) || (va <= vb));
    dsimd result = vb;
    stdx::where(a_wins, result) = va;
    result.copy_to(out + i, stdx::element_aligned);
    for (std::size_t k = 0; k < kDLanes; ++k) sel[i + k] = a_wins[k] ? 0 : 1;
  }
  for (; i < n; ++i) min_select_step(a[i], b[i], out[i], sel[i]);
}

void span_ranges_simd(double rho2, double z0, double dz, std::size_t n, double* out) {
  dsimd lane_index([](auto k) { return static_cast<double>(k); });
  std::size_t i = 0;
  for (; i + kDLanes <= n; i += kDLanes) {
    const dsimd zi = z0 + (static_cast<double>(i) + lane_index) * dz;
    const dsimd r = stdx::sqrt(rho2 + zi * zi);
    r.copy_to(out + i, stdx::element_aligned);
  }
  for (; i < n; ++i) out[i] = span_range_step(rho2, z0, dz, i);
}

void tsdf_update_span_simd(float* sdf, float* weight, const float* voxel_range,
                           std::size_t n, float measured_range, float truncation) {
  std::size_t i = 0;
  for (; i + kFLanes <= n; i += kFLanes) {
    fsimd vr, vs, vw;
    vr.copy_from(voxel_range + i, stdx::element_aligned);
    vs.copy_from(sdf + i, stdx::element_aligned);
    vw.copy_from(weight + i, stdx::element_aligned);
    fsimd d = measured_range - vr;
    const auto active = d >= -truncation;
    stdx::where(d > truncation, d) = fsimd(truncation);
    const fsimd updated = (vs * vw + d) / (vw + 1.0f);
    stdx::where(active, vs) = updated;
    stdx::where(active, vw) = vw + 1.0f;
    vs.copy_to(sdf + i, stdx::element_aligned);
    vw.copy_to(weight + i, stdx::element_aligned);
  }
  for (; i < n; ++i) {
    tsdf_step(sdf[i], weight[i], voxel_range[i], measured_range, truncation);
  }
}

void tsdf_update_span_varying_simd(float* sdf, float* weight,
                                   const float* voxel_range,
                                   const float* measured_range, std::size_t n,
                                   float truncation) {
  std::size_t i = 0;
  for (; i + kFLanes <= n; i += kFLanes) {
    fsimd vr, vs, vw, vm;
    vr.copy_from(voxel_range + i, stdx::element_aligned);
    vs.copy_from(sdf + i, stdx::element_aligned);
    vw.copy_from(weight + i, stdx::element_aligned);
    vm.copy_from(measured_range + i, stdx::element_aligned);
    fsimd d = vm - vr;
    const auto active = (vm >= 0.0f) && (d >= -truncation);
    stdx::where(d > truncation, d) = fsimd(truncation);
    const fsimd updated = (vs * vw + d) / (vw + 1.0f);
    stdx::where(active, vs) = updated;
    stdx::where(active, vw) = vw + 1.0f;
    vs.copy_to(sdf + i, stdx::element_aligned);
    vw.copy_to(weight + i, stdx::element_aligned);
  }
  for (; i < n; ++i) {
    tsdf_step(sdf[i], weight[i], voxel_range[i], measured_range[i], truncation);
  }
}

}  // namespace relidar::kernels::detail
