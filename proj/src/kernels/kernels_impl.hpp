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

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

// Scalar element steps shared by the reference loops and the SIMD tails.
// Keeping these in one place is what makes the two backends bit-identical.

namespace relidar::kernels::detail {

inline double range_step(double x, double y, double z) {
  return std::sqrt((x * x + y * y) + z * z);
}

inline void se3_step(const double r[9], const double t[3], double x, double y,
                     double z, double& ox, double& oy, double& oz) {
  ox = ((r[0] * x + r[1] * y) + r[2] * z) + t[0];
  oy = ((r[3] * x + r[4] * y) + r[5] * z) + t[1];
  oz = ((r[6] * x + r[7] * y) + r[8] * z) + t[2];
}

inline void min_select_step(double a, double b, double& out, std::uint8_t& sel) {
  const bool a_wins = a >= 0.0 && (b < 0.0 || a <= b);
  out = a_wins ? a : b;
  sel = a_wins ? 0 : 1;
}

inline double span_range_step(double rho2, double z0, double dz, std::size_t i) {
  const double z = z0 + static_cast<double>(i) * dz;
  return std::sqrt(rho2 + z * z);
}

inline void tsdf_step(float& sdf, float& weight, float voxel_range,
                      float measured_range, float truncation) {
  if (measured_range < 0.0f) return;  // unobserved
  float d = measured_range - voxel_range;
  if (d < -truncation) return;  // behind the surface beyond the band
  if (d > truncation) d = truncation;
  const float w = weight;
  sdf = (sdf * w + d) / (w + 1.0f);
  weight = w + 1.0f;
}

// Scalar reference implementations.

void ranges_soa_scalar(const double* x, const double* y, const double* z,
                       std::size_t n, double* out);
void se3_transform_soa_scalar(const double r[9], const double t[3], const double* x,
                              const double* y, const double* z, std::size_t n,
                              double* ox, double* oy, double* oz);
void min_select_scalar(const double* a, const double* b, std::size_t n, double* out,
                       std::uint8_t* sel);
void span_ranges_scalar(double rho2, double z0, double dz, std::size_t n, double* out);
void tsdf_update_span_scalar(float* sdf, float* weight, const float* voxel_range,
                             std::size_t n, float measured_range, float truncation);
void tsdf_update_span_varying_scalar(float* sdf, float* weight,
                                     const float* voxel_range,
                                     const float* measured_range, std::size_t n,
                                     float truncation);

// SIMD variants, defined in kernels_simd.cpp when RELIDAR_HAVE_SIMD.

void ranges_soa_simd(const double* x, const double* y, const double* z,
                     std::size_t n, double* out);
void se3_transform_soa_simd(const double r[9], const double t[3], const double* x,
                            const double* y, const double* z, std::size_t n,
                            double* ox, double* oy, double* oz);
void min_select_simd(const double* a, const double* b, std::size_t n, double* out,
                     std::uint8_t* sel);
void span_ranges_simd(double rho2, double z0, double dz, std::size_t n, double* out);
void tsdf_update_span_simd(float* sdf, float* weight, const float* voxel_range,
                           std::size_t n, float measured_range, float truncation);
void tsdf_update_span_varying_simd(float* sdf, float* weight,
                                   const float* voxel_range,
                                   const float* measured_range, std::size_t n,
                                   float truncation);

}  // namespace relidar::kernels::detail
