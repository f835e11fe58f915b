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

#include "relidar/kernels/kernels.hpp"

#include <atomic>

#include "kernels_impl.hpp"

namespace relidar::kernels {

namespace detail {

void ranges_soa_scalar(const double* x, const double* y, const double* z,
                       std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = range_step(x[i], y[i], z[i]);
}

void se3_transform_soa_scalar(const double r[9], const double t[3], const double* x,
                              const double* y, const double* z, std::size_t n,
                              double* ox, double* oy, double* oz) {
  for (std::size_t i = 0; i < n; ++i) {
    se3_step(r, t, x[i], y[i], z[i], ox[i], oy[i], oz[i]);
  }
}

void min_select_scalar(const double* a, const double* b, std::size_t n, double* out,
                       std::uint8_t* sel) {
  for (std::size_t i = 0; i < n; ++i) min_select_step(a[i], b[i], out[i], sel[i]);
}

void span_ranges_scalar(double rho2, double z0, double dz, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = span_range_step(rho2, z0, dz, i);
}

void tsdf_update_span_scalar(float* sdf, float* weight, const float* voxel_range,
                             std::size_t n, float measured_range, float truncation) {
  for (std::size_t i = 0; i < n; ++i) {
    tsdf_step(sdf[i], weight[i], voxel_range[i], measured_range, truncation);
  }
}

void tsdf_update_span_varying_scalar(float* sdf, float* weight,
                                     const float* voxel_range,
                                     const float* measured_range, std::size_t n,
                                     float truncation) {
  for (std::size_t i = 0; i < n; ++i) {
    tsdf_step(sdf[i], weight[i], voxel_range[i], measured_range[i], truncation);
  }
}

}  // namespace detail

namespace {

bool cpu_has_simd_support() {
#if !RELIDAR_HAVE_SIMD
  return false;
#elif defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return true;  // aarch64 baseline includes NEON
#endif
}

std::atomic<int> g_backend{-1};  // -1 undetected, else Backend value

Backend detect() {
  int current = g_backend.load(std::memory_order_acquire);
  if (current < 0) {
    current = static_cast<int>(cpu_has_simd_support() ? Backend::Simd : Backend::Scalar);
    g_backend.store(current, std::memory_order_release);
  }
  return static_cast<Backend>(current);
}

}  // namespace

bool simd_available() { return cpu_has_simd_support(); }

Backend active_backend() { return detect(); }

const char* backend_name() {
  return active_backend() == Backend::Simd ? "simd" : "scalar";
}

void force_backend(Backend backend) {
  if (backend == Backend::Simd && !cpu_has_simd_support()) {
    backend = Backend::Scalar;
  }
  g_backend.store(static_cast<int>(backend), std::memory_order_release);
}

void ranges_soa(const double* x, const double* y, const double* z, std::size_t n,
                double* out) {
#if RELIDAR_HAVE_SIMD
  if (detect() == Backend::Simd) {
    detail::ranges_soa_simd(x, y, z, n, out);
    return;
  }
#endif
  detail::ranges_soa_scalar(x, y, z, n, out);
}

void se3_transform_soa(const double rotation[9], const double translation[3],
                       const double* x, const double* y, const double* z,
                       std::size_t n, double* ox, double* oy, double* oz) {
#if RELIDAR_HAVE_SIMD
  if (detect() == Backend::Simd) {
    detail::se3_transform_soa_simd(rotation, translation, x, y, z, n, ox, oy, oz);
    return;
  }
#endif
  detail::se3_transform_soa_scalar(rotation, translation, x, y, z, n, ox, oy, oz);
}

void min_select(const double* a, const double* b, std::size_t n, double* out,
                std::uint8_t* sel) {
#if RELIDAR_HAVE_SIMD
  if (detect() == Backend::Simd) {
    detail::min_select_simd(a, b, n, out, sel);
    return;
  }
#endif
  detail::min_select_scalar(a, b, n, out, sel);
}

void span_ranges(double rho2, double z0, double dz, std::size_t n, double* out) {
#if RELIDAR_HAVE_SIMD
  if (detect() == Backend::Simd) {
    detail::span_ranges_simd(rho2, z0, dz, n, out);
    return;
  }
#endif
  detail::span_ranges_scalar(rho2, z0, dz, n, out);
}

void tsdf_update_span(float* sdf, float* weight, const float* voxel_range,
                      std::size_t n, float measured_range, float truncation) {
#if RELIDAR_HAVE_SIMD
  if (detect() == Backend::Simd) {
    detail::tsdf_update_span_simd(sdf, weight, voxel_range, n, measured_range,
                                  truncation);
    return;
  }
#endif
  detail::tsdf_update_span_scalar(sdf, weight, voxel_range, n, measured_range,
                                  truncation);
}

void tsdf_update_span_varying(float* sdf, float* weight, const float* voxel_range,
                              const float* measured_range, std::size_t n,
                              float truncation) {
#if RELIDAR_HAVE_SIMD
  if (detect() == Backend::Simd) {
    detail::tsdf_update_span_varying_simd(sdf, weight, voxel_range, measured_range,
                                          n, truncation);
    return;
  }
#endif
  detail::tsdf_update_span_varying_scalar(sdf, weight, voxel_range, measured_range,
                                          n, truncation);
}

}  // namespace relidar::kernels
