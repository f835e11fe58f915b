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

#include <cstddef>
#include <cstdint>

namespace relidar::kernels {

// Data-parallel inner loops of the pipeline. Every kernel has a scalar
// reference implementation and a SIMD variant (AVX2 on x86-64, NEON on
// aarch64, via std::experimental::simd) selected at runtime. The two are
// bit-identical by construction: same operation order per element, no FMA
// contraction, IEEE sqrt/division/min only.

enum class Backend { Scalar, Simd };

/// Backend used by subsequent kernel calls. Auto-detected on first use.
Backend active_backend();
const char* backend_name();

/// Overrides auto-detection (used by tests and --force-scalar).
void force_backend(Backend backend);

/// True when the binary carries a SIMD variant usable on this CPU.
bool simd_available();

/// out[i] = sqrt(x^2 + y^2 + z^2), evaluated as (x*x + y*y) + z*z.
void ranges_soa(const double* x, const double* y, const double* z,
                std::size_t n, double* out);

/// Rigid transform of SoA coordinates: o = R * p + t, R row-major.
void se3_transform_soa(const double rotation[9], const double translation[3],
                       const double* x, const double* y, const double* z,
                       std::size_t n, double* ox, double* oy, double* oz);

/// Per-cell range competition. Negative ranges are invalid; the first
/// argument wins ties. sel[i] is 1 where b won, else 0. out may alias a.
void min_select(const double* a, const double* b, std::size_t n,
                double* out, std::uint8_t* sel);

/// out[i] = sqrt(rho2 + (z0 + i*dz)^2) — beam ranges along a voxel column.
void span_ranges(double rho2, double z0, double dz, std::size_t n, double* out);

/// TSDF running-average update over a voxel span sharing one measured
/// range. Voxels behind the surface beyond the truncation band are left
/// untouched; distances are clamped to +truncation in front.
void tsdf_update_span(float* sdf, float* weight, const float* voxel_range,
                      std::size_t n, float measured_range, float truncation);

/// Same update with a per-voxel measured range; negative entries mark
/// unobserved voxels and are skipped.
void tsdf_update_span_varying(float* sdf, float* weight, const float* voxel_range,
                              const float* measured_range, std::size_t n,
                              float truncation);

}  // namespace relidar::kernels
