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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "relidar/kernels/kernels.hpp"

using namespace relidar;

namespace {

struct BackendGuard {
  ~BackendGuard() {
    kernels::force_backend(kernels::simd_available() ? kernels::Backend::Simd
                                                     : kernels::Backend::Scalar);
  }
};

std::vector<double> random_doubles(std::size_t n, std::uint64_t seed, double lo,
                                   double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(n);
  for (double& v : out) v = u(rng);
  return out;
}

// Odd sizes on purpose so the SIMD tails run too.
constexpr std::size_t kSizes[] = {0, 1, 3, 7, 64, 1021};

}  // namespace

TEST_CASE("backend detection and forcing") {
  BackendGuard guard;
  kernels::force_backend(kernels::Backend::Scalar);
  CHECK(kernels::active_backend() == kernels::Backend::Scalar);
  CHECK(std::string(kernels::backend_name()) == "scalar");
  if (kernels::simd_available()) {
    kernels::force_backend(kernels::Backend::Simd);
    CHECK(kernels::active_backend() == kernels::Backend::Simd);
  }
}

TEST_CASE("ranges_soa matches scalar reference bit for bit") {
  BackendGuard guard;
  if (!kernels::simd_available()) return;
  for (const std::size_t n : kSizes) {
    const auto x = random_doubles(n, 1, -100.0, 100.0);
    const auto y = random_doubles(n, 2, -100.0, 100.0);
    const auto z = random_doubles(n, 3, -20.0, 20.0);
    std::vector<double> scalar(n), simd(n);
    kernels::force_backend(kernels::Backend::Scalar);
    kernels::ranges_soa(x.data(), y.data(), z.data(), n, scalar.data());
    kernels::force_backend(kernels::Backend::Simd);
    kernels::ranges_soa(x.data(), y.data(), z.data(), n, simd.data());
    CHECK(std::memcmp(scalar.data(), simd.data(), n * sizeof(double)) == 0);
  }
}

TEST_CASE("ranges_soa computes Euclidean norms") {
  std::vector<double> x{3.0}, y{4.0}, z{0.0}, out{0.0};
  kernels::ranges_soa(x.data(), y.data(), z.data(), 1, out.data());
  CHECK(out[0] == doctest::Approx(5.0));
}

TEST_CASE("se3_transform_soa equivalence and correctness") {
  BackendGuard guard;
  const double angle = 0.6;
  const double r[9] = {std::cos(angle), -std::sin(angle), 0.0,
                       std::sin(angle), std::cos(angle),  0.0,
                       0.0,             0.0,              1.0};
  const double t[3] = {1.5, -2.0, 0.25};

  for (const std::size_t n : kSizes) {
    const auto x = random_doubles(n, 11, -50.0, 50.0);
    const auto y = random_doubles(n, 12, -50.0, 50.0);
    const auto z = random_doubles(n, 13, -5.0, 5.0);
    std::vector<double> sx(n), sy(n), sz(n), vx(n), vy(n), vz(n);
    kernels::force_backend(kernels::Backend::Scalar);
    kernels::se3_transform_soa(r, t, x.data(), y.data(), z.data(), n, sx.data(),
                               sy.data(), sz.data());
    if (kernels::simd_available()) {
      kernels::force_backend(kernels::Backend::Simd);
      kernels::se3_transform_soa(r, t, x.data(), y.data(), z.data(), n, vx.data(),
                                 vy.data(), vz.data());
      CHECK(std::memcmp(sx.data(), vx.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(sy.data(), vy.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(sz.data(), vz.data(), n * sizeof(double)) == 0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double ex = r[0] * x[i] + r[1] * y[i] + r[2] * z[i] + t[0];
      CHECK(sx[i] == doctest::Approx(ex).epsilon(1e-12));
    }
  }
}

TEST_CASE("min_select semantics: invalids, ties, selection mask") {
  const std::vector<double> a{-1.0, 5.0, -1.0, 3.0, 4.0, -1.0};
  const std::vector<double> b{-1.0, -1.0, 2.0, 7.0, 4.0, -1.0};
  std::vector<double> out(a.size());
  std::vector<std::uint8_t> sel(a.size());
  kernels::min_select(a.data(), b.data(), a.size(), out.data(), sel.data());

  CHECK(out[0] < 0.0);       // both invalid
  CHECK(out[1] == 5.0);      // only a
  CHECK(sel[1] == 0);
  CHECK(out[2] == 2.0);      // only b
  CHECK(sel[2] == 1);
  CHECK(out[3] == 3.0);      // a smaller
  CHECK(sel[3] == 0);
  CHECK(out[4] == 4.0);      // tie -> a
  CHECK(sel[4] == 0);
}

TEST_CASE("min_select scalar/simd equivalence with invalid sentinels") {
  BackendGuard guard;
  if (!kernels::simd_available()) return;
  for (const std::size_t n : kSizes) {
    auto a = random_doubles(n, 21, 0.0, 100.0);
    auto b = random_doubles(n, 22, 0.0, 100.0);
    // Sprinkle invalids and exact ties.
    std::mt19937_64 rng(23);
    for (std::size_t i = 0; i < n; ++i) {
      const auto roll = rng() % 5;
      if (roll == 0) a[i] = -1.0;
      if (roll == 1) b[i] = -1.0;
      if (roll == 2) b[i] = a[i];
    }
    std::vector<double> out_s(n), out_v(n);
    std::vector<std::uint8_t> sel_s(n), sel_v(n);
    kernels::force_backend(kernels::Backend::Scalar);
    kernels::min_select(a.data(), b.data(), n, out_s.data(), sel_s.data());
    kernels::force_backend(kernels::Backend::Simd);
    kernels::min_select(a.data(), b.data(), n, out_v.data(), sel_v.data());
    CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(double)) == 0);
    CHECK(sel_s == sel_v);
  }
}

TEST_CASE("min_select supports in-place accumulation") {
  std::vector<double> acc{10.0, -1.0, 3.0};
  const std::vector<double> b{5.0, 7.0, -1.0};
  std::vector<std::uint8_t> sel(3);
  kernels::min_select(acc.data(), b.data(), 3, acc.data(), sel.data());
  CHECK(acc == std::vector<double>{5.0, 7.0, 3.0});
}

TEST_CASE("span_ranges matches per-element formula and simd agrees") {
  BackendGuard guard;
  const double rho2 = 30.25;
  const double z0 = -2.0;
  const double dz = 0.05;
  for (const std::size_t n : kSizes) {
    std::vector<double> out_s(n), out_v(n);
    kernels::force_backend(kernels::Backend::Scalar);
    kernels::span_ranges(rho2, z0, dz, n, out_s.data());
    for (std::size_t i = 0; i < n; ++i) {
      const double z = z0 + static_cast<double>(i) * dz;
      CHECK(out_s[i] == std::sqrt(rho2 + z * z));
    }
    if (kernels::simd_available()) {
      kernels::force_backend(kernels::Backend::Simd);
      kernels::span_ranges(rho2, z0, dz, n, out_v.data());
      CHECK(std::memcmp(out_s.data(), out_v.data(), n * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("tsdf_update_span clamps, skips and averages") {
  // measured 10, truncation 0.3; voxel ranges straddle the surface.
  std::vector<float> vr{9.0f, 9.9f, 10.1f, 10.5f};
  std::vector<float> sdf(4, 0.0f);
  std::vector<float> weight(4, 0.0f);
  kernels::tsdf_update_span(sdf.data(), weight.data(), vr.data(), 4, 10.0f, 0.3f);

  CHECK(sdf[0] == 0.3f);                    // clamped free space
  CHECK(sdf[1] == doctest::Approx(0.1f));   // in front
  CHECK(sdf[2] == doctest::Approx(-0.1f));  // behind within band
  CHECK(weight[0] == 1.0f);
  CHECK(weight[3] == 0.0f);                 // behind beyond truncation: untouched
  CHECK(sdf[3] == 0.0f);

  // Second observation halves toward the new distance.
  kernels::tsdf_update_span(sdf.data(), weight.data(), vr.data(), 4, 10.2f, 0.3f);
  CHECK(sdf[1] == doctest::Approx(0.2f));
  CHECK(weight[1] == 2.0f);
}

TEST_CASE("tsdf_update_span_varying skips negative measurements") {
  std::vector<float> vr{9.0f, 9.9f, 10.1f};
  std::vector<float> meas{10.0f, -1.0f, 10.0f};
  std::vector<float> sdf(3, 0.0f), weight(3, 0.0f);
  kernels::tsdf_update_span_varying(sdf.data(), weight.data(), vr.data(),
                                    meas.data(), 3, 0.3f);
  CHECK(weight[0] == 1.0f);
  CHECK(weight[1] == 0.0f);  // unobserved
  CHECK(sdf[1] == 0.0f);
  CHECK(sdf[2] == doctest::Approx(-0.1f));
}

TEST_CASE("tsdf_update_span_varying scalar/simd equivalence") {
  BackendGuard guard;
  if (!kernels::simd_available()) return;
  for (const std::size_t n : kSizes) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<float> u(5.0f, 15.0f);
    std::vector<float> vr(n), meas(n), sdf0(n), w0(n);
    for (std::size_t i = 0; i < n; ++i) {
      vr[i] = u(rng);
      meas[i] = (rng() % 4 == 0) ? -1.0f : u(rng);
      sdf0[i] = u(rng) * 0.01f;
      w0[i] = static_cast<float>(rng() % 4);
    }
    auto sdf_s = sdf0, w_s = w0, sdf_v = sdf0, w_v = w0;
    kernels::force_backend(kernels::Backend::Scalar);
    kernels::tsdf_update_span_varying(sdf_s.data(), w_s.data(), vr.data(),
                                      meas.data(), n, 0.3f);
    kernels::force_backend(kernels::Backend::Simd);
    kernels::tsdf_update_span_varying(sdf_v.data(), w_v.data(), vr.data(),
                                      meas.data(), n, 0.3f);
    CHECK(std::memcmp(sdf_s.data(), sdf_v.data(), n * sizeof(float)) == 0);
    CHECK(std::memcmp(w_s.data(), w_v.data(), n * sizeof(float)) == 0);
  }
}

TEST_CASE("tsdf_update_span scalar/simd equivalence") {
  BackendGuard guard;
  if (!kernels::simd_available()) return;
  for (const std::size_t n : kSizes) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<float> u(5.0f, 15.0f);
    std::vector<float> vr(n), sdf0(n), w0(n);
    for (std::size_t i = 0; i < n; ++i) {
      vr[i] = u(rng);
      sdf0[i] = u(rng) * 0.01f;
      w0[i] = static_cast<float>(rng() % 4);
    }
    auto sdf_s = sdf0, w_s = w0, sdf_v = sdf0, w_v = w0;
    kernels::force_backend(kernels::Backend::Scalar);
    kernels::tsdf_update_span(sdf_s.data(), w_s.data(), vr.data(), n, 10.0f, 0.3f);
    kernels::force_backend(kernels::Backend::Simd);
    kernels::tsdf_update_span(sdf_v.data(), w_v.data(), vr.data(), n, 10.0f, 0.3f);
    CHECK(std::memcmp(sdf_s.data(), sdf_v.data(), n * sizeof(float)) == 0);
    CHECK(std::memcmp(w_s.data(), w_v.data(), n * sizeof(float)) == 0);
  }
}
