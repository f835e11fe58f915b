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

#include "relidar/core/types.hpp"

#include <Eigen/SVD>

#include "relidar/kernels/kernels.hpp"

namespace relidar {

PoseSE3 PoseSE3::from_yaw(double yaw_rad, const Eigen::Vector3d& translation) {
  Eigen::Matrix3d r;
  const double c = std::cos(yaw_rad);
  const double s = std::sin(yaw_rad);
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return {r, translation};
}

double PoseSE3::orthonormality_error() const {
  const Eigen::Matrix3d residual =
      rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity();
  return residual.cwiseAbs().maxCoeff() + std::abs(rotation_.determinant() - 1.0);
}

bool PoseSE3::valid(double tol) const {
  return rotation_.allFinite() && translation_.allFinite() &&
         orthonormality_error() <= tol;
}

PoseSE3 PoseSE3::orthonormalized() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation_,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return {r, translation_};
}

PointCloud se3_apply(const PoseSE3& pose, const PointCloud& cloud) {
  PointCloud out = cloud;
  const std::size_t n = out.size();
  std::vector<double> x(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = out.points[i].x;
    y[i] = out.points[i].y;
    z[i] = out.points[i].z;
  }
  double r[9], t[3];
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r[row * 3 + col] = pose.rotation()(row, col);
    t[row] = pose.translation()(row);
  }
  std::vector<double> ox(n), oy(n), oz(n);
  kernels::se3_transform_soa(r, t, x.data(), y.data(), z.data(), n, ox.data(),
                             oy.data(), oz.data());
  for (std::size_t i = 0; i < n; ++i) {
    out.points[i].x = ox[i];
    out.points[i].y = oy[i];
    out.points[i].z = oz[i];
  }
  return out;
}

}  // namespace relidar
