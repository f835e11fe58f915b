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

#include <fstream>
#include <random>

#include "relidar/core/projection.hpp"
#include "relidar/core/range_image.hpp"
#include "relidar/core/sensor.hpp"
#include "relidar/core/types.hpp"

using namespace relidar;

namespace {

SensorModel three_channel_sensor(int columns = 360) {
  SensorModel s;
  s.name = "test3";
  s.elevation_deg = {10.0, 0.0, -10.0};
  s.columns = columns;
  s.range_min_m = 1.0;
  s.range_max_m = 100.0;
  s.validate();
  return s;
}

PointCloud cloud_of(std::initializer_list<SemanticPoint> points) {
  PointCloud c;
  c.points = points;
  return c;
}

}  // namespace

TEST_CASE("se3_apply identity and translation") {
  PointCloud cloud = cloud_of({SemanticPoint{0.0, 0.0, 0.0, 0.5f, 3, 7, 1.0f}});
  const PointCloud same = se3_apply(PoseSE3::identity(), cloud);
  CHECK(same.points[0] == cloud.points[0]);

  const PointCloud moved =
      se3_apply(PoseSE3::translation_only({1.0, 0.0, 0.0}), cloud);
  CHECK(moved.points[0].x == doctest::Approx(1.0));
  CHECK(moved.points[0].y == doctest::Approx(0.0));
  CHECK(moved.points[0].semantic_class == 3);
  CHECK(moved.points[0].instance_id == 7);
}

TEST_CASE("se3_apply yaw matches direct matrix multiply") {
  const PoseSE3 yaw90 = PoseSE3::from_yaw(kPi / 2.0, Eigen::Vector3d::Zero());
  PointCloud cloud = cloud_of({SemanticPoint{1.0, 0.0, 0.0}});
  const PointCloud rotated = se3_apply(yaw90, cloud);
  const Eigen::Vector3d expected = yaw90.rotation() * Eigen::Vector3d(1, 0, 0);
  CHECK(std::abs(rotated.points[0].x - expected.x()) < 1e-9);
  CHECK(std::abs(rotated.points[0].y - expected.y()) < 1e-9);
  CHECK(std::abs(rotated.points[0].x - 0.0) < 1e-9);
  CHECK(std::abs(rotated.points[0].y - 1.0) < 1e-9);
}

TEST_CASE("se3_compose identity, inverse and sequential application") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  auto random_pose = [&] {
    const Eigen::Vector3d axis =
        Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized();
    const double angle = u(rng) * kPi;
    return PoseSE3(Eigen::AngleAxisd(angle, axis).toRotationMatrix(),
                   {10.0 * u(rng), 10.0 * u(rng), 10.0 * u(rng)});
  };

  const PoseSE3 b = random_pose();
  const PoseSE3 composed_with_identity = se3_compose(PoseSE3::identity(), b);
  CHECK((composed_with_identity.rotation() - b.rotation()).cwiseAbs().maxCoeff() <
        1e-12);

  const PoseSE3 round = se3_compose(b, b.inverse());
  CHECK(round.orthonormality_error() < 1e-9);
  CHECK(round.translation().norm() < 1e-9);
  CHECK((round.rotation() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);

  const PoseSE3 a = random_pose();
  const PoseSE3 ab = se3_compose(a, b);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d p(10.0 * u(rng), 10.0 * u(rng), 10.0 * u(rng));
    const Eigen::Vector3d direct = ab.apply(p);
    const Eigen::Vector3d sequential = a.apply(b.apply(p));
    CHECK((direct - sequential).norm() < 1e-9);
  }
}

TEST_CASE("se3_apply is an isometry") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  PointCloud cloud;
  for (int i = 0; i < 50; ++i) {
    cloud.points.push_back(SemanticPoint{u(rng), u(rng), u(rng)});
  }
  const PoseSE3 pose =
      PoseSE3(Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized())
                  .toRotationMatrix(),
              {4.0, -2.0, 1.0});
  const PointCloud moved = se3_apply(pose, cloud);
  for (std::size_t i = 1; i < cloud.size(); ++i) {
    const double before =
        (cloud.points[i].position() - cloud.points[0].position()).norm();
    const double after =
        (moved.points[i].position() - moved.points[0].position()).norm();
    CHECK(std::abs(before - after) < 1e-9);
  }
}

TEST_CASE("project on-axis, exact channel, out of range") {
  const SensorModel sensor = three_channel_sensor();

  const auto on_axis = project(sensor, {10.0, 0.0, 0.0});
  REQUIRE(on_axis.has_value());
  CHECK(on_axis->row == 1);
  CHECK(on_axis->range == doctest::Approx(10.0));

  const double el = 10.0 * kDegToRad;
  const auto top = project(sensor, {20.0 * std::cos(el), 0.0, 20.0 * std::sin(el)});
  REQUIRE(top.has_value());
  CHECK(top->row == 0);

  CHECK_FALSE(project(sensor, {150.0, 0.0, 0.0}).has_value());
  CHECK_FALSE(project(sensor, {0.5, 0.0, 0.0}).has_value());  // below min range
}

TEST_CASE("project rejects beyond channel coverage") {
  const SensorModel sensor = three_channel_sensor();
  // +10 channel accepts up to +15 (half of the 10 degree gap).
  const double inside = 14.0 * kDegToRad;
  const double outside = 16.0 * kDegToRad;
  CHECK(project(sensor, {10.0 * std::cos(inside), 0.0, 10.0 * std::sin(inside)})
            .has_value());
  CHECK_FALSE(
      project(sensor, {10.0 * std::cos(outside), 0.0, 10.0 * std::sin(outside)})
          .has_value());
}

TEST_CASE("backproject hand cases") {
  SensorModel sensor = three_channel_sensor(3);  // centers at -120, 0, +120

  const Eigen::Vector3d p = backproject(sensor, 1, 1, 5.0);
  CHECK(std::abs(p.x() - 5.0) < 1e-12);
  CHECK(std::abs(p.y()) < 1e-9);
  CHECK(std::abs(p.z()) < 1e-12);

  SensorModel tilted = sensor;
  tilted.elevation_deg = {30.0, 0.0, -30.0};
  const Eigen::Vector3d q = backproject(tilted, 0, 1, 2.0);
  CHECK(q.x() == doctest::Approx(2.0 * std::cos(30.0 * kDegToRad)).epsilon(1e-12));
  CHECK(std::abs(q.y()) < 1e-9);
  CHECK(q.z() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(backproject(sensor, 3, 0, 5.0), std::out_of_range);
  CHECK_THROWS_AS(backproject(sensor, 0, 0, 1000.0), std::out_of_range);
}

TEST_CASE("project/backproject round trip recovers indices exactly") {
  SensorModel sensor;
  sensor.name = "rt";
  sensor.columns = 900;
  sensor.range_min_m = 1.0;
  sensor.range_max_m = 100.0;
  for (int i = 0; i < 32; ++i) sensor.elevation_deg.push_back(12.0 - i * 1.4);
  sensor.validate();

  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> row_dist(0, sensor.rows() - 1);
  std::uniform_int_distribution<int> col_dist(0, sensor.columns - 1);
  std::uniform_real_distribution<double> range_dist(sensor.range_min_m,
                                                    sensor.range_max_m);
  for (int i = 0; i < 10000; ++i) {
    const int row = row_dist(rng);
    const int col = col_dist(rng);
    const double range = range_dist(rng);
    const Eigen::Vector3d p = backproject(sensor, row, col, range);
    const auto hit = project(sensor, p);
    REQUIRE(hit.has_value());
    CHECK(hit->row == row);
    CHECK(hit->col == col);
    CHECK(std::abs(hit->range - range) < 1e-9);
  }
}

TEST_CASE("azimuth bin-edge ties go to the lower column") {
  SensorModel sensor = three_channel_sensor(4);  // 90 degree bins from -180
  // Azimuth exactly -90 sits on the edge between columns 0 and 1.
  CHECK(azimuth_to_col(sensor, -90.0) == 0);
  CHECK(azimuth_to_col(sensor, -89.9999) == 1);
  CHECK(azimuth_to_col(sensor, -180.0) == 0);
  CHECK(azimuth_to_col(sensor, 180.0) == 3);
}

TEST_CASE("build_range_image basics") {
  const SensorModel sensor = three_channel_sensor();

  SUBCASE("empty cloud leaves all cells invalid") {
    const RangeImage image = build_range_image(sensor, PointCloud{});
    CHECK(image.valid_count() == 0);
  }

  SUBCASE("conflicting points keep the smaller range") {
    PointCloud cloud = cloud_of({SemanticPoint{7.2, 0.001, 0.0, 0.1f, 1, 0, 1.0f},
                                 SemanticPoint{5.0, 0.0007, 0.0, 0.9f, 2, 0, 1.0f}});
    BuildStats stats;
    const RangeImage image = build_range_image(sensor, cloud, &stats);
    CHECK(image.valid_count() == 1);
    CHECK(stats.cell_conflicts == 1);
    const PointCloud flat = image.flatten();
    CHECK(flat.points[0].semantic_class == 2);
    CHECK(flat.points[0].x == doctest::Approx(5.0));
  }

  SUBCASE("out-of-view points are counted") {
    PointCloud cloud = cloud_of({SemanticPoint{150.0, 0.0, 0.0},
                                 SemanticPoint{10.0, 0.0, 0.0}});
    BuildStats stats;
    const RangeImage image = build_range_image(sensor, cloud, &stats);
    CHECK(stats.dropped_out_of_view == 1);
    CHECK(image.valid_count() == 1);
  }
}

TEST_CASE("build_range_image round trip over a full image") {
  SensorModel sensor = three_channel_sensor(64);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> range_dist(2.0, 90.0);

  RangeImage full(sensor.rows(), sensor.columns);
  PointCloud cloud;
  for (int row = 0; row < sensor.rows(); ++row) {
    for (int col = 0; col < sensor.columns; ++col) {
      const double range = range_dist(rng);
      const Eigen::Vector3d p = backproject(sensor, row, col, range);
      SemanticPoint sp;
      sp.x = p.x();
      sp.y = p.y();
      sp.z = p.z();
      sp.semantic_class = static_cast<std::uint32_t>(row * 1000 + col);
      full.set_cell(row, col, range, sp);
      cloud.points.push_back(sp);
    }
  }

  const RangeImage rebuilt = build_range_image(sensor, cloud);
  REQUIRE(rebuilt.valid_count() == full.valid_count());
  for (int row = 0; row < sensor.rows(); ++row) {
    for (int col = 0; col < sensor.columns; ++col) {
      REQUIRE(rebuilt.valid(row, col));
      CHECK(rebuilt.point(row, col) == full.point(row, col));
    }
  }
}

TEST_CASE("build_range_image never invents ranges and never exceeds input size") {
  const SensorModel sensor = three_channel_sensor();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  PointCloud cloud;
  for (int i = 0; i < 500; ++i) {
    cloud.points.push_back(SemanticPoint{u(rng), u(rng), u(rng) / 10.0});
  }
  const RangeImage image = build_range_image(sensor, cloud);
  CHECK(image.valid_count() <= cloud.size());

  for (int row = 0; row < image.rows(); ++row) {
    for (int col = 0; col < image.cols(); ++col) {
      if (!image.valid(row, col)) continue;
      const double range = image.range(row, col);
      CHECK(range >= sensor.range_min_m - kRangeSlack);
      CHECK(range <= sensor.range_max_m + kRangeSlack);
      bool attained = false;
      for (const SemanticPoint& p : cloud.points) {
        if (std::abs(p.position().norm() - range) < 1e-12) {
          attained = true;
          break;
        }
      }
      CHECK(attained);
    }
  }
}

TEST_CASE("sensor catalog parsing") {
  const std::string path = "/tmp/relidar_test_catalog.cfg";
  {
    std::ofstream out(path);
    out << "# test catalog\n"
        << "[alpha]\n"
        << "elevations_deg = 10, 0, -10\n"
        << "columns = 360\n"
        << "azimuth_fov_deg = -180 180\n"
        << "range_m = 1 100\n"
        << "mount = 1 0 0 0  0 1 0 0  0 0 1 1.7\n"
        << "[beta]\n"
        << "elevations_deg = 5 -5\n"
        << "columns = 10\n"
        << "azimuth_fov_deg = -60 60\n"
        << "range_m = 0.5 30\n";
  }
  const auto catalog = load_sensor_catalog(path);
  REQUIRE(catalog.size() == 2);
  CHECK(catalog.at("alpha").rows() == 3);
  CHECK(catalog.at("alpha").mount.translation().z() == doctest::Approx(1.7));
  CHECK(catalog.at("beta").columns == 10);
  CHECK_FALSE(catalog.at("beta").full_circle());

  CHECK_THROWS(load_sensor(path, "missing"));
}

TEST_CASE("sensor validation rejects bad tables") {
  SensorModel s = three_channel_sensor();
  s.elevation_deg = {0.0, 0.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = three_channel_sensor();
  s.range_min_m = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = three_channel_sensor();
  s.columns = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
