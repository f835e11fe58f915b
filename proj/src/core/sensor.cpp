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

#include "relidar/core/sensor.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace relidar {

namespace {

constexpr double kSingleChannelGapDeg = 1.0;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_numbers(const std::string& value) {
  std::string cleaned = value;
  for (char& c : cleaned) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<double> out;
  double v = 0.0;
  while (in >> v) out.push_back(v);
  if (!in.eof()) {
    throw std::invalid_argument("sensor catalog: non-numeric token in '" + value + "'");
  }
  return out;
}

}  // namespace

double SensorModel::gap_above_deg(int row) const {
  const int n = rows();
  if (n < 2) return kSingleChannelGapDeg;
  if (row == 0) return elevation_deg[0] - elevation_deg[1];
  return elevation_deg[row - 1] - elevation_deg[row];
}

double SensorModel::gap_below_deg(int row) const {
  const int n = rows();
  if (n < 2) return kSingleChannelGapDeg;
  if (row == n - 1) return elevation_deg[n - 2] - elevation_deg[n - 1];
  return elevation_deg[row] - elevation_deg[row + 1];
}

void SensorModel::validate() const {
  if (elevation_deg.empty()) {
    throw std::invalid_argument("sensor '" + name + "': no elevation channels");
  }
  for (std::size_t i = 0; i < elevation_deg.size(); ++i) {
    if (!(elevation_deg[i] > -90.0 && elevation_deg[i] < 90.0)) {
      throw std::invalid_argument("sensor '" + name + "': elevation out of (-90, 90)");
    }
    if (i > 0 && !(elevation_deg[i] < elevation_deg[i - 1])) {
      throw std::invalid_argument("sensor '" + name +
                                  "': elevations must be strictly decreasing");
    }
  }
  if (columns < 1) {
    throw std::invalid_argument("sensor '" + name + "': columns must be >= 1");
  }
  if (!(azimuth_min_deg < azimuth_max_deg)) {
    throw std::invalid_argument("sensor '" + name + "': empty azimuth FOV");
  }
  if (!(range_min_m > 0.0 && range_min_m < range_max_m)) {
    throw std::invalid_argument("sensor '" + name +
                                "': require 0 < range_min < range_max");
  }
  if (!mount.valid(1e-6)) {
    throw std::invalid_argument("sensor '" + name + "': mount pose not SE(3)");
  }
}

std::map<std::string, SensorModel> load_sensor_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sensor catalog: " + path);

  std::map<std::string, SensorModel> catalog;
  SensorModel current;
  bool in_section = false;

  auto commit = [&] {
    if (!in_section) return;
    current.validate();
    catalog[current.name] = current;
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": unterminated section header");
      }
      commit();
      current = SensorModel{};
      current.name = trim(line.substr(1, line.size() - 2));
      in_section = true;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos || !in_section) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key = value' inside a [sensor] section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "elevations_deg") {
      current.elevation_deg = parse_numbers(value);
    } else if (key == "columns") {
      current.columns = static_cast<int>(parse_numbers(value).at(0));
    } else if (key == "azimuth_fov_deg") {
      const auto v = parse_numbers(value);
      if (v.size() != 2) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": azimuth_fov_deg needs two values");
      }
      current.azimuth_min_deg = v[0];
      current.azimuth_max_deg = v[1];
    } else if (key == "range_m") {
      const auto v = parse_numbers(value);
      if (v.size() != 2) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": range_m needs two values");
      }
      current.range_min_m = v[0];
      current.range_max_m = v[1];
    } else if (key == "mount") {
      const auto v = parse_numbers(value);
      if (v.size() != 12) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": mount needs 12 row-major values");
      }
      Eigen::Matrix3d r;
      Eigen::Vector3d t;
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) r(row, col) = v[row * 4 + col];
        t(row) = v[row * 4 + 3];
      }
      current.mount = PoseSE3(r, t);
    } else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
  }
  commit();
  return catalog;
}

SensorModel load_sensor(const std::string& catalog_path, const std::string& name) {
  auto catalog = load_sensor_catalog(catalog_path);
  auto it = catalog.find(name);
  if (it == catalog.end()) {
    throw std::runtime_error("sensor '" + name + "' not found in " + catalog_path);
  }
  return it->second;
}

SensorModel make_uniform_sensor(const std::string& name, int channels,
                                double elevation_top_deg, double elevation_bottom_deg,
                                int columns, double range_min_m, double range_max_m,
                                const PoseSE3& mount) {
  SensorModel s;
  s.name = name;
  s.columns = columns;
  s.range_min_m = range_min_m;
  s.range_max_m = range_max_m;
  s.mount = mount;
  s.elevation_deg.resize(channels);
  if (channels == 1) {
    s.elevation_deg[0] = elevation_top_deg;
  } else {
    const double step = (elevation_top_deg - elevation_bottom_deg) / (channels - 1);
    for (int i = 0; i < channels; ++i) {
      s.elevation_deg[i] = elevation_top_deg - i * step;
    }
  }
  s.validate();
  return s;
}

}  // namespace relidar
