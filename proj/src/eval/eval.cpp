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

#include "relidar/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace relidar {

using nlohmann::json;

std::uint32_t ClassMap::map_class(std::uint32_t source) const {
  const auto it = table.find(source);
  if (it == table.end()) {
    throw std::runtime_error("class id " + std::to_string(source) +
                             " is not declared in the class map");
  }
  return it->second;
}

ClassMap read_class_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open class map: " + path);

  ClassMap map;
  std::map<std::uint32_t, std::string> names;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream fields(line);
    long long source, joint;
    std::string joint_token, name;
    if (!(fields >> source >> joint_token)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'source_id joint_id name'");
    }
    if (joint_token == "ignore" || joint_token == "-1") {
      joint = -1;
    } else {
      try {
        joint = std::stoll(joint_token);
      } catch (...) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": bad joint id '" + joint_token + "'");
      }
    }
    fields >> name;
    if (source < 0 || joint < -1) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": ids must be non-negative (joint may be -1)");
    }
    const auto source_id = static_cast<std::uint32_t>(source);
    if (map.table.count(source_id)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate source id " + std::to_string(source));
    }
    if (joint < 0) {
      map.table[source_id] = kIgnoreClass;
    } else {
      const auto joint_id = static_cast<std::uint32_t>(joint);
      map.table[source_id] = joint_id;
      if (!name.empty()) {
        auto [it, inserted] = names.emplace(joint_id, name);
        if (!inserted && it->second != name) {
          throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                   ": joint id " + std::to_string(joint) +
                                   " renamed from '" + it->second + "'");
        }
      }
    }
  }

  std::uint32_t max_joint = 0;
  bool any = false;
  for (const auto& [src, joint] : map.table) {
    if (joint != kIgnoreClass) {
      max_joint = std::max(max_joint, joint);
      any = true;
    }
  }
  if (any) {
    map.joint_names.resize(max_joint + 1);
    for (std::uint32_t j = 0; j <= max_joint; ++j) {
      const auto it = names.find(j);
      map.joint_names[j] = it != names.end() ? it->second : "class_" + std::to_string(j);
    }
  }
  return map;
}

void write_class_map(const ClassMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write class map: " + path);
  for (const auto& [source, joint] : map.table) {
    if (joint == kIgnoreClass) {
      out << source << " -1 ignore\n";
    } else {
      out << source << ' ' << joint << ' ' << map.joint_names.at(joint) << '\n';
    }
  }
}

PointCloud remap(const PointCloud& cloud, const ClassMap& map) {
  PointCloud out = cloud;
  for (SemanticPoint& p : out.points) {
    p.semantic_class = map.map_class(p.semantic_class);
  }
  return out;
}

ConfusionMatrix::ConfusionMatrix(std::uint32_t classes)
    : classes_(classes),
      counts_(static_cast<std::size_t>(classes) * classes, 0) {}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) {
    throw std::invalid_argument("ConfusionMatrix::merge: size mismatch");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto c : counts_) sum += c;
  return sum;
}

std::uint64_t ConfusionMatrix::false_positive(std::uint32_t c) const {
  std::uint64_t sum = 0;
  for (std::uint32_t gt = 0; gt < classes_; ++gt) {
    if (gt != c) sum += at(gt, c);
  }
  return sum;
}

std::uint64_t ConfusionMatrix::false_negative(std::uint32_t c) const {
  std::uint64_t sum = 0;
  for (std::uint32_t pred = 0; pred < classes_; ++pred) {
    if (pred != c) sum += at(c, pred);
  }
  return sum;
}

ScoreReport score(const std::vector<std::uint32_t>& gt_labels,
                  const std::vector<std::uint32_t>& pred_labels,
                  const ClassMap& map_gt, const ClassMap& map_pred) {
  if (gt_labels.size() != pred_labels.size()) {
    throw std::invalid_argument("score: " + std::to_string(gt_labels.size()) +
                                " ground-truth labels vs " +
                                std::to_string(pred_labels.size()) + " predictions");
  }
  const std::uint32_t classes =
      std::max(map_gt.joint_count(), map_pred.joint_count());

  ScoreReport report;
  report.confusion = ConfusionMatrix(classes);
  for (std::size_t i = 0; i < gt_labels.size(); ++i) {
    const std::uint32_t gt = map_gt.map_class(gt_labels[i]);
    const std::uint32_t pred = map_pred.map_class(pred_labels[i]);
    if (gt == kIgnoreClass || pred == kIgnoreClass) continue;
    report.confusion.add(gt, pred);
  }
  report.scored_points = report.confusion.total();
  if (report.scored_points == 0) {
    throw std::runtime_error("score: no scored points (everything mapped to IGNORE)");
  }

  report.class_names.resize(classes);
  for (std::uint32_t c = 0; c < classes; ++c) {
    report.class_names[c] = c < map_gt.joint_count() ? map_gt.joint_names[c]
                                                     : map_pred.joint_names[c];
  }

  report.iou.assign(classes, std::numeric_limits<double>::quiet_NaN());
  report.scored.assign(classes, false);
  double sum = 0.0;
  std::uint32_t considered = 0;
  for (std::uint32_t c = 0; c < classes; ++c) {
    const std::uint64_t tp = report.confusion.true_positive(c);
    const std::uint64_t fp = report.confusion.false_positive(c);
    const std::uint64_t fn = report.confusion.false_negative(c);
    if (tp + fp + fn == 0) continue;  // absent from gt and predictions
    report.iou[c] = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
    report.scored[c] = true;
    sum += report.iou[c];
    ++considered;
  }
  report.miou = considered > 0 ? sum / considered : 0.0;
  return report;
}

std::string ScoreReport::to_text() const {
  std::size_t width = 10;
  for (const auto& name : class_names) width = std::max(width, name.size() + 2);

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "class"
      << "IoU\n";
  for (std::size_t c = 0; c < iou.size(); ++c) {
    out << std::left << std::setw(static_cast<int>(width)) << class_names[c];
    if (scored[c]) {
      out << std::fixed << std::setprecision(1) << 100.0 * iou[c];
    } else {
      out << "-";
    }
    out << '\n';
  }
  out << std::left << std::setw(static_cast<int>(width)) << "mIoU" << std::fixed
      << std::setprecision(1) << 100.0 * miou << '\n';
  return out.str();
}

std::string ScoreReport::to_json() const {
  json doc;
  doc["miou"] = miou;
  doc["scored_points"] = scored_points;
  json per_class = json::array();
  for (std::size_t c = 0; c < iou.size(); ++c) {
    json entry;
    entry["name"] = class_names[c];
    entry["scored"] = static_cast<bool>(scored[c]);
    if (scored[c]) entry["iou"] = iou[c];
    per_class.push_back(std::move(entry));
  }
  doc["classes"] = std::move(per_class);
  json rows = json::array();
  for (std::uint32_t gt = 0; gt < confusion.classes(); ++gt) {
    json row = json::array();
    for (std::uint32_t pred = 0; pred < confusion.classes(); ++pred) {
      row.push_back(confusion.at(gt, pred));
    }
    rows.push_back(std::move(row));
  }
  doc["confusion"] = std::move(rows);
  return doc.dump(2);
}

}  // namespace relidar
