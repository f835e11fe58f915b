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

#include <cstdint>
#include <map>
#include <string>

namespace relidar {

/// Plain-text `[section]` / `key = value` config with `#` comments.
/// Values are fetched as `section.key`.
class ConfigFile {
 public:
  ConfigFile() = default;
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Per-class rates like "0:1.5, 4:2".
std::map<std::uint32_t, double> parse_rates(const std::string& text);

}  // namespace relidar
