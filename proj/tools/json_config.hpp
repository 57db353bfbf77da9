#pragma once

#include <algorithm>
#include <istream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace sasa::cli {

/// CLI11 config reader for JSON files. Nested objects are subcommand
/// sections; arrays supply multi-value options. Underscores in keys map to
/// dashes so that `within_block_r2` sets `--within-block-r2`. Top-level keys
/// that are not global options belong to `default_section`, so a flat
/// simulation config can be passed straight to `simulate`.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string default_section) : default_section_(std::move(default_section)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    for (auto& item : items) {
      if (item.parents.empty() && !kGlobals.count(item.name) && !default_section_.empty()) {
        item.parents.push_back(default_section_);
      }
    }
    return items;
  }

 private:
  inline static const std::set<std::string> kGlobals = {"seed", "threads", "out-dir", "config"};
  std::string default_section_;

  static std::string key(std::string k) {
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
  }

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [k, v] : obj.items()) {
      if (v.is_object()) {
        auto sub = parents;
        sub.push_back(k);
        collect(v, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key(k);
      if (v.is_array()) {
        for (const auto& e : v) item.inputs.push_back(scalar(e));
      } else {
        item.inputs.push_back(scalar(v));
      }
      items.push_back(std::move(item));
    }
  }
};

}  // namespace sasa::cli
