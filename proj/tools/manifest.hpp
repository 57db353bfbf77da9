#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace sasa::cli {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// SHA-256 of a manifest's compact JSON with its timestamp removed, so that
/// reruns of an upstream step give the same digest.
std::string sha256_manifest(const std::filesystem::path& path);

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

class Manifest {
 public:
  Manifest(std::string command, std::filesystem::path out_dir);

  nlohmann::json& config() { return doc_["config"]; }
  nlohmann::json& seeds() { return doc_["seeds"]; }
  nlohmann::json& results() { return doc_["results"]; }

  void add_input(const std::string& role, const std::filesystem::path& path);
  void add_manifest_input(const std::string& role, const std::filesystem::path& path);
  /// Registers a written file (relative to the output directory).
  void add_output(const std::string& file);

  /// Writes manifest_<command>.json and returns its path.
  std::filesystem::path write() const;

 private:
  std::filesystem::path out_dir_;
  nlohmann::json doc_;
};

}  // namespace sasa::cli
