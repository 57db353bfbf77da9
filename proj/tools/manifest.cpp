#include "manifest.hpp"

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "sasa/error.hpp"

#ifndef SASA_VERSION
#define SASA_VERSION "0.0.0"
#endif

namespace sasa::cli {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error("SHA-256 initialisation failed");
    }
  }
  void update(const char* data, std::size_t size) { EVP_DigestUpdate(ctx_.get(), data, size); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) {
      out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return out.str();
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  Sha256 sha;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) sha.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return sha.hex();
}

std::string sha256_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  auto doc = nlohmann::json::parse(in);
  doc.erase("timestamp");
  const std::string text = doc.dump();
  Sha256 sha;
  sha.update(text.data(), text.size());
  return sha.hex();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Manifest::Manifest(std::string command, std::filesystem::path out_dir)
    : out_dir_(std::move(out_dir)) {
  doc_["command"] = std::move(command);
  doc_["tool_version"] = SASA_VERSION;
  doc_["config"] = nlohmann::json::object();
  doc_["seeds"] = nlohmann::json::object();
  doc_["inputs"] = nlohmann::json::array();
  doc_["outputs"] = nlohmann::json::array();
}

void Manifest::add_input(const std::string& role, const std::filesystem::path& path) {
  doc_["inputs"].push_back({{"role", role}, {"path", path.string()}, {"sha256", sha256_file(path)}});
}

void Manifest::add_manifest_input(const std::string& role, const std::filesystem::path& path) {
  doc_["inputs"].push_back({{"role", role},
                            {"path", path.string()},
                            {"sha256_without_timestamp", sha256_manifest(path)}});
}

void Manifest::add_output(const std::string& file) {
  doc_["outputs"].push_back({{"file", file}, {"sha256", sha256_file(out_dir_ / file)}});
}

std::filesystem::path Manifest::write() const {
  nlohmann::json doc = doc_;
  doc["timestamp"] = utc_timestamp();
  const auto path = out_dir_ / ("manifest_" + doc_["command"].get<std::string>() + ".json");
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
  return path;
}

}  // namespace sasa::cli
