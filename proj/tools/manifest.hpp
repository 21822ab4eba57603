#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace drowsyctl {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);

/// Run record written next to every command's outputs.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv, std::uint64_t seed);

  void set_config(std::string effective);
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void set_field(const std::string& key, nlohmann::ordered_json value);

  /// Stamps the elapsed time and writes manifest_<command>.json into dir.
  std::filesystem::path write(const std::filesystem::path& dir);

 private:
  static nlohmann::ordered_json describe_file(const std::filesystem::path& path);

  std::string command_;
  nlohmann::ordered_json doc_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace drowsyctl
