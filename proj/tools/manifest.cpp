#include "manifest.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "drowsy/error.hpp"

namespace drowsyctl {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Manifest::Manifest(std::string command, std::vector<std::string> argv, std::uint64_t seed)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
  doc_["command"] = command_;
  doc_["argv"] = std::move(argv);
  doc_["seed"] = seed;
  doc_["config"] = "";
  doc_["inputs"] = nlohmann::ordered_json::array();
  doc_["outputs"] = nlohmann::ordered_json::array();
}

void Manifest::set_config(std::string effective) { doc_["config"] = std::move(effective); }

nlohmann::ordered_json Manifest::describe_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw drowsy::Error("cannot read " + path.string() + " for checksumming");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::ordered_json j;
  j["path"] = path.string();
  j["bytes"] = bytes.size();
  j["fnv1a64"] = hex64(fnv1a64(bytes));
  return j;
}

void Manifest::add_input(const std::filesystem::path& path) {
  if (path == "-") {
    doc_["inputs"].push_back({{"path", "-"}});
    return;
  }
  doc_["inputs"].push_back(describe_file(path));
}

void Manifest::add_output(const std::filesystem::path& path) { doc_["outputs"].push_back(describe_file(path)); }

void Manifest::set_field(const std::string& key, nlohmann::ordered_json value) { doc_[key] = std::move(value); }

std::filesystem::path Manifest::write(const std::filesystem::path& dir) {
  doc_["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  const auto path = dir / ("manifest_" + command_ + ".json");
  std::ofstream out(path);
  if (!out) throw drowsy::Error("cannot write " + path.string());
  out << doc_.dump(2) << '\n';
  return path;
}

}  // namespace drowsyctl
