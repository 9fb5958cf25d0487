#include "stepcast/manifest.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace stepcast {

using ordered_json = nlohmann::ordered_json;

std::string fingerprint_bytes(const void* data, size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for fingerprinting: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  return fingerprint_bytes(bytes.data(), bytes.size());
}

std::string utc_timestamp_now() {
  std::time_t t;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::to_json() const {
  ordered_json j;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["argv"] = argv;
  j["config_hashes"] = config_hashes;
  j["input_fingerprints"] = input_fingerprints;
  j["seeds"] = seeds;
  j["timestamp"] = timestamp;
  j["outputs"] = outputs;
  j["kernel_backend"] = kernel_backend;
  return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  RunManifest m;
  m.tool_version = j.at("tool_version").get<std::string>();
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  if (j.contains("config_hashes")) {
    m.config_hashes = j["config_hashes"].get<std::map<std::string, std::string>>();
  }
  if (j.contains("input_fingerprints")) {
    m.input_fingerprints = j["input_fingerprints"].get<std::map<std::string, std::string>>();
  }
  if (j.contains("seeds")) m.seeds = j["seeds"].get<std::map<std::string, uint64_t>>();
  m.timestamp = j.value("timestamp", "");
  if (j.contains("outputs")) m.outputs = j["outputs"].get<std::map<std::string, std::string>>();
  m.kernel_backend = j.value("kernel_backend", "");
  return m;
}

RunManifest RunManifest::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void write_manifest_file(const std::string& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << m.to_json() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("I/O error writing " + path);
}

}  // namespace stepcast
