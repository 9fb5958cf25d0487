#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace stepcast {

// Reproducibility record written next to every command's artifacts: the
// exact argv plus fingerprints of inputs and outputs. Re-running the
// recorded argv regenerates the artifacts bit-identically.
struct RunManifest {
  std::string tool_version;
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config_hashes;
  std::map<std::string, std::string> input_fingerprints;
  std::map<std::string, uint64_t> seeds;
  std::string timestamp;  // UTC ISO-8601; honors SOURCE_DATE_EPOCH
  std::map<std::string, std::string> outputs;  // filename -> fingerprint
  std::string kernel_backend;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
  static RunManifest from_json_file(const std::string& path);
};

// FNV-1a 64-bit over the raw bytes, rendered as "fnv1a64:<hex>".
std::string fingerprint_bytes(const void* data, size_t n);
std::string fingerprint_file(const std::string& path);

std::string utc_timestamp_now();

void write_manifest_file(const std::string& path, const RunManifest& m);

}  // namespace stepcast
