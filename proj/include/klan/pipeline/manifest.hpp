#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace klan::pipeline {

// Provenance record written next to every command's outputs. Contents are a
// pure function of the invocation (no timestamps, no hostnames), so rerunning
// a command reproduces the manifest byte for byte.
struct Manifest {
  std::string command;
  std::string config_file;
  std::uint64_t config_fingerprint = 0;  // 0 when no config file was given
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string version;  // library version
};

void write_manifest(const Manifest& m, const std::string& file);
Manifest read_manifest(const std::string& file);

}  // namespace klan::pipeline
