#include "klan/pipeline/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "klan/error.hpp"

namespace klan::pipeline {

using nlohmann::json;

void write_manifest(const Manifest& m, const std::string& file) {
  json j{{"command", m.command},
         {"config_file", m.config_file},
         {"config_fingerprint", m.config_fingerprint},
         {"seeds", m.seeds},
         {"inputs", m.inputs},
         {"outputs", m.outputs},
         {"version", m.version}};
  std::ofstream out(file);
  if (!out) throw DataError("cannot write manifest: " + file);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("manifest write failed: " + file);
}

Manifest read_manifest(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open manifest: " + file);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("bad manifest " + file + ": " + e.what());
  }
  Manifest m;
  m.command = j.at("command").get<std::string>();
  m.config_file = j.at("config_file").get<std::string>();
  m.config_fingerprint = j.at("config_fingerprint").get<std::uint64_t>();
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  m.inputs = j.at("inputs").get<std::vector<std::string>>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.version = j.at("version").get<std::string>();
  return m;
}

}  // namespace klan::pipeline
