#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace lantern::cli {

/// SHA-1 of "blob <size>\0<content>", the hash git assigns to a file.
std::string git_blob_sha1(const std::filesystem::path& path);

struct FileRecord {
  std::string path;
  std::string sha1;
};

/// One per command invocation, written next to its outputs.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
  double wall_time_s = 0.0;

  void add_input(const std::filesystem::path& p);
  void add_output(const std::filesystem::path& p);
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace lantern::cli
