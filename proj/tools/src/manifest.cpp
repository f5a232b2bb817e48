#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <stdexcept>

#include "lantern/io.hpp"

namespace lantern::cli {

std::string git_blob_sha1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string head = "blob " + std::to_string(body.size()) + '\0';

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), head.data(), head.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), body.data(), body.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("sha1 failed for " + path.string());
  }

  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

void RunManifest::add_input(const std::filesystem::path& p) {
  inputs.push_back({p.generic_string(), git_blob_sha1(p)});
}

void RunManifest::add_output(const std::filesystem::path& p) {
  outputs.push_back({p.generic_string(), git_blob_sha1(p)});
}

nlohmann::json RunManifest::to_json() const {
  auto records = [](const std::vector<FileRecord>& files) {
    auto arr = nlohmann::json::array();
    for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha1", f.sha1}});
    return arr;
  };
  return {{"command", command},
          {"config", config},
          {"seeds", seeds},
          {"inputs", records(inputs)},
          {"outputs", records(outputs)},
          {"wall_time_s", wall_time_s}};
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lantern::cli
