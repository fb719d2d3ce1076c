#include "manifest.hpp"

#include "gfold/riccati.hpp"

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <memory>

namespace gfold::cli {

namespace fs = std::filesystem;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StageError("manifest", "cannot read '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw StageError("manifest", "sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

json build_manifest(const RunConfig& c, const RunOptions& opt, const RunResult& r, double wall_time) {
  json files = json::array();
  for (const auto& f : r.files) {
    const fs::path p = fs::path(opt.out_dir) / f;
    files.push_back({{"path", f}, {"sha256", sha256_file(p.string())}, {"bytes", fs::file_size(p)}});
  }
  return {{"tool", "gfold"},
          {"version", GFOLD_VERSION},
          {"experiment", c.experiment},
          {"config", to_json(c)},
          {"golden", {{"omega0", omega0_golden}, {"omega0_tol", omega0_golden_tol}}},
          {"workers", opt.workers},
          {"wall_time", wall_time},
          {"files", files}};
}

std::string write_manifest(const std::string& out_dir, const json& manifest) {
  const fs::path p = fs::path(out_dir) / "run_manifest.json";
  std::ofstream out(p, std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw StageError("manifest", "cannot write '" + p.string() + "'");
  return p.string();
}

}  // namespace gfold::cli
