#include "egotopo/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "egotopo/common.hpp"
#include "json.hpp"

namespace egotopo {

namespace {
constexpr char kMagic[8] = {'E', 'G', 'T', 'O', 'P', 'C', 'K', 'P'};
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  std::uint32_t version = kFormatVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  std::uint64_t len = ckpt.meta_json.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(ckpt.meta_json.data(), static_cast<std::streamsize>(len));
  std::uint64_t n = static_cast<std::uint64_t>(ckpt.params.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(ckpt.params.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw DataError("not a model checkpoint: " + path.string());
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kFormatVersion)
    throw DataError("checkpoint version mismatch in " + path.string() + " (have " +
                    std::to_string(version) + ", expected " +
                    std::to_string(kFormatVersion) + ")");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  Checkpoint ckpt;
  ckpt.meta_json.resize(len);
  in.read(ckpt.meta_json.data(), static_cast<std::streamsize>(len));
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  ckpt.params.resize(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(ckpt.params.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DataError("truncated checkpoint " + path.string());
  return ckpt;
}

std::string checkpoint_kind(const Checkpoint& ckpt) {
  try {
    return nlohmann::json::parse(ckpt.meta_json).at("kind").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint metadata unreadable: ") + e.what());
  }
}

}  // namespace egotopo
