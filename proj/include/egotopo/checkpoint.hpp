#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace egotopo {

// Versioned model container: 8-byte magic, u32 format version, u64 metadata
// length, UTF-8 JSON metadata, then the flat parameter vector as little-endian
// float64. Readers reject unknown magics and version mismatches.
struct Checkpoint {
  std::string meta_json;     // must include a "kind" field
  Eigen::VectorXd params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Convenience: parse the metadata and return its "kind".
std::string checkpoint_kind(const Checkpoint& ckpt);

}  // namespace egotopo
