#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "egotopo/types.hpp"

namespace egotopo {

// Manifest layout (single JSON file):
//   {
//     "schema_version": 1,
//     "videos": [{"video_id": ..., "embeddings": path, "kitchen": ...}, ...],
//     "annotations": [path, ...],             // JSON-lines clip files
//     "vocab": {...} | path,                  // inline object or path to JSON
//     "target_fps": 6.0,                      // optional resample at load
//     "splits": {"train": [...], "eval": [...]}   // optional
//   }
// Embedding payloads are raw little-endian float32, row-major num_frames x
// dim, with a sidecar JSON header at <path>.json holding
// {"video_id", "num_frames", "dim", "fps"}.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes a dataset in the exact formats load_dataset reads it back from.
// Embeddings land under <dir>/videos/, annotations in annotations.jsonl and
// the manifest at <dir>/manifest.json. Returns the manifest path.
std::filesystem::path save_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct SubsampleResult {
  EmbeddingMatrix video;
  int stride = 1;
  std::vector<int> kept_frames;  // original indices of kept rows
};

// Keeps every round(fps/target_fps)-th frame starting at frame 0.
SubsampleResult subsample_fps(const EmbeddingMatrix& m, double target_fps);

// Maps an original frame index to the index of the nearest kept frame,
// breaking ties toward the earlier frame.
int remap_frame(int frame, int stride, int num_kept);

ClipAnnotation remap_annotation(const ClipAnnotation& ann, int stride, int num_kept);

void validate_dataset(const Dataset& ds);

EmbeddingMatrix load_embedding_file(const std::filesystem::path& bin_path);
void save_embedding_file(const EmbeddingMatrix& m, const std::filesystem::path& bin_path);

std::vector<ClipAnnotation> load_annotations_file(const std::filesystem::path& path);
void save_annotations_file(const std::vector<ClipAnnotation>& anns,
                           const std::filesystem::path& path);

InteractionVocab vocab_from_json_text(const std::string& text);

}  // namespace egotopo
