#pragma once

#include <filesystem>
#include <string>

namespace egotopo::stages {

// Pipeline stages behind the C API and the CLI. Each stage merges the given
// JSON overrides over the built-in defaults, runs, and writes its artifacts
// plus effective_config.json and files.json into out_dir. Overrides may be
// empty. All stages throw UsageError / DataError / InternalError.

void run_synth(const std::string& overrides, const std::filesystem::path& out_dir);

void run_pairs(const std::string& overrides, const std::filesystem::path& manifest,
               const std::filesystem::path& correspondences,  // may be empty
               const std::filesystem::path& out_dir);

void run_train_sim(const std::string& overrides, const std::filesystem::path& manifest,
                   const std::filesystem::path& pairs_file,
                   const std::filesystem::path& out_dir);

void run_build_graphs(const std::string& overrides,
                      const std::filesystem::path& manifest,
                      const std::filesystem::path& sim_checkpoint,  // empty = cosine
                      const std::filesystem::path& out_dir);

void run_link(const std::string& overrides, const std::filesystem::path& manifest,
              const std::filesystem::path& graphs_dir,
              const std::filesystem::path& out_dir);

void run_train_affordance(const std::string& overrides,
                          const std::filesystem::path& manifest,
                          const std::filesystem::path& graphs_dir,
                          const std::filesystem::path& out_dir);

void run_eval_affordance(const std::string& overrides,
                         const std::filesystem::path& manifest,
                         const std::filesystem::path& checkpoint,
                         const std::filesystem::path& eval_file,
                         const std::filesystem::path& out_dir);

void run_train_anticipation(const std::string& overrides,
                            const std::filesystem::path& manifest,
                            const std::filesystem::path& sim_checkpoint,  // empty = cosine
                            const std::filesystem::path& out_dir);

void run_eval_anticipation(const std::string& overrides,
                           const std::filesystem::path& manifest,
                           const std::filesystem::path& checkpoint,
                           const std::filesystem::path& sim_checkpoint,  // empty = cosine
                           const std::filesystem::path& out_dir);

void run_export(const std::filesystem::path& graph_json, const std::string& format,
                bool undirected, const std::filesystem::path& out_path);

}  // namespace egotopo::stages
