#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shaperank/io/io.hpp"

namespace shaperank::cli {

// Every pipeline setting as one flat key-value config, so defaults, config
// files, command-line overrides, and the provenance hash stamped into outputs
// all share a single representation.
io::Config default_config();

// The file overlaid on the defaults. Unknown keys are rejected so a typo
// fails loudly instead of silently keeping a default value.
io::Config load_config(const std::filesystem::path& path);

// Stage entry points. Each one reads its inputs, writes its outputs into the
// stage directory atomically, and prints a one-line summary to stdout. Stage
// outputs are pure functions of (inputs, config): rerunning with unchanged
// inputs rewrites byte-identical files. Bad inputs throw InputError; solver
// exhaustion throws ConvergenceError.
void run_extract(const io::Config& config, const std::filesystem::path& mesh_dir,
                 const std::filesystem::path& out);
void run_fit_bt(const io::Config& config, const std::filesystem::path& comparisons,
                const std::filesystem::path& out);
void run_train(const io::Config& config, const std::filesystem::path& dir);
void run_explain(const io::Config& config, const std::filesystem::path& dir);
void run_crosscat(const io::Config& config,
                  const std::vector<std::filesystem::path>& dirs,
                  const std::filesystem::path& out);
void run_synth(const io::Config& config, const std::filesystem::path& out);
void run_report(const io::Config& config, const std::filesystem::path& dir);

}  // namespace shaperank::cli
