#pragma once

#include <string>
#include <vector>

#include "trajsr/config.hpp"

namespace trajsr::cli {

struct LabeledPath {
    std::string label;
    std::string path;
};

// Each command wraps one pipeline stage: reads inputs named in cfg or
// passed explicitly, writes outputs under cfg.paths.out_dir, prints a short
// summary to stdout, and throws on any error (the CLI maps exceptions to a
// single-line `error: ...` on stderr and exit code 1).

void cmd_gen(const PipelineConfig& cfg);
void cmd_degrade(const PipelineConfig& cfg, const std::string& in_path);
void cmd_train(const PipelineConfig& cfg, const std::string& degraded_path, const std::string& original_path);
void cmd_reconstruct(const PipelineConfig& cfg, const std::string& in_path);
void cmd_mapmatch(const PipelineConfig& cfg, const std::string& in_path);
void cmd_eval(const PipelineConfig& cfg, const std::vector<LabeledPath>& candidates,
              const std::string& reference_path);
void cmd_report(const std::vector<std::string>& eval_paths, const std::vector<LabeledPath>& overlays,
                const std::string& out_dir);

// "<out_dir>/<name>" unless name is absolute.
std::string join_out(const std::string& out_dir, const std::string& name);

// "label=path" -> LabeledPath; label restricted to [A-Za-z0-9_-]+.
LabeledPath parse_labeled(const std::string& arg);

}  // namespace trajsr::cli
