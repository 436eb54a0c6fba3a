#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajsr/mapmatch.hpp"
#include "trajsr/model.hpp"
#include "trajsr/trajgen.hpp"

namespace trajsr::cli {

// Minimal TOML subset: [sections], key = value, # comments. Values are
// quoted strings, numbers, booleans, or flat arrays of numbers.
struct TomlValue {
    enum class Kind { kString, kNumber, kBool, kArray };
    Kind kind = Kind::kString;
    std::string str;              // kString
    std::string raw;              // kNumber: original token, parsed on demand
    bool boolean = false;         // kBool
    std::vector<double> array;    // kArray
    int line = 0;
};

struct TomlDoc {
    // section name ("" for the root) -> key -> value
    std::map<std::string, std::map<std::string, TomlValue>> sections;
};

TomlDoc parse_toml(const std::string& text, const std::string& source_name);

struct PathsConfig {
    std::string graph;
    std::string out_dir = ".";
    std::string checkpoint = "model.ckpt";
};

struct DegradeConfig {
    std::string kind = "hex";  // hex | round | noise
    int level = 7;
    std::optional<double> edge_len_m;  // overrides level when present
    int decimals = 3;
    double sigma_m = 50.0;
};

struct EvalBins {
    double bin_width_km = 0.1;
    double bin_max_km = 2.0;
};

// One config file drives the whole pipeline; unknown sections or keys are
// errors. Stage seeds all derive from the single global seed.
struct PipelineConfig {
    uint64_t seed = 42;
    PathsConfig paths;
    trajgen::GenConfig gen;
    DegradeConfig degrade;
    model::ModelConfig model;
    mapmatch::HmmParams hmm;
    EvalBins eval;

    static PipelineConfig from_string(const std::string& text, const std::string& source_name);
    static PipelineConfig from_file(const std::string& path);

    // Hex edge length in meters implied by the degrade block.
    double hex_edge_len_m() const;
    std::vector<double> eval_bin_edges() const;
};

}  // namespace trajsr::cli
