#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "trajsr/commands.hpp"
#include "trajsr/config.hpp"

#include <CLI11.hpp>

using trajsr::cli::LabeledPath;
using trajsr::cli::PipelineConfig;

int main(int argc, char** argv) {
    CLI::App app{"GPS trajectory super-resolution toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.failure_message([](const CLI::App*, const CLI::Error& e) {
        return "error: " + std::string(e.what()) + "\n";
    });

    std::string config_path;
    uint64_t seed_flag = 0;
    std::string out_flag;
    app.add_option("--config", config_path, "pipeline config file (TOML subset)");
    CLI::Option* seed_opt = app.add_option("--seed", seed_flag, "global seed (overrides config)");
    app.add_option("--out", out_flag, "output directory (overrides paths.out_dir)");

    auto load_cfg = [&]() {
        if (config_path.empty()) throw std::invalid_argument("--config is required");
        PipelineConfig cfg = PipelineConfig::from_file(config_path);
        if (seed_opt->count() > 0) cfg.seed = seed_flag;
        if (!out_flag.empty()) cfg.paths.out_dir = out_flag;
        return cfg;
    };

    std::string in_path, ref_path;
    std::vector<std::string> candidate_args, overlay_args, eval_json_paths;

    CLI::App* gen = app.add_subcommand("gen", "generate virtual trajectories over the road graph");
    gen->callback([&]() { trajsr::cli::cmd_gen(load_cfg()); });

    CLI::App* degrade = app.add_subcommand("degrade", "apply privacy degradation to a trajectory file");
    degrade->add_option("--in", in_path, "input trajectories (JSONL)")->required();
    degrade->callback([&]() { trajsr::cli::cmd_degrade(load_cfg(), in_path); });

    CLI::App* train = app.add_subcommand("train", "train the super-resolution model");
    train->add_option("--in", in_path, "degraded trajectories (JSONL)")->required();
    train->add_option("--ref", ref_path, "original trajectories (JSONL)")->required();
    train->callback([&]() { trajsr::cli::cmd_train(load_cfg(), in_path, ref_path); });

    CLI::App* reconstruct = app.add_subcommand("reconstruct", "reconstruct trajectories with a trained checkpoint");
    reconstruct->add_option("--in", in_path, "degraded trajectories (JSONL)")->required();
    reconstruct->callback([&]() { trajsr::cli::cmd_reconstruct(load_cfg(), in_path); });

    CLI::App* mapmatch = app.add_subcommand("mapmatch", "HMM map-matching baseline");
    mapmatch->add_option("--in", in_path, "input trajectories (JSONL)")->required();
    mapmatch->callback([&]() { trajsr::cli::cmd_mapmatch(load_cfg(), in_path); });

    CLI::App* eval = app.add_subcommand("eval", "evaluate candidates against a reference");
    eval->add_option("--ref", ref_path, "reference trajectories (JSONL)")->required();
    eval->add_option("--candidate", candidate_args, "candidate as label=path (repeatable)")->required();
    eval->callback([&]() {
        std::vector<LabeledPath> candidates;
        for (const auto& arg : candidate_args) candidates.push_back(trajsr::cli::parse_labeled(arg));
        trajsr::cli::cmd_eval(load_cfg(), candidates, ref_path);
    });

    CLI::App* report = app.add_subcommand("report", "render Markdown + SVG from eval reports");
    report->add_option("--in", eval_json_paths, "eval report JSON file (repeatable)")->required();
    report->add_option("--overlay", overlay_args, "trajectory file as label=path (repeatable)");
    report->callback([&]() {
        std::vector<LabeledPath> overlays;
        for (const auto& arg : overlay_args) overlays.push_back(trajsr::cli::parse_labeled(arg));
        trajsr::cli::cmd_report(eval_json_paths, overlays, out_flag.empty() ? "." : out_flag);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
