#include "trajsr/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <stdexcept>

#include "trajsr/degrade.hpp"
#include "trajsr/io.hpp"
#include "trajsr/mapmatch.hpp"
#include "trajsr/metrics.hpp"
#include "trajsr/model.hpp"
#include "trajsr/parallel.hpp"
#include "trajsr/rng.hpp"
#include "trajsr/svg.hpp"
#include "trajsr/trajgen.hpp"

namespace trajsr::cli {

namespace {

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output dir " + out_dir + ": " + ec.message());
}

degrade::HexGrid hex_grid_for(const PipelineConfig& cfg, const roadnet::RoadGraph& g) {
    return degrade::HexGrid{g.frame(), cfg.hex_edge_len_m()};
}

std::string fmt_km(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// Pairs (candidate, reference) by traj_id; both files must hold exactly the
// same id set. Pair order follows the reference file.
std::vector<std::pair<Trajectory, Trajectory>> pair_by_id(const std::vector<Trajectory>& candidates,
                                                          const std::vector<Trajectory>& reference,
                                                          const std::string& candidate_name) {
    std::map<std::string, const Trajectory*> by_id;
    for (const auto& t : candidates) by_id.emplace(t.id, &t);
    if (by_id.size() != candidates.size())
        throw std::invalid_argument(candidate_name + ": duplicate traj_id");
    std::vector<std::pair<Trajectory, Trajectory>> pairs;
    pairs.reserve(reference.size());
    for (const auto& ref : reference) {
        auto it = by_id.find(ref.id);
        if (it == by_id.end())
            throw std::invalid_argument(candidate_name + ": missing trajectory " + ref.id);
        pairs.emplace_back(*it->second, ref);
    }
    if (candidates.size() != reference.size())
        throw std::invalid_argument(candidate_name + ": has trajectories not present in the reference");
    return pairs;
}

}  // namespace

std::string join_out(const std::string& out_dir, const std::string& name) {
    if (!name.empty() && name[0] == '/') return name;
    if (out_dir.empty() || out_dir == ".") return name;
    return out_dir + "/" + name;
}

LabeledPath parse_labeled(const std::string& arg) {
    size_t eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= arg.size())
        throw std::invalid_argument("expected label=path, got '" + arg + "'");
    LabeledPath lp;
    lp.label = arg.substr(0, eq);
    lp.path = arg.substr(eq + 1);
    for (char c : lp.label) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                  c == '-';
        if (!ok) throw std::invalid_argument("bad label '" + lp.label + "' (use [A-Za-z0-9_-])");
    }
    return lp;
}

void cmd_gen(const PipelineConfig& cfg) {
    roadnet::RoadGraph g = roadnet::load_graph_file(cfg.paths.graph);
    trajgen::GenConfig gen = cfg.gen;
    gen.seed = rng::derive_seed(cfg.seed, "gen");
    std::vector<Trajectory> trajs = trajgen::generate_dataset(g, gen);

    ensure_out_dir(cfg.paths.out_dir);
    std::string out_path = join_out(cfg.paths.out_dir, "original.jsonl");
    io::write_trajectories_file(out_path, trajs);

    geo::BBox bbox = bbox_of(trajs);
    std::cout << "gen: wrote " << trajs.size() << " trajectories to " << out_path << " (lat ["
              << bbox.lo.lat << ", " << bbox.hi.lat << "], lon [" << bbox.lo.lon << ", " << bbox.hi.lon
              << "])\n";
}

void cmd_degrade(const PipelineConfig& cfg, const std::string& in_path) {
    std::vector<Trajectory> trajs = io::read_trajectories_file(in_path);
    std::vector<Trajectory> out;
    out.reserve(trajs.size());

    if (cfg.degrade.kind == "hex") {
        roadnet::RoadGraph g = roadnet::load_graph_file(cfg.paths.graph);
        degrade::HexGrid grid = hex_grid_for(cfg, g);
        for (const auto& t : trajs) out.push_back(degrade::truncate_trajectory(grid, t));
    } else if (cfg.degrade.kind == "round") {
        for (const auto& t : trajs) out.push_back(degrade::round_coords(t, cfg.degrade.decimals));
    } else {
        uint64_t stage_seed = rng::derive_seed(cfg.seed, "degrade");
        for (size_t i = 0; i < trajs.size(); ++i)
            out.push_back(degrade::add_noise(trajs[i], cfg.degrade.sigma_m,
                                             rng::derive_seed(stage_seed, static_cast<uint64_t>(i))));
    }

    ensure_out_dir(cfg.paths.out_dir);
    std::string out_path = join_out(cfg.paths.out_dir, "degraded.jsonl");
    io::write_trajectories_file(out_path, out);
    std::cout << "degrade: " << cfg.degrade.kind << " applied to " << out.size() << " trajectories -> "
              << out_path << "\n";
}

void cmd_train(const PipelineConfig& cfg, const std::string& degraded_path, const std::string& original_path) {
    roadnet::RoadGraph g = roadnet::load_graph_file(cfg.paths.graph);
    std::vector<Trajectory> degraded = io::read_trajectories_file(degraded_path);
    std::vector<Trajectory> original = io::read_trajectories_file(original_path);

    std::map<std::string, const Trajectory*> orig_by_id;
    for (const auto& t : original) orig_by_id.emplace(t.id, &t);
    std::vector<std::pair<Trajectory, Trajectory>> pairs;
    pairs.reserve(degraded.size());
    for (const auto& d : degraded) {
        auto it = orig_by_id.find(d.id);
        if (it == orig_by_id.end())
            throw std::invalid_argument(original_path + ": no original for trajectory " + d.id);
        pairs.emplace_back(d, *it->second);
    }

    model::ModelConfig mc = cfg.model;
    mc.seed = rng::derive_seed(cfg.seed, "train");
    model::Checkpoint ckpt = model::train(g, pairs, mc);
    if (cfg.degrade.kind == "hex") ckpt.hexgrid = hex_grid_for(cfg, g);

    ensure_out_dir(cfg.paths.out_dir);
    std::string ckpt_path = join_out(cfg.paths.out_dir, cfg.paths.checkpoint);
    model::save_checkpoint(ckpt_path, ckpt);
    std::cout << "train: " << pairs.size() << " pairs, " << mc.epochs << " epochs, loss "
              << ckpt.training_log.front() << " -> " << ckpt.training_log.back() << ", checkpoint "
              << ckpt_path << "\n";
}

void cmd_reconstruct(const PipelineConfig& cfg, const std::string& in_path) {
    std::string ckpt_path = join_out(cfg.paths.out_dir, cfg.paths.checkpoint);
    model::Checkpoint ckpt = model::load_checkpoint(ckpt_path);
    roadnet::RoadGraph g = roadnet::load_graph_file(cfg.paths.graph);
    std::vector<Trajectory> trajs = io::read_trajectories_file(in_path);

    std::vector<Trajectory> out(trajs.size());
    par::parallel_for(trajs.size(), [&](size_t i) { out[i] = model::reconstruct(ckpt, g, trajs[i]); });

    ensure_out_dir(cfg.paths.out_dir);
    std::string out_path = join_out(cfg.paths.out_dir, "reconstructed.jsonl");
    io::write_trajectories_file(out_path, out);
    std::cout << "reconstruct: " << out.size() << " trajectories -> " << out_path << "\n";
}

void cmd_mapmatch(const PipelineConfig& cfg, const std::string& in_path) {
    roadnet::RoadGraph g = roadnet::load_graph_file(cfg.paths.graph);
    std::vector<Trajectory> trajs = io::read_trajectories_file(in_path);

    std::vector<Trajectory> out(trajs.size());
    par::parallel_for(trajs.size(), [&](size_t i) { out[i] = mapmatch::map_match(g, trajs[i], cfg.hmm); });

    ensure_out_dir(cfg.paths.out_dir);
    std::string out_path = join_out(cfg.paths.out_dir, "matched.jsonl");
    io::write_trajectories_file(out_path, out);
    std::cout << "mapmatch: " << out.size() << " trajectories -> " << out_path << "\n";
}

void cmd_eval(const PipelineConfig& cfg, const std::vector<LabeledPath>& candidates,
              const std::string& reference_path) {
    if (candidates.empty()) throw std::invalid_argument("eval: no candidates given");
    std::vector<Trajectory> reference = io::read_trajectories_file(reference_path);
    std::vector<double> bins = cfg.eval_bin_edges();

    ensure_out_dir(cfg.paths.out_dir);
    std::string csv = metrics::csv_header() + "\n";
    for (const auto& [label, path] : candidates) {
        std::vector<Trajectory> cand = io::read_trajectories_file(path);
        auto pairs = pair_by_id(cand, reference, path);
        metrics::EvalReport report = metrics::evaluate(pairs, bins, label);
        std::string json_path = join_out(cfg.paths.out_dir, "eval_" + label + ".json");
        io::write_text_file(json_path, metrics::to_json(report));
        csv += metrics::to_csv_row(report) + "\n";
        std::cout << "eval: " << label << " mean " << fmt_km(report.mean_km) << " km, median "
                  << fmt_km(report.median_km) << " km, p85 " << fmt_km(report.p85_km) << " km over "
                  << report.frechet_km.size() << " pairs\n";
    }
    std::string csv_path = join_out(cfg.paths.out_dir, "eval.csv");
    io::write_text_file(csv_path, csv);
    std::cout << "eval: wrote " << csv_path << "\n";
}

void cmd_report(const std::vector<std::string>& eval_paths, const std::vector<LabeledPath>& overlays,
                const std::string& out_dir) {
    if (eval_paths.empty()) throw std::invalid_argument("report: no eval files given");
    std::vector<metrics::EvalReport> reports;
    reports.reserve(eval_paths.size());
    for (const auto& path : eval_paths) reports.push_back(metrics::report_from_json(io::read_text_file(path)));

    ensure_out_dir(out_dir);

    std::string md;
    md += "# Evaluation report\n\n";
    md += "| Method | Mean error |\n";
    md += "| --- | --- |\n";
    for (const auto& r : reports) md += "| " + r.label + " | " + fmt_km(r.mean_km) + " km |\n";
    md += "\n## Statistics\n\n";
    md += "| label | mean km | median km | p85 km | n |\n";
    md += "| --- | --- | --- | --- | --- |\n";
    for (const auto& r : reports) {
        md += "| " + r.label + " | " + fmt_km(r.mean_km) + " | " + fmt_km(r.median_km) + " | " +
              fmt_km(r.p85_km) + " | " + std::to_string(r.frechet_km.size()) + " |\n";
    }
    md += "\n![Error histogram](histogram.svg)\n";

    io::write_text_file(join_out(out_dir, "histogram.svg"), svg::histogram_svg(reports));

    if (!overlays.empty()) {
        std::vector<std::vector<Trajectory>> files;
        files.reserve(overlays.size());
        for (const auto& [label, path] : overlays) files.push_back(io::read_trajectories_file(path));
        // first id of the first file that all files contain
        std::string common_id;
        for (const auto& t : files[0]) {
            bool everywhere = true;
            for (size_t i = 1; i < files.size() && everywhere; ++i) {
                everywhere = false;
                for (const auto& other : files[i]) {
                    if (other.id == t.id) {
                        everywhere = true;
                        break;
                    }
                }
            }
            if (everywhere) {
                common_id = t.id;
                break;
            }
        }
        if (common_id.empty()) throw std::invalid_argument("report: overlay files share no traj_id");
        std::vector<std::pair<std::string, Trajectory>> layers;
        for (size_t i = 0; i < overlays.size(); ++i) {
            for (const auto& t : files[i]) {
                if (t.id == common_id) {
                    layers.emplace_back(overlays[i].label, t);
                    break;
                }
            }
        }
        io::write_text_file(join_out(out_dir, "overlay.svg"), svg::overlay_svg(layers));
        md += "\n![Trajectory overlay](overlay.svg)\n";
        std::cout << "report: overlay of " << common_id << " -> " << join_out(out_dir, "overlay.svg") << "\n";
    }

    io::write_text_file(join_out(out_dir, "report.md"), md);
    std::cout << "report: " << reports.size() << " methods -> " << join_out(out_dir, "report.md") << "\n";
}

}  // namespace trajsr::cli
