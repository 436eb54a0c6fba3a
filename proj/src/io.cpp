#include "trajsr/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace trajsr::io {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<Trajectory> read_trajectories(std::istream& in, const std::string& source_name) {
    std::vector<Trajectory> out;
    std::unordered_map<std::string, size_t> index;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(source_name + ":" + std::to_string(lineno) +
                                     ": bad JSONL record: " + e.what());
        }
        if (!rec.contains("traj_id") || !rec.contains("seq") || !rec.contains("lat") ||
            !rec.contains("lon") || !rec.contains("t")) {
            throw std::runtime_error(source_name + ":" + std::to_string(lineno) +
                                     ": record missing required field");
        }
        std::string id = rec["traj_id"].get<std::string>();
        auto [it, inserted] = index.try_emplace(id, out.size());
        if (inserted) out.push_back(Trajectory{id, {}});
        Trajectory& tr = out[it->second];
        long seq = rec["seq"].get<long>();
        if (seq != static_cast<long>(tr.points.size())) {
            throw std::runtime_error(source_name + ":" + std::to_string(lineno) + ": traj '" + id +
                                     "' has out-of-order seq " + std::to_string(seq));
        }
        tr.points.push_back(TrajPoint{{rec["lat"].get<double>(), rec["lon"].get<double>()},
                                      rec["t"].get<double>()});
    }
    return out;
}

std::vector<Trajectory> read_trajectories_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory file: " + path);
    return read_trajectories(in, path);
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs) {
    for (const auto& tr : trajs) {
        for (size_t i = 0; i < tr.points.size(); ++i) {
            ordered_json rec;
            rec["traj_id"] = tr.id;
            rec["seq"] = i;
            rec["lat"] = tr.points[i].pos.lat;
            rec["lon"] = tr.points[i].pos.lon;
            rec["t"] = tr.points[i].t;
            out << rec.dump() << '\n';
        }
    }
}

void write_trajectories_file(const std::string& path, const std::vector<Trajectory>& trajs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_trajectories(out, trajs);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

}  // namespace trajsr::io
