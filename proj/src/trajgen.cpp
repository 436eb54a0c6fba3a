#include "trajsr/trajgen.hpp"

#include <cmath>
#include <stdexcept>

#include "trajsr/rng.hpp"

namespace trajsr::trajgen {

void GenConfig::validate() const {
    if (n_traj < 1) throw std::invalid_argument("gen config: n_traj must be >= 1");
    if (!(speed_mps > 0.0)) throw std::invalid_argument("gen config: speed_mps must be > 0");
    if (!(dt_s > 0.0)) throw std::invalid_argument("gen config: dt_s must be > 0");
    if (max_len < 2) throw std::invalid_argument("gen config: max_len must be >= 2");
    geo::require_valid(bbox.lo, "gen config bbox");
    geo::require_valid(bbox.hi, "gen config bbox");
    if (!(bbox.lo.lat < bbox.hi.lat) || !(bbox.lo.lon < bbox.hi.lon)) {
        throw std::invalid_argument("gen config: degenerate bbox");
    }
}

Trajectory path_to_trajectory(const roadnet::RoadGraph& g, const std::vector<roadnet::NodeId>& path,
                              double speed_mps, double dt_s, const std::string& id) {
    if (path.empty()) throw std::invalid_argument("path_to_trajectory: empty path");
    if (!(speed_mps > 0.0) || !(dt_s > 0.0)) {
        throw std::invalid_argument("path_to_trajectory: speed and dt must be > 0");
    }
    const geo::LocalFrame& f = g.frame();
    std::vector<std::pair<double, double>> pts;
    pts.reserve(path.size());
    for (roadnet::NodeId id_ : path) pts.push_back(geo::to_local(f, g.coord(id_)));

    std::vector<double> cum{0.0};  // meters along the polyline
    for (size_t i = 1; i < pts.size(); ++i) {
        cum.push_back(cum.back() +
                      std::hypot(pts[i].first - pts[i - 1].first, pts[i].second - pts[i - 1].second));
    }
    double total_m = cum.back();
    if (!(total_m > 0.0)) throw std::invalid_argument("path_to_trajectory: zero-length polyline");
    double total_s = total_m / speed_mps;

    auto locate = [&](double dist_m) -> geo::GeoPoint {
        size_t seg = 1;
        while (seg < cum.size() - 1 && cum[seg] < dist_m) ++seg;
        double seg_len = cum[seg] - cum[seg - 1];
        double a = seg_len > 0.0 ? (dist_m - cum[seg - 1]) / seg_len : 0.0;
        double x = pts[seg - 1].first + a * (pts[seg].first - pts[seg - 1].first);
        double y = pts[seg - 1].second + a * (pts[seg].second - pts[seg - 1].second);
        return geo::from_local(f, x, y);
    };

    Trajectory tr{id, {}};
    for (long k = 0;; ++k) {
        double t = dt_s * static_cast<double>(k);
        if (t >= total_s - 1e-9) break;
        tr.points.push_back(TrajPoint{locate(t * speed_mps), t});
    }
    tr.points.push_back(TrajPoint{geo::from_local(f, pts.back().first, pts.back().second), total_s});
    return tr;
}

std::vector<Trajectory> generate_dataset(const roadnet::RoadGraph& g, const GenConfig& cfg) {
    cfg.validate();
    if (g.empty()) throw std::invalid_argument("generate_dataset: empty graph");

    std::vector<roadnet::NodeId> pool;
    for (roadnet::NodeId id : g.node_ids()) {
        if (cfg.bbox.contains(g.coord(id))) pool.push_back(id);
    }
    if (pool.size() < 2) {
        throw std::runtime_error("generate_dataset: fewer than 2 graph nodes inside the bbox");
    }

    std::vector<Trajectory> out;
    out.reserve(cfg.n_traj);
    for (int i = 0; i < cfg.n_traj; ++i) {
        rng::Rng r(rng::derive_seed(cfg.seed, static_cast<uint64_t>(i)));
        bool ok = false;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            auto iu = static_cast<size_t>(r.uniform_int(0, static_cast<int64_t>(pool.size()) - 1));
            auto iv = static_cast<size_t>(r.uniform_int(0, static_cast<int64_t>(pool.size()) - 1));
            if (iu == iv) continue;
            std::vector<roadnet::NodeId> path;
            try {
                path = roadnet::shortest_path(g, pool[iu], pool[iv]);
            } catch (const std::runtime_error&) {
                continue;  // unreachable pair, redraw
            }
            Trajectory tr = path_to_trajectory(g, path, cfg.speed_mps, cfg.dt_s,
                                               "traj-" + std::to_string(i));
            if (tr.points.size() < 2 || tr.points.size() > static_cast<size_t>(cfg.max_len)) {
                continue;
            }
            out.push_back(std::move(tr));
            ok = true;
            break;
        }
        if (!ok) {
            throw std::runtime_error("generate_dataset: retry budget exhausted for trajectory " +
                                     std::to_string(i) + "; check bbox/max_len against the graph");
        }
    }
    return out;
}

std::array<std::vector<Trajectory>, 3> split_dataset(const std::vector<Trajectory>& trajs,
                                                     double train_ratio, double val_ratio,
                                                     double test_ratio, uint64_t seed) {
    if (!(train_ratio > 0.0) || !(val_ratio > 0.0) || !(test_ratio > 0.0)) {
        throw std::invalid_argument("split_dataset: ratios must be positive");
    }
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) {
        throw std::invalid_argument("split_dataset: ratios must sum to 1");
    }
    if (trajs.size() < 3) throw std::runtime_error("split_dataset: need at least 3 trajectories");

    std::vector<Trajectory> shuffled = trajs;
    rng::Rng r(seed);
    r.shuffle(shuffled);

    size_t n = shuffled.size();
    size_t n_val = static_cast<size_t>(std::floor(val_ratio * static_cast<double>(n)));
    size_t n_test = static_cast<size_t>(std::floor(test_ratio * static_cast<double>(n)));
    size_t n_train = n - n_val - n_test;  // remainder goes to train

    std::array<std::vector<Trajectory>, 3> parts;
    parts[0].assign(shuffled.begin(), shuffled.begin() + n_train);
    parts[1].assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
    parts[2].assign(shuffled.begin() + n_train + n_val, shuffled.end());
    return parts;
}

}  // namespace trajsr::trajgen
