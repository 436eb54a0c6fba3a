#include "trajsr/mapmatch.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "trajsr/geo.hpp"

namespace trajsr::mapmatch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Shortest-path distances from each needed endpoint, computed once per
// trajectory. Keyed by NodeId; values in km, +inf when unreachable.
class DistCache {
public:
    explicit DistCache(const roadnet::RoadGraph& g) : g_(g) {}

    const std::vector<double>& from(roadnet::NodeId src) {
        auto it = cache_.find(src);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(src, roadnet::shortest_distances(g_, src)).first->second;
    }

private:
    const roadnet::RoadGraph& g_;
    std::unordered_map<roadnet::NodeId, std::vector<double>> cache_;
};

struct Candidate {
    roadnet::EdgeProjection proj;
    double edge_len_m = 0.0;
    double emission_lp = 0.0;
};

// Network distance in meters between two on-edge projections: splice each
// onto its edge endpoints, take the best of the endpoint combinations, and
// for a shared edge also the direct along-edge segment.
double route_m(const roadnet::RoadGraph& g, DistCache& cache, const Candidate& a, const Candidate& b) {
    double best = std::numeric_limits<double>::infinity();
    if (a.proj.u == b.proj.u && a.proj.v == b.proj.v) {
        best = std::fabs(a.proj.frac - b.proj.frac) * a.edge_len_m;
    }
    double a_to[2] = {a.proj.frac * a.edge_len_m, (1.0 - a.proj.frac) * a.edge_len_m};
    double b_to[2] = {b.proj.frac * b.edge_len_m, (1.0 - b.proj.frac) * b.edge_len_m};
    roadnet::NodeId a_end[2] = {a.proj.u, a.proj.v};
    roadnet::NodeId b_end[2] = {b.proj.u, b.proj.v};
    for (int i = 0; i < 2; ++i) {
        const std::vector<double>& dists = cache.from(a_end[i]);
        for (int j = 0; j < 2; ++j) {
            double sp_km = dists[g.index_of(b_end[j])];
            double total = a_to[i] + sp_km * 1000.0 + b_to[j];
            if (total < best) best = total;
        }
    }
    return best;
}

}  // namespace

void HmmParams::validate() const {
    if (!(sigma_m > 0.0)) throw std::invalid_argument("HmmParams: sigma_m must be positive");
    if (!(beta_m > 0.0)) throw std::invalid_argument("HmmParams: beta_m must be positive");
    if (!(candidate_radius_m > 0.0)) throw std::invalid_argument("HmmParams: candidate_radius_m must be positive");
    if (max_candidates < 1) throw std::invalid_argument("HmmParams: max_candidates must be >= 1");
}

MatchResult map_match_detailed(const roadnet::RoadGraph& g, const Trajectory& traj, const HmmParams& params) {
    params.validate();
    if (traj.empty()) throw std::invalid_argument("map_match: empty trajectory");
    if (g.num_edges() == 0) throw std::invalid_argument("map_match: graph has no edges");

    size_t n = traj.size();
    std::vector<std::vector<Candidate>> cands(n);
    for (size_t i = 0; i < n; ++i) {
        auto projs = roadnet::project_to_edges(g, traj.points[i].pos, params.candidate_radius_m);
        if (projs.empty())
            throw std::runtime_error("map_match: unmatched point " + std::to_string(i) + " (no road within " +
                                     std::to_string(params.candidate_radius_m) + " m)");
        if (projs.size() > static_cast<size_t>(params.max_candidates))
            projs.resize(static_cast<size_t>(params.max_candidates));
        cands[i].reserve(projs.size());
        for (const auto& proj : projs) {
            Candidate c;
            c.proj = proj;
            c.edge_len_m = geo::haversine_km(g.coord(proj.u), g.coord(proj.v)) * 1000.0;
            c.emission_lp = -(proj.dist_m * proj.dist_m) / (2.0 * params.sigma_m * params.sigma_m);
            cands[i].push_back(c);
        }
    }

    DistCache cache(g);
    std::vector<std::vector<double>> score(n);
    std::vector<std::vector<size_t>> from(n);
    score[0].reserve(cands[0].size());
    for (const Candidate& c : cands[0]) score[0].push_back(c.emission_lp);
    from[0].assign(cands[0].size(), 0);

    for (size_t i = 1; i < n; ++i) {
        double gc_m = geo::haversine_km(traj.points[i - 1].pos, traj.points[i].pos) * 1000.0;
        score[i].assign(cands[i].size(), kNegInf);
        from[i].assign(cands[i].size(), 0);
        bool any = false;
        for (size_t j = 0; j < cands[i].size(); ++j) {
            double best = kNegInf;
            size_t best_prev = 0;
            // Candidates are ordered by (distance, u, v); strict improvement
            // keeps the first maximizer, which realizes the tie-break rule.
            for (size_t k = 0; k < cands[i - 1].size(); ++k) {
                if (score[i - 1][k] == kNegInf) continue;
                double route = route_m(g, cache, cands[i - 1][k], cands[i][j]);
                double trans_lp = std::isinf(route) ? kNegInf : -std::fabs(route - gc_m) / params.beta_m;
                double s = score[i - 1][k] + trans_lp;
                if (s > best) {
                    best = s;
                    best_prev = k;
                }
            }
            if (best != kNegInf) {
                score[i][j] = best + cands[i][j].emission_lp;
                from[i][j] = best_prev;
                any = true;
            }
        }
        if (!any)
            throw std::runtime_error("map_match: broken chain between points " + std::to_string(i - 1) +
                                     " and " + std::to_string(i) + " (no connected route)");
    }

    size_t best_last = 0;
    double best_score = kNegInf;
    for (size_t j = 0; j < cands[n - 1].size(); ++j) {
        if (score[n - 1][j] > best_score) {
            best_score = score[n - 1][j];
            best_last = j;
        }
    }

    std::vector<size_t> choice(n);
    choice[n - 1] = best_last;
    for (size_t i = n - 1; i > 0; --i) choice[i - 1] = from[i][choice[i]];

    MatchResult result;
    result.matched.id = traj.id;
    result.matched.points.reserve(n);
    result.edges.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const Candidate& c = cands[i][choice[i]];
        result.matched.points.push_back({c.proj.point, traj.points[i].t});
        result.edges.push_back({c.proj.u, c.proj.v});
    }
    return result;
}

Trajectory map_match(const roadnet::RoadGraph& g, const Trajectory& traj, const HmmParams& params) {
    return map_match_detailed(g, traj, params).matched;
}

}  // namespace trajsr::mapmatch
