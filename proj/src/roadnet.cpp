#include "trajsr/roadnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace trajsr::roadnet {

using nlohmann::json;

RoadGraph::RoadGraph(std::vector<std::pair<NodeId, geo::GeoPoint>> nodes,
                     std::vector<std::pair<NodeId, NodeId>> edges) {
    std::sort(nodes.begin(), nodes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    ids_.reserve(nodes.size());
    coords_.reserve(nodes.size());
    for (const auto& [id, pt] : nodes) {
        if (id < 0) throw std::runtime_error("node id must be non-negative: " + std::to_string(id));
        geo::require_valid(pt, "load_graph node");
        if (!index_.try_emplace(id, ids_.size()).second) {
            throw std::runtime_error("duplicate node id " + std::to_string(id));
        }
        ids_.push_back(id);
        coords_.push_back(pt);
    }
    adj_.resize(ids_.size());

    std::set<std::pair<NodeId, NodeId>> seen;
    for (auto [u, v] : edges) {
        if (u == v) throw std::runtime_error("self-loop at node " + std::to_string(u));
        if (!index_.count(u)) throw std::runtime_error("dangling endpoint " + std::to_string(u));
        if (!index_.count(v)) throw std::runtime_error("dangling endpoint " + std::to_string(v));
        if (u > v) std::swap(u, v);
        if (!seen.insert({u, v}).second) {
            throw std::runtime_error("duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
        }
        size_t iu = index_[u], iv = index_[v];
        double w = geo::haversine_km(coords_[iu], coords_[iv]);
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw std::runtime_error("degenerate edge " + std::to_string(u) + "-" +
                                     std::to_string(v) + ": endpoints coincide");
        }
        adj_[iu].push_back({iv, w});
        adj_[iv].push_back({iu, w});
        edges_.push_back(Edge{u, v, w});
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (auto& nb : adj_) {
        std::sort(nb.begin(), nb.end());
    }
}

size_t RoadGraph::index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw std::runtime_error("node not found: " + std::to_string(id));
    return it->second;
}

const geo::BBox& RoadGraph::bbox() const {
    if (!bbox_) {
        if (empty()) throw std::runtime_error("bbox of empty graph");
        geo::BBox b{{90.0, 180.0}, {-90.0, -180.0}};
        for (const auto& p : coords_) {
            b.lo.lat = std::min(b.lo.lat, p.lat);
            b.lo.lon = std::min(b.lo.lon, p.lon);
            b.hi.lat = std::max(b.hi.lat, p.lat);
            b.hi.lon = std::max(b.hi.lon, p.lon);
        }
        const_cast<RoadGraph*>(this)->bbox_ = b;
    }
    return *bbox_;
}

const geo::LocalFrame& RoadGraph::frame() const {
    if (!frame_) {
        geo::BBox b = bbox();
        // Guard against degenerate (collinear) node sets; a frame needs area.
        const double min_span = 1e-6;
        if (b.hi.lat - b.lo.lat < min_span) {
            b.lo.lat -= min_span;
            b.hi.lat += min_span;
        }
        if (b.hi.lon - b.lo.lon < min_span) {
            b.lo.lon -= min_span;
            b.hi.lon += min_span;
        }
        const_cast<RoadGraph*>(this)->frame_ = geo::frame_for_region(b);
    }
    return *frame_;
}

RoadGraph load_graph(std::istream& in, const std::string& source_name) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(source_name + ": malformed JSON: " + e.what());
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges")) {
        throw std::runtime_error(source_name + ": graph document needs 'nodes' and 'edges'");
    }
    std::vector<std::pair<NodeId, geo::GeoPoint>> nodes;
    for (const auto& n : doc["nodes"]) {
        if (!n.contains("id") || !n.contains("lat") || !n.contains("lon")) {
            throw std::runtime_error(source_name + ": node record needs id/lat/lon");
        }
        nodes.push_back({n["id"].get<NodeId>(),
                         geo::GeoPoint{n["lat"].get<double>(), n["lon"].get<double>()}});
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.contains("u") || !e.contains("v")) {
            throw std::runtime_error(source_name + ": edge record needs u/v");
        }
        edges.push_back({e["u"].get<NodeId>(), e["v"].get<NodeId>()});
    }
    try {
        return RoadGraph(std::move(nodes), std::move(edges));
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(source_name + ": " + e.what());
    }
}

RoadGraph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    return load_graph(in, path);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DijkstraResult {
    std::vector<double> dist;
    std::vector<size_t> pred;  // SIZE_MAX = none
};

DijkstraResult dijkstra(const RoadGraph& g, size_t src) {
    size_t n = g.num_nodes();
    DijkstraResult r{std::vector<double>(n, kInf), std::vector<size_t>(n, SIZE_MAX)};
    r.dist[src] = 0.0;
    // (distance, node id, dense index): NodeId in the key makes pop order
    // deterministic at equal distance.
    using Item = std::tuple<double, NodeId, size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0.0, g.id_at(src), src});
    std::vector<char> done(n, 0);
    while (!pq.empty()) {
        auto [d, id, i] = pq.top();
        pq.pop();
        if (done[i]) continue;
        done[i] = 1;
        for (const auto& [j, w] : g.neighbors(i)) {
            double nd = d + w;
            if (nd < r.dist[j] ||
                (nd == r.dist[j] && r.pred[j] != SIZE_MAX && id < g.id_at(r.pred[j]))) {
                r.dist[j] = nd;
                r.pred[j] = i;
                pq.push({nd, g.id_at(j), j});
            }
        }
    }
    return r;
}

}  // namespace

std::vector<NodeId> shortest_path(const RoadGraph& g, NodeId u, NodeId v) {
    size_t su = g.index_of(u);
    size_t sv = g.index_of(v);
    if (su == sv) return {u};
    DijkstraResult r = dijkstra(g, su);
    if (!std::isfinite(r.dist[sv])) {
        throw std::runtime_error("no path from " + std::to_string(u) + " to " + std::to_string(v));
    }
    std::vector<NodeId> path;
    for (size_t cur = sv; cur != SIZE_MAX; cur = r.pred[cur]) {
        path.push_back(g.id_at(cur));
        if (cur == su) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<double> shortest_distances(const RoadGraph& g, NodeId src) {
    return dijkstra(g, g.index_of(src)).dist;
}

Subgraph local_subgraph(const RoadGraph& g, const Trajectory& traj, double radius_km) {
    if (!(radius_km > 0.0)) throw std::invalid_argument("local_subgraph: radius_km must be > 0");
    if (traj.empty()) throw std::invalid_argument("local_subgraph: empty trajectory");

    std::vector<std::pair<NodeId, geo::GeoPoint>> kept_nodes;
    for (size_t i = 0; i < g.num_nodes(); ++i) {  // ids ascending
        const geo::GeoPoint& c = g.coord_at(i);
        for (const auto& p : traj.points) {
            if (geo::haversine_km(c, p.pos) <= radius_km) {
                kept_nodes.push_back({g.id_at(i), c});
                break;
            }
        }
    }
    if (kept_nodes.empty()) {
        throw std::runtime_error("local_subgraph: no node within " + std::to_string(radius_km) +
                                 " km of the trajectory; widen the radius");
    }
    Subgraph sg;
    sg.row_to_id.reserve(kept_nodes.size());
    for (size_t row = 0; row < kept_nodes.size(); ++row) {
        sg.row_to_id.push_back(kept_nodes[row].first);
        sg.id_to_row[kept_nodes[row].first] = row;
    }
    std::vector<std::pair<NodeId, NodeId>> kept_edges;
    for (const Edge& e : g.edges()) {
        if (sg.id_to_row.count(e.u) && sg.id_to_row.count(e.v)) kept_edges.push_back({e.u, e.v});
    }
    sg.graph = RoadGraph(std::move(kept_nodes), std::move(kept_edges));
    return sg;
}

SymMatrix inverse_distance_weights(const Subgraph& sg) {
    size_t n = sg.row_to_id.size();
    SymMatrix m{n, std::vector<double>(n * n, 0.0)};
    for (const Edge& e : sg.graph.edges()) {
        if (e.weight_km < 1e-9) {
            throw std::runtime_error("degenerate edge " + std::to_string(e.u) + "-" +
                                     std::to_string(e.v) + ": weight below 1e-9 km");
        }
        size_t i = sg.id_to_row.at(e.u);
        size_t j = sg.id_to_row.at(e.v);
        m.at(i, j) = 1.0 / e.weight_km;
        m.at(j, i) = 1.0 / e.weight_km;
    }
    return m;
}

std::vector<EdgeProjection> project_to_edges(const RoadGraph& g, const geo::GeoPoint& p,
                                             double radius_m) {
    if (!(radius_m > 0.0)) throw std::invalid_argument("project_to_edges: radius_m must be > 0");
    geo::require_valid(p, "project_to_edges");
    std::vector<EdgeProjection> out;
    if (g.empty()) return out;
    const geo::LocalFrame& f = g.frame();
    auto [px, py] = geo::to_local(f, p);
    for (const Edge& e : g.edges()) {
        auto [ax, ay] = geo::to_local(f, g.coord(e.u));
        auto [bx, by] = geo::to_local(f, g.coord(e.v));
        double dx = bx - ax, dy = by - ay;
        double len2 = dx * dx + dy * dy;
        double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        double qx = ax + t * dx, qy = ay + t * dy;
        double d = std::hypot(px - qx, py - qy);
        if (d <= radius_m) {
            out.push_back(EdgeProjection{e.u, e.v, geo::from_local(f, qx, qy), d, t});
        }
    }
    std::sort(out.begin(), out.end(), [](const EdgeProjection& a, const EdgeProjection& b) {
        return std::tie(a.dist_m, a.u, a.v) < std::tie(b.dist_m, b.u, b.v);
    });
    return out;
}

}  // namespace trajsr::roadnet
