#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "trajsr/geo.hpp"
#include "trajsr/trajectory.hpp"

namespace trajsr::roadnet {

using NodeId = int64_t;

struct Edge {
    NodeId u = 0;  // u < v
    NodeId v = 0;
    double weight_km = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected road graph, immutable after load. Edge weights are the
// haversine distance of the endpoints, recomputed at load.
class RoadGraph {
public:
    RoadGraph() = default;
    RoadGraph(std::vector<std::pair<NodeId, geo::GeoPoint>> nodes,
              std::vector<std::pair<NodeId, NodeId>> edges);

    size_t num_nodes() const { return ids_.size(); }
    size_t num_edges() const { return edges_.size(); }
    bool empty() const { return ids_.empty(); }

    bool has_node(NodeId id) const { return index_.count(id) > 0; }
    size_t index_of(NodeId id) const;
    NodeId id_at(size_t idx) const { return ids_[idx]; }
    const geo::GeoPoint& coord(NodeId id) const { return coords_[index_of(id)]; }
    const geo::GeoPoint& coord_at(size_t idx) const { return coords_[idx]; }

    const std::vector<NodeId>& node_ids() const { return ids_; }  // ascending
    const std::vector<Edge>& edges() const { return edges_; }
    // neighbors of dense index: (dense index, weight_km)
    const std::vector<std::pair<size_t, double>>& neighbors(size_t idx) const { return adj_[idx]; }

    const geo::BBox& bbox() const;
    const geo::LocalFrame& frame() const;

private:
    std::vector<NodeId> ids_;  // ascending
    std::unordered_map<NodeId, size_t> index_;
    std::vector<geo::GeoPoint> coords_;
    std::vector<std::vector<std::pair<size_t, double>>> adj_;
    std::vector<Edge> edges_;
    std::optional<geo::BBox> bbox_;
    std::optional<geo::LocalFrame> frame_;
};

// Schema: {"nodes":[{"id":..,"lat":..,"lon":..},...],"edges":[{"u":..,"v":..},...]}
RoadGraph load_graph(std::istream& in, const std::string& source_name = "<stream>");
RoadGraph load_graph_file(const std::string& path);

// Minimum-weight path from u to v (Dijkstra over km weights). Ties at equal
// tentative distance resolve toward the smaller predecessor NodeId, so the
// returned path is unique and reproducible.
std::vector<NodeId> shortest_path(const RoadGraph& g, NodeId u, NodeId v);

// All-targets distances (km) from src; unreachable entries are +inf.
std::vector<double> shortest_distances(const RoadGraph& g, NodeId src);

struct Subgraph {
    RoadGraph graph;
    std::vector<NodeId> row_to_id;             // ascending NodeId, row order
    std::unordered_map<NodeId, size_t> id_to_row;
};

Subgraph local_subgraph(const RoadGraph& g, const Trajectory& traj, double radius_km);

struct SymMatrix {
    size_t n = 0;
    std::vector<double> a;  // row-major n*n

    double& at(size_t i, size_t j) { return a[i * n + j]; }
    double at(size_t i, size_t j) const { return a[i * n + j]; }
};

// Entry (i,j) = 1 / weight_km for each subgraph edge, 0 elsewhere.
// Diagonal stays zero; GCN normalization adds the self-loops.
SymMatrix inverse_distance_weights(const Subgraph& sg);

struct EdgeProjection {
    NodeId u = 0;  // u < v
    NodeId v = 0;
    geo::GeoPoint point;
    double dist_m = 0.0;
    double frac = 0.0;  // position along u->v, [0, 1]
};

// Nearest point on each edge segment (in the graph's local frame) within
// radius_m, ascending by distance; ties by (u, v).
std::vector<EdgeProjection> project_to_edges(const RoadGraph& g, const geo::GeoPoint& p,
                                             double radius_m);

}  // namespace trajsr::roadnet
