#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trajsr/degrade.hpp"
#include "trajsr/geo.hpp"
#include "trajsr/roadnet.hpp"
#include "trajsr/softdtw.hpp"
#include "trajsr/tensor.hpp"
#include "trajsr/trajectory.hpp"

namespace trajsr::model {

struct ModelConfig {
    int d_model = 32;
    int n_heads = 2;
    int n_enc_layers = 2;
    int n_dec_layers = 2;
    int ff_mult = 4;
    int gcn_layers = 2;
    int gcn_hidden = 32;
    double dropout_p = 0.0;
    double softdtw_gamma = 0.1;
    int max_len = 128;
    double subgraph_radius_km = 1.0;
    double lr = 1e-3;
    int batch_size = 16;
    int epochs = 30;
    uint64_t seed = 42;

    void validate() const;
};

using Params = std::map<std::string, tensor::Tensor>;

// Architecture weight manifest: (name, shape) in a fixed order shared by
// initialization and checkpoint layout.
std::vector<std::pair<std::string, tensor::Shape>> weight_manifest(const ModelConfig& cfg);

// Seeded init: matrices uniform in ±1/sqrt(fan_in), biases zero, layer-norm
// gains one. Same cfg and seed -> bitwise identical parameters.
Params init_params(const ModelConfig& cfg);

// Forward-pass mode switches. Default-constructed = inference (no dropout).
struct RunMode {
    bool training = false;
    uint64_t dropout_seed = 0;
    mutable uint64_t drop_calls = 0;  // per-forward dropout counter
};

// gcn_layers applications of H <- act(A_hat H W + b), A_hat the
// degree-normalized adjacency with unit self-loops; relu between layers,
// last layer linear into d_model.
tensor::Tensor gcn_embed(const roadnet::SymMatrix& adj_inv,
                         const std::vector<std::array<double, 2>>& node_feats,
                         const Params& params, const ModelConfig& cfg);

// Pre-norm transformer encoder over (lat, lon, t) z-scores plus sinusoidal
// positional encoding. pad_mask is 1 on real positions; padded key logits
// get -1e30 before softmax and padded output rows are zeroed.
tensor::Tensor encode(const std::vector<std::array<double, 3>>& traj_norm,
                      const std::vector<uint8_t>& pad_mask, const Params& params,
                      const ModelConfig& cfg, const RunMode& mode = {});

// Non-autoregressive decoder: queries are the encoder memory rows;
// self-attention over query positions, cross-attention over
// [memory ; gcn_embeds], linear head into normalized (lat, lon).
tensor::Tensor decode(const tensor::Tensor& memory, const tensor::Tensor& gcn_embeds,
                      const std::vector<uint8_t>& pad_mask, const Params& params,
                      const ModelConfig& cfg, const RunMode& mode = {});

struct Checkpoint {
    ModelConfig config;
    Params weights;
    degrade::NormStats norm_stats;
    std::optional<degrade::HexGrid> hexgrid;  // set when degradation used one
    geo::BBox train_bbox;                     // bbox of training originals
    std::vector<double> training_log;         // per-epoch mean loss
};

// Container: magic "TRAJSR1", u64 little-endian header length, JSON header
// (config, norm stats, hexgrid, bbox, log, weight manifest with offsets),
// little-endian f64 weight payload. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// pairs are (degraded input, original ground truth), equal-length per pair.
Checkpoint train(const roadnet::RoadGraph& g,
                 const std::vector<std::pair<Trajectory, Trajectory>>& pairs,
                 const ModelConfig& cfg);

Trajectory reconstruct(const Checkpoint& ckpt, const roadnet::RoadGraph& g,
                       const Trajectory& degraded);

}  // namespace trajsr::model
