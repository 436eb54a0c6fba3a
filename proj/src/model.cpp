#include "trajsr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "trajsr/parallel.hpp"
#include "trajsr/rng.hpp"

namespace trajsr::model {

using tensor::Tensor;

void ModelConfig::validate() const {
    if (d_model < 1) throw std::invalid_argument("ModelConfig: d_model must be >= 1");
    if (n_heads < 1) throw std::invalid_argument("ModelConfig: n_heads must be >= 1");
    if (d_model % n_heads != 0) throw std::invalid_argument("ModelConfig: d_model must be divisible by n_heads");
    if (n_enc_layers < 1 || n_dec_layers < 1) throw std::invalid_argument("ModelConfig: layer counts must be >= 1");
    if (ff_mult < 1) throw std::invalid_argument("ModelConfig: ff_mult must be >= 1");
    if (gcn_layers < 1) throw std::invalid_argument("ModelConfig: gcn_layers must be >= 1");
    if (gcn_hidden < 1) throw std::invalid_argument("ModelConfig: gcn_hidden must be >= 1");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw std::invalid_argument("ModelConfig: dropout_p must be in [0, 1)");
    if (!(softdtw_gamma > 0.0) || !std::isfinite(softdtw_gamma))
        throw std::invalid_argument("ModelConfig: softdtw_gamma must be positive");
    if (max_len < 2) throw std::invalid_argument("ModelConfig: max_len must be >= 2");
    if (!(subgraph_radius_km > 0.0)) throw std::invalid_argument("ModelConfig: subgraph_radius_km must be positive");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("ModelConfig: lr must be positive");
    if (batch_size < 1) throw std::invalid_argument("ModelConfig: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("ModelConfig: epochs must be >= 1");
}

namespace {

void push_attn(std::vector<std::pair<std::string, tensor::Shape>>& m, const std::string& prefix, int64_t d) {
    m.emplace_back(prefix + ".Wq", tensor::Shape{d, d});
    m.emplace_back(prefix + ".bq", tensor::Shape{d});
    m.emplace_back(prefix + ".Wk", tensor::Shape{d, d});
    m.emplace_back(prefix + ".bk", tensor::Shape{d});
    m.emplace_back(prefix + ".Wv", tensor::Shape{d, d});
    m.emplace_back(prefix + ".bv", tensor::Shape{d});
    m.emplace_back(prefix + ".Wo", tensor::Shape{d, d});
    m.emplace_back(prefix + ".bo", tensor::Shape{d});
}

void push_ln(std::vector<std::pair<std::string, tensor::Shape>>& m, const std::string& prefix, int64_t d) {
    m.emplace_back(prefix + ".g", tensor::Shape{d});
    m.emplace_back(prefix + ".b", tensor::Shape{d});
}

void push_ff(std::vector<std::pair<std::string, tensor::Shape>>& m, const std::string& prefix, int64_t d,
             int64_t ff) {
    m.emplace_back(prefix + ".W1", tensor::Shape{d, ff});
    m.emplace_back(prefix + ".b1", tensor::Shape{ff});
    m.emplace_back(prefix + ".W2", tensor::Shape{ff, d});
    m.emplace_back(prefix + ".b2", tensor::Shape{d});
}

const Tensor& P(const Params& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("model: missing weight " + name);
    return it->second;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    return tensor::add(tensor::matmul(x, w), b);
}

Tensor maybe_dropout(const Tensor& x, const ModelConfig& cfg, const RunMode& mode) {
    if (!mode.training || cfg.dropout_p == 0.0) return x;
    return tensor::dropout(x, cfg.dropout_p, rng::derive_seed(mode.dropout_seed, mode.drop_calls++));
}

// Additive attention mask: 0 on visible keys, -1e30 on padded ones. Finite
// so a fully masked row degrades to a uniform distribution instead of NaN;
// exp(-1e30 - max) underflows to exactly 0 whenever any real key exists.
Tensor key_mask(int64_t rows, const std::vector<uint8_t>& visible) {
    int64_t cols = static_cast<int64_t>(visible.size());
    std::vector<double> m(static_cast<size_t>(rows * cols), 0.0);
    for (int64_t j = 0; j < cols; ++j) {
        if (visible[static_cast<size_t>(j)]) continue;
        for (int64_t i = 0; i < rows; ++i) m[static_cast<size_t>(i * cols + j)] = -1e30;
    }
    return Tensor::from_data({rows, cols}, std::move(m));
}

Tensor row_mask(const std::vector<uint8_t>& keep, int64_t cols) {
    int64_t rows = static_cast<int64_t>(keep.size());
    std::vector<double> m(static_cast<size_t>(rows * cols), 0.0);
    for (int64_t i = 0; i < rows; ++i) {
        if (!keep[static_cast<size_t>(i)]) continue;
        for (int64_t j = 0; j < cols; ++j) m[static_cast<size_t>(i * cols + j)] = 1.0;
    }
    return Tensor::from_data({rows, cols}, std::move(m));
}

Tensor sinusoidal_pe(int64_t len, int64_t d) {
    std::vector<double> pe(static_cast<size_t>(len * d), 0.0);
    for (int64_t pos = 0; pos < len; ++pos) {
        for (int64_t i = 0; i + 1 < d; i += 2) {
            double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
            pe[static_cast<size_t>(pos * d + i)] = std::sin(static_cast<double>(pos) * freq);
            pe[static_cast<size_t>(pos * d + i + 1)] = std::cos(static_cast<double>(pos) * freq);
        }
        if (d % 2 == 1) {
            double freq = std::pow(10000.0, -static_cast<double>(d - 1) / static_cast<double>(d));
            pe[static_cast<size_t>(pos * d + d - 1)] = std::sin(static_cast<double>(pos) * freq);
        }
    }
    return Tensor::from_data({len, d}, std::move(pe));
}

// Multi-head scaled dot-product attention. Heads are column slices of the
// shared Q/K/V projections; `mask` is added to the logits.
Tensor attention(const Tensor& q_in, const Tensor& kv_in, const Tensor& mask, const Params& params,
                 const std::string& prefix, const ModelConfig& cfg, const RunMode& mode) {
    Tensor q = linear(q_in, P(params, prefix + ".Wq"), P(params, prefix + ".bq"));
    Tensor k = linear(kv_in, P(params, prefix + ".Wk"), P(params, prefix + ".bk"));
    Tensor v = linear(kv_in, P(params, prefix + ".Wv"), P(params, prefix + ".bv"));

    int64_t d = cfg.d_model;
    int64_t dh = d / cfg.n_heads;
    double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    std::vector<Tensor> heads;
    heads.reserve(static_cast<size_t>(cfg.n_heads));
    for (int h = 0; h < cfg.n_heads; ++h) {
        int64_t lo = h * dh;
        int64_t hi = lo + dh;
        Tensor qh = tensor::slice(q, 1, lo, hi);
        Tensor kh = tensor::slice(k, 1, lo, hi);
        Tensor vh = tensor::slice(v, 1, lo, hi);
        Tensor logits = tensor::mul_scalar(tensor::matmul(qh, tensor::transpose(kh)), scale);
        logits = tensor::add(logits, mask);
        Tensor attn = tensor::softmax(logits);
        attn = maybe_dropout(attn, cfg, mode);
        heads.push_back(tensor::matmul(attn, vh));
    }
    Tensor merged = cfg.n_heads == 1 ? heads[0] : tensor::concat(heads, 1);
    return linear(merged, P(params, prefix + ".Wo"), P(params, prefix + ".bo"));
}

Tensor feed_forward(const Tensor& x, const Params& params, const std::string& prefix) {
    Tensor h = linear(x, P(params, prefix + ".W1"), P(params, prefix + ".b1"));
    h = tensor::gelu(h);
    return linear(h, P(params, prefix + ".W2"), P(params, prefix + ".b2"));
}

Tensor ln(const Tensor& x, const Params& params, const std::string& prefix) {
    return tensor::layer_norm(x, P(params, prefix + ".g"), P(params, prefix + ".b"));
}

// Dense symmetric normalization A_hat = D^(-1/2) (A + I) D^(-1/2); also
// validates the SymMatrix contract.
std::vector<double> normalized_adjacency(const roadnet::SymMatrix& adj) {
    size_t n = adj.n;
    if (adj.a.size() != n * n) throw std::invalid_argument("gcn_embed: adjacency storage size mismatch");
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (adj.at(i, j) != adj.at(j, i)) throw std::invalid_argument("gcn_embed: adjacency not symmetric");
        }
    }
    for (double w : adj.a) {
        if (!(w >= 0.0)) throw std::invalid_argument("gcn_embed: adjacency has negative or NaN weight");
    }
    std::vector<double> b(adj.a);
    for (size_t i = 0; i < n; ++i) b[i * n + i] += 1.0;  // self-loops
    std::vector<double> dinv(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (size_t j = 0; j < n; ++j) deg += b[i * n + j];
        dinv[i] = 1.0 / std::sqrt(deg);
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) b[i * n + j] *= dinv[i] * dinv[j];
    return b;
}

Tensor gcn_core(const Tensor& ahat, const Tensor& feats, const Params& params, const ModelConfig& cfg) {
    Tensor h = feats;
    for (int layer = 0; layer < cfg.gcn_layers; ++layer) {
        std::string prefix = "gcn." + std::to_string(layer);
        Tensor z = tensor::matmul(ahat, tensor::matmul(h, P(params, prefix + ".W")));
        z = tensor::add(z, P(params, prefix + ".b"));
        h = layer + 1 < cfg.gcn_layers ? tensor::relu(z) : z;
    }
    return h;
}

Tensor encode_core(const Tensor& x, const std::vector<uint8_t>& pad_mask, const Params& params,
                   const ModelConfig& cfg, const RunMode& mode) {
    int64_t len = x.dim(0);
    Tensor h = linear(x, P(params, "enc.in.W"), P(params, "enc.in.b"));
    h = tensor::add(h, sinusoidal_pe(len, cfg.d_model));

    Tensor self_mask = key_mask(len, pad_mask);
    for (int i = 0; i < cfg.n_enc_layers; ++i) {
        std::string base = "enc." + std::to_string(i);
        Tensor normed = ln(h, params, base + ".ln1");
        Tensor a = attention(normed, normed, self_mask, params, base + ".attn", cfg, mode);
        h = tensor::add(h, maybe_dropout(a, cfg, mode));
        Tensor f = feed_forward(ln(h, params, base + ".ln2"), params, base + ".ff");
        h = tensor::add(h, maybe_dropout(f, cfg, mode));
    }
    h = ln(h, params, "enc.out");
    return tensor::mul(h, row_mask(pad_mask, cfg.d_model));
}

Tensor decode_core(const Tensor& memory, const Tensor& gcn_embeds, const std::vector<uint8_t>& pad_mask,
                   const Params& params, const ModelConfig& cfg, const RunMode& mode) {
    int64_t len = memory.dim(0);
    int64_t n_nodes = gcn_embeds.dim(0);

    Tensor self_mask = key_mask(len, pad_mask);
    std::vector<uint8_t> cross_visible(pad_mask);
    cross_visible.insert(cross_visible.end(), static_cast<size_t>(n_nodes), uint8_t{1});
    Tensor cross_mask = key_mask(len, cross_visible);
    Tensor kv = tensor::concat({memory, gcn_embeds}, 0);

    Tensor h = memory;
    for (int i = 0; i < cfg.n_dec_layers; ++i) {
        std::string base = "dec." + std::to_string(i);
        Tensor normed = ln(h, params, base + ".ln1");
        Tensor a = attention(normed, normed, self_mask, params, base + ".self", cfg, mode);
        h = tensor::add(h, maybe_dropout(a, cfg, mode));
        Tensor c = attention(ln(h, params, base + ".ln2"), kv, cross_mask, params, base + ".cross", cfg, mode);
        h = tensor::add(h, maybe_dropout(c, cfg, mode));
        Tensor f = feed_forward(ln(h, params, base + ".ln3"), params, base + ".ff");
        h = tensor::add(h, maybe_dropout(f, cfg, mode));
    }
    h = ln(h, params, "dec.out");
    Tensor y = linear(h, P(params, "head.W"), P(params, "head.b"));
    return tensor::mul(y, row_mask(pad_mask, 2));
}

}  // namespace

std::vector<std::pair<std::string, tensor::Shape>> weight_manifest(const ModelConfig& cfg) {
    cfg.validate();
    int64_t d = cfg.d_model;
    int64_t ff = d * cfg.ff_mult;
    std::vector<std::pair<std::string, tensor::Shape>> m;

    int64_t in_dim = 2;
    for (int i = 0; i < cfg.gcn_layers; ++i) {
        int64_t out_dim = i + 1 < cfg.gcn_layers ? cfg.gcn_hidden : d;
        std::string prefix = "gcn." + std::to_string(i);
        m.emplace_back(prefix + ".W", tensor::Shape{in_dim, out_dim});
        m.emplace_back(prefix + ".b", tensor::Shape{out_dim});
        in_dim = out_dim;
    }

    m.emplace_back("enc.in.W", tensor::Shape{3, d});
    m.emplace_back("enc.in.b", tensor::Shape{d});
    for (int i = 0; i < cfg.n_enc_layers; ++i) {
        std::string base = "enc." + std::to_string(i);
        push_ln(m, base + ".ln1", d);
        push_attn(m, base + ".attn", d);
        push_ln(m, base + ".ln2", d);
        push_ff(m, base + ".ff", d, ff);
    }
    push_ln(m, "enc.out", d);

    for (int i = 0; i < cfg.n_dec_layers; ++i) {
        std::string base = "dec." + std::to_string(i);
        push_ln(m, base + ".ln1", d);
        push_attn(m, base + ".self", d);
        push_ln(m, base + ".ln2", d);
        push_attn(m, base + ".cross", d);
        push_ln(m, base + ".ln3", d);
        push_ff(m, base + ".ff", d, ff);
    }
    push_ln(m, "dec.out", d);

    m.emplace_back("head.W", tensor::Shape{d, 2});
    m.emplace_back("head.b", tensor::Shape{2});
    return m;
}

Params init_params(const ModelConfig& cfg) {
    auto manifest = weight_manifest(cfg);
    rng::Rng r(rng::derive_seed(cfg.seed, "init"));
    Params params;
    for (const auto& [name, shape] : manifest) {
        int64_t numel = tensor::shape_numel(shape);
        std::vector<double> data(static_cast<size_t>(numel), 0.0);
        bool is_matrix = shape.size() == 2;
        bool is_gain = name.size() >= 2 && name.compare(name.size() - 2, 2, ".g") == 0;
        if (is_matrix) {
            double bound = 1.0 / std::sqrt(static_cast<double>(shape[0]));
            for (double& x : data) x = r.uniform(-bound, bound);
        } else if (is_gain) {
            std::fill(data.begin(), data.end(), 1.0);
        }
        params.emplace(name, Tensor::from_data(shape, std::move(data), true));
    }
    return params;
}

Tensor gcn_embed(const roadnet::SymMatrix& adj_inv, const std::vector<std::array<double, 2>>& node_feats,
                 const Params& params, const ModelConfig& cfg) {
    cfg.validate();
    if (adj_inv.n == 0) throw std::invalid_argument("gcn_embed: empty adjacency");
    if (adj_inv.n != node_feats.size())
        throw std::invalid_argument("gcn_embed: adjacency/features size mismatch");
    int64_t n = static_cast<int64_t>(adj_inv.n);
    Tensor ahat = Tensor::from_data({n, n}, normalized_adjacency(adj_inv));
    std::vector<double> f;
    f.reserve(node_feats.size() * 2);
    for (const auto& row : node_feats) {
        f.push_back(row[0]);
        f.push_back(row[1]);
    }
    Tensor feats = Tensor::from_data({n, 2}, std::move(f));
    return gcn_core(ahat, feats, params, cfg);
}

Tensor encode(const std::vector<std::array<double, 3>>& traj_norm, const std::vector<uint8_t>& pad_mask,
              const Params& params, const ModelConfig& cfg, const RunMode& mode) {
    cfg.validate();
    int64_t len = static_cast<int64_t>(traj_norm.size());
    if (len < 1) throw std::invalid_argument("encode: empty input");
    if (len > cfg.max_len)
        throw std::invalid_argument("encode: sequence too long (" + std::to_string(len) + " > max_len " +
                                    std::to_string(cfg.max_len) + ")");
    if (pad_mask.size() != traj_norm.size())
        throw std::invalid_argument("encode: pad_mask length mismatch");
    std::vector<double> x;
    x.reserve(traj_norm.size() * 3);
    for (const auto& row : traj_norm) {
        x.push_back(row[0]);
        x.push_back(row[1]);
        x.push_back(row[2]);
    }
    return encode_core(Tensor::from_data({len, 3}, std::move(x)), pad_mask, params, cfg, mode);
}

Tensor decode(const Tensor& memory, const Tensor& gcn_embeds, const std::vector<uint8_t>& pad_mask,
              const Params& params, const ModelConfig& cfg, const RunMode& mode) {
    cfg.validate();
    if (memory.rank() != 2 || gcn_embeds.rank() != 2) throw std::invalid_argument("decode: inputs must be 2-D");
    if (memory.dim(1) != gcn_embeds.dim(1) || memory.dim(1) != cfg.d_model)
        throw std::invalid_argument("decode: d_model mismatch between memory and gcn_embeds");
    if (gcn_embeds.dim(0) < 1) throw std::invalid_argument("decode: empty gcn_embeds");
    if (static_cast<int64_t>(pad_mask.size()) != memory.dim(0))
        throw std::invalid_argument("decode: pad_mask length mismatch");
    return decode_core(memory, gcn_embeds, pad_mask, params, cfg, mode);
}

namespace {

// Everything constant about one training sample, cached across epochs.
// Constant tensors carry no gradient state, so sharing them between the
// per-sample graphs (and worker threads) is safe.
struct SampleCtx {
    Tensor ahat;
    Tensor feats;
    Tensor x;
    std::vector<uint8_t> mask;
    std::vector<Point2> y_norm;
};

SampleCtx build_sample(const roadnet::RoadGraph& g, const Trajectory& degraded, const Trajectory& original,
                       const degrade::NormStats& stats, const ModelConfig& cfg) {
    roadnet::Subgraph sub = roadnet::local_subgraph(g, degraded, cfg.subgraph_radius_km);
    roadnet::SymMatrix adj = roadnet::inverse_distance_weights(sub);
    int64_t n = static_cast<int64_t>(adj.n);

    SampleCtx ctx;
    ctx.ahat = Tensor::from_data({n, n}, normalized_adjacency(adj));
    std::vector<double> f;
    f.reserve(static_cast<size_t>(n) * 2);
    for (size_t row = 0; row < sub.row_to_id.size(); ++row) {
        const geo::GeoPoint& p = sub.graph.coord_at(row);
        f.push_back((p.lat - stats.mean_lat) / stats.std_lat);
        f.push_back((p.lon - stats.mean_lon) / stats.std_lon);
    }
    ctx.feats = Tensor::from_data({n, 2}, std::move(f));

    auto x_norm = degrade::normalize(degraded, stats);
    std::vector<double> x;
    x.reserve(x_norm.size() * 3);
    for (const auto& row : x_norm) {
        x.push_back(row[0]);
        x.push_back(row[1]);
        x.push_back(row[2]);
    }
    ctx.x = Tensor::from_data({static_cast<int64_t>(x_norm.size()), 3}, std::move(x));
    ctx.mask.assign(x_norm.size(), 1);

    auto y_norm = degrade::normalize(original, stats);
    ctx.y_norm.reserve(y_norm.size());
    for (const auto& row : y_norm) ctx.y_norm.push_back({row[0], row[1]});
    return ctx;
}

Tensor forward_sample(const SampleCtx& ctx, const Params& params, const ModelConfig& cfg, const RunMode& mode) {
    Tensor gcn = gcn_core(ctx.ahat, ctx.feats, params, cfg);
    Tensor memory = encode_core(ctx.x, ctx.mask, params, cfg, mode);
    Tensor pred = decode_core(memory, gcn, ctx.mask, params, cfg, mode);
    return softdtw_loss(pred, ctx.y_norm, cfg.softdtw_gamma);
}

Params clone_params(const Params& params) {
    Params out;
    for (const auto& [name, t] : params) out.emplace(name, Tensor::from_data(t.shape(), t.data(), true));
    return out;
}

}  // namespace

Checkpoint train(const roadnet::RoadGraph& g, const std::vector<std::pair<Trajectory, Trajectory>>& pairs,
                 const ModelConfig& cfg) {
    cfg.validate();
    if (pairs.empty()) throw std::invalid_argument("train: empty dataset");
    std::vector<Trajectory> originals;
    originals.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        const auto& [deg, orig] = pairs[i];
        if (deg.size() != orig.size())
            throw std::invalid_argument("train: pair " + std::to_string(i) + " (" + deg.id +
                                        ") has mismatched lengths");
        if (deg.size() < 2) throw std::invalid_argument("train: pair " + std::to_string(i) + " is shorter than 2 points");
        if (static_cast<int>(deg.size()) > cfg.max_len)
            throw std::invalid_argument("train: pair " + std::to_string(i) + " exceeds max_len");
        originals.push_back(orig);
    }

    degrade::NormStats stats = degrade::fit_norm_stats(originals);
    geo::BBox train_bbox = bbox_of(originals);

    std::vector<SampleCtx> samples;
    samples.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        try {
            samples.push_back(build_sample(g, pairs[i].first, pairs[i].second, stats, cfg));
        } catch (const std::exception& e) {
            throw std::runtime_error("train: sample " + std::to_string(i) + " (" + pairs[i].first.id +
                                     "): " + e.what());
        }
    }

    Params params = init_params(cfg);
    auto manifest = weight_manifest(cfg);
    std::vector<Tensor> param_vec;
    param_vec.reserve(manifest.size());
    for (const auto& [name, shape] : manifest) param_vec.push_back(P(params, name));
    tensor::AdamState adam = tensor::AdamState::for_params(param_vec, cfg.lr);

    rng::Rng shuffle_rng(rng::derive_seed(cfg.seed, "shuffle"));
    uint64_t dropout_base = rng::derive_seed(cfg.seed, "dropout");

    size_t n = samples.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    struct SampleOut {
        double loss = 0.0;
        std::vector<std::vector<double>> grads;  // aligned with manifest
        std::string error;
    };

    std::vector<double> log;
    log.reserve(static_cast<size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_sum = 0.0;
        size_t batch_index = 0;
        for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size), ++batch_index) {
            size_t stop = std::min(n, start + static_cast<size_t>(cfg.batch_size));
            size_t bsz = stop - start;
            std::vector<SampleOut> outs(bsz);

            // Per-sample graphs run on cloned parameters; gradients are
            // reduced below in batch order, so threaded and serial runs
            // produce bit-identical results.
            par::parallel_for(bsz, [&](size_t k) {
                size_t idx = order[start + k];
                SampleOut& out = outs[k];
                try {
                    Params local = clone_params(params);
                    RunMode mode;
                    mode.training = true;
                    mode.dropout_seed = rng::derive_seed(
                        dropout_base, static_cast<uint64_t>(epoch) * static_cast<uint64_t>(n) + (start + k));
                    Tensor loss = forward_sample(samples[idx], local, cfg, mode);
                    out.loss = loss.at({0});
                    Tensor scaled = tensor::mul_scalar(loss, 1.0 / static_cast<double>(bsz));
                    tensor::backward(scaled);
                    out.grads.reserve(manifest.size());
                    for (const auto& [name, shape] : manifest) {
                        const Tensor& p = P(local, name);
                        out.grads.push_back(p.has_grad() ? p.grad() : std::vector<double>(p.data().size(), 0.0));
                    }
                } catch (const std::exception& e) {
                    out.error = e.what();
                }
            });

            for (size_t k = 0; k < bsz; ++k) {
                if (!outs[k].error.empty())
                    throw std::runtime_error("train: aborted at epoch " + std::to_string(epoch + 1) + ", batch " +
                                             std::to_string(batch_index + 1) + ": " + outs[k].error);
                if (!std::isfinite(outs[k].loss))
                    throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch + 1) +
                                             ", batch " + std::to_string(batch_index + 1));
            }

            for (size_t j = 0; j < param_vec.size(); ++j) {
                std::vector<double>& grad = param_vec[j].grad();
                std::fill(grad.begin(), grad.end(), 0.0);
                for (size_t k = 0; k < bsz; ++k) {
                    const std::vector<double>& gk = outs[k].grads[j];
                    for (size_t t = 0; t < grad.size(); ++t) grad[t] += gk[t];
                }
            }
            tensor::adam_step(param_vec, adam);
            for (size_t k = 0; k < bsz; ++k) epoch_sum += outs[k].loss;
        }
        log.push_back(epoch_sum / static_cast<double>(n));
    }

    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.weights = std::move(params);
    ckpt.norm_stats = stats;
    ckpt.train_bbox = train_bbox;
    ckpt.training_log = std::move(log);
    return ckpt;
}

Trajectory reconstruct(const Checkpoint& ckpt, const roadnet::RoadGraph& g, const Trajectory& degraded) {
    const ModelConfig& cfg = ckpt.config;
    cfg.validate();
    if (degraded.size() < 2) throw std::invalid_argument("reconstruct: trajectory needs at least 2 points");
    if (static_cast<int>(degraded.size()) > cfg.max_len)
        throw std::invalid_argument("reconstruct: trajectory exceeds max_len");

    roadnet::Subgraph sub;
    try {
        sub = roadnet::local_subgraph(g, degraded, cfg.subgraph_radius_km);
    } catch (const std::exception& e) {
        throw std::runtime_error("reconstruct: " + std::string(e.what()) +
                                 " (increase subgraph_radius_km)");
    }
    roadnet::SymMatrix adj = roadnet::inverse_distance_weights(sub);

    std::vector<std::array<double, 2>> feats;
    feats.reserve(sub.row_to_id.size());
    for (size_t row = 0; row < sub.row_to_id.size(); ++row) {
        const geo::GeoPoint& p = sub.graph.coord_at(row);
        feats.push_back({(p.lat - ckpt.norm_stats.mean_lat) / ckpt.norm_stats.std_lat,
                         (p.lon - ckpt.norm_stats.mean_lon) / ckpt.norm_stats.std_lon});
    }

    auto x_norm = degrade::normalize(degraded, ckpt.norm_stats);
    std::vector<uint8_t> mask(x_norm.size(), 1);

    Tensor gcn = gcn_embed(adj, feats, ckpt.weights, cfg);
    Tensor memory = encode(x_norm, mask, ckpt.weights, cfg);
    Tensor pred = decode(memory, gcn, mask, ckpt.weights, cfg);

    std::vector<std::array<double, 2>> vals(degraded.size());
    for (size_t i = 0; i < degraded.size(); ++i) {
        vals[i] = {pred.at({static_cast<int64_t>(i), 0}), pred.at({static_cast<int64_t>(i), 1})};
    }
    std::vector<geo::GeoPoint> coords = degrade::denormalize(vals, ckpt.norm_stats);

    geo::BBox clip = ckpt.train_bbox.expanded(0.10);
    Trajectory out;
    out.id = degraded.id;
    out.points.reserve(degraded.size());
    for (size_t i = 0; i < degraded.size(); ++i) {
        geo::GeoPoint p = coords[i];
        p.lat = std::clamp(p.lat, clip.lo.lat, clip.hi.lat);
        p.lon = std::clamp(p.lon, clip.lo.lon, clip.hi.lon);
        out.points.push_back({p, degraded.points[i].t});
    }
    return out;
}

}  // namespace trajsr::model
