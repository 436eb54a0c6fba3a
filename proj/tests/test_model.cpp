#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <vector>

#include "trajsr/degrade.hpp"
#include "trajsr/geo.hpp"
#include "trajsr/model.hpp"
#include "trajsr/rng.hpp"
#include "trajsr/roadnet.hpp"
#include "trajsr/tensor.hpp"
#include "trajsr/trajgen.hpp"

using namespace trajsr;
using model::ModelConfig;
using model::Params;
using roadnet::NodeId;
using roadnet::RoadGraph;
using tensor::Tensor;

namespace {

const double kDegPerKm = 180.0 / (geo::kPi * geo::kEarthRadiusKm);

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.n_enc_layers = 1;
    cfg.n_dec_layers = 1;
    cfg.ff_mult = 2;
    cfg.gcn_layers = 2;
    cfg.gcn_hidden = 8;
    cfg.max_len = 128;
    cfg.subgraph_radius_km = 1.0;
    cfg.batch_size = 16;
    cfg.seed = 42;
    return cfg;
}

RoadGraph grid_graph(int rows, int cols, double spacing_km) {
    std::vector<std::pair<NodeId, geo::GeoPoint>> nodes;
    std::vector<std::pair<NodeId, NodeId>> edges;
    double d = spacing_km * kDegPerKm;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            NodeId id = NodeId(r) * cols + c;
            nodes.push_back({id, {r * d, c * d}});
            if (c + 1 < cols) edges.push_back({id, id + 1});
            if (r + 1 < rows) edges.push_back({id, id + cols});
        }
    }
    return RoadGraph(std::move(nodes), std::move(edges));
}

// independent dense re-implementation of the GCN forward pass
std::vector<double> dense_gcn_oracle(const roadnet::SymMatrix& adj,
                                     const std::vector<std::array<double, 2>>& feats,
                                     const Params& params, const ModelConfig& cfg) {
    size_t n = adj.n;
    std::vector<double> ah(adj.a);
    for (size_t i = 0; i < n; ++i) ah[i * n + i] += 1.0;
    std::vector<double> dinv(n);
    for (size_t i = 0; i < n; ++i) {
        double deg = 0.0;
        for (size_t j = 0; j < n; ++j) deg += ah[i * n + j];
        dinv[i] = 1.0 / std::sqrt(deg);
    }
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) ah[i * n + j] *= dinv[i] * dinv[j];
    }

    std::vector<double> h;
    for (const auto& f : feats) {
        h.push_back(f[0]);
        h.push_back(f[1]);
    }
    size_t width = 2;
    for (int layer = 0; layer < cfg.gcn_layers; ++layer) {
        const Tensor& w = params.at("gcn." + std::to_string(layer) + ".W");
        const Tensor& b = params.at("gcn." + std::to_string(layer) + ".b");
        size_t in = size_t(w.shape()[0]), out = size_t(w.shape()[1]);
        REQUIRE(in == width);
        // hw = h (n x in) * W (in x out)
        std::vector<double> hw(n * out, 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t k = 0; k < in; ++k) {
                for (size_t j = 0; j < out; ++j) {
                    hw[i * out + j] += h[i * in + k] * w.data()[k * out + j];
                }
            }
        }
        // z = ah * hw + b
        std::vector<double> z(n * out, 0.0);
        for (size_t i = 0; i < n; ++i) {
            for (size_t k = 0; k < n; ++k) {
                for (size_t j = 0; j < out; ++j) z[i * out + j] += ah[i * n + k] * hw[k * out + j];
            }
        }
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < out; ++j) z[i * out + j] += b.data()[j];
        }
        if (layer + 1 < cfg.gcn_layers) {
            for (double& x : z) x = std::max(0.0, x);
        }
        h = std::move(z);
        width = out;
    }
    return h;
}

std::vector<std::array<double, 3>> random_rows(rng::Rng& r, size_t n) {
    std::vector<std::array<double, 3>> rows(n);
    for (auto& row : rows) {
        row = {r.uniform01() * 2 - 1, r.uniform01() * 2 - 1, r.uniform01() * 2 - 1};
    }
    return rows;
}

// training fixture: trajectories on a small grid, hex-degraded
struct Fixture {
    RoadGraph g;
    std::vector<std::pair<Trajectory, Trajectory>> pairs;
    degrade::HexGrid hexgrid;
};

Fixture make_fixture(int n_traj, uint64_t seed) {
    Fixture fx{grid_graph(6, 6, 0.3), {}, {}};
    fx.hexgrid = degrade::HexGrid{fx.g.frame(), 200.0};
    trajgen::GenConfig gen;
    gen.bbox = fx.g.bbox().expanded(0.05);
    gen.n_traj = n_traj;
    gen.speed_mps = 10.0;
    gen.dt_s = 15.0;
    gen.max_len = 14;
    gen.seed = seed;
    for (auto& tr : trajgen::generate_dataset(fx.g, gen)) {
        Trajectory deg = degrade::truncate_trajectory(fx.hexgrid, tr);
        fx.pairs.push_back({std::move(deg), std::move(tr)});
    }
    return fx;
}

}  // namespace

TEST_CASE("ModelConfig validation") {
    ModelConfig cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.d_model = 9;  // not divisible by n_heads = 2
    CHECK_THROWS_WITH(bad.validate(), doctest::Contains("divisible"));
    bad = cfg;
    bad.softdtw_gamma = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.dropout_p = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.max_len = 1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("init_params: manifest coverage, init rules, determinism") {
    ModelConfig cfg = tiny_config();
    auto manifest = model::weight_manifest(cfg);
    Params p1 = model::init_params(cfg);
    Params p2 = model::init_params(cfg);
    REQUIRE(p1.size() == manifest.size());
    for (const auto& [name, shape] : manifest) {
        REQUIRE(p1.count(name) == 1);
        const Tensor& t = p1.at(name);
        CHECK(t.shape() == shape);
        CHECK(t.requires_grad());
        CHECK(t.data() == p2.at(name).data());  // bitwise repeatable
        if (shape.size() == 2) {
            double bound = 1.0 / std::sqrt(double(shape[0]));
            for (double x : t.data()) CHECK(std::abs(x) <= bound);
        } else if (name.size() > 2 && name.substr(name.size() - 2) == ".g") {
            for (double x : t.data()) CHECK(x == 1.0);
        } else {
            for (double x : t.data()) CHECK(x == 0.0);
        }
    }
    ModelConfig other = cfg;
    other.seed = 43;
    Params p3 = model::init_params(other);
    CHECK(p3.at("enc.in.W").data() != p1.at("enc.in.W").data());
}

TEST_CASE("gcn_embed: single isolated node equals the dense linear stack") {
    ModelConfig cfg = tiny_config();
    Params params = model::init_params(cfg);
    roadnet::SymMatrix adj{1, {0.0}};
    std::vector<std::array<double, 2>> feats{{0.3, -1.1}};
    Tensor out = model::gcn_embed(adj, feats, params, cfg);
    REQUIRE(out.shape() == tensor::Shape{1, cfg.d_model});
    auto oracle = dense_gcn_oracle(adj, feats, params, cfg);
    for (size_t i = 0; i < oracle.size(); ++i) {
        CHECK(std::abs(out.data()[i] - oracle[i]) < 1e-12);
    }
}

TEST_CASE("gcn_embed: two symmetric nodes produce identical rows") {
    ModelConfig cfg = tiny_config();
    Params params = model::init_params(cfg);
    roadnet::SymMatrix adj{2, {0.0, 0.8, 0.8, 0.0}};
    std::vector<std::array<double, 2>> feats{{0.5, -0.25}, {0.5, -0.25}};
    Tensor out = model::gcn_embed(adj, feats, params, cfg);
    for (int j = 0; j < cfg.d_model; ++j) {
        CHECK(out.at({0, j}) == doctest::Approx(out.at({1, j})).epsilon(1e-12));
    }
}

TEST_CASE("gcn_embed: 5-node random graphs match the dense oracle") {
    ModelConfig cfg = tiny_config();
    Params params = model::init_params(cfg);
    rng::Rng r(808);
    for (int trial = 0; trial < 20; ++trial) {
        size_t n = 5;
        roadnet::SymMatrix adj{n, std::vector<double>(n * n, 0.0)};
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) {
                if (r.uniform01() < 0.5) {
                    double w = 0.2 + 2.0 * r.uniform01();
                    adj.at(i, j) = w;
                    adj.at(j, i) = w;
                }
            }
        }
        std::vector<std::array<double, 2>> feats(n);
        for (auto& f : feats) f = {r.uniform01() * 2 - 1, r.uniform01() * 2 - 1};
        Tensor out = model::gcn_embed(adj, feats, params, cfg);
        auto oracle = dense_gcn_oracle(adj, feats, params, cfg);
        double worst = 0.0;
        for (size_t i = 0; i < oracle.size(); ++i) {
            worst = std::max(worst, std::abs(out.data()[i] - oracle[i]));
        }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("gcn_embed: invalid adjacency") {
    ModelConfig cfg = tiny_config();
    Params params = model::init_params(cfg);
    roadnet::SymMatrix asym{2, {0.0, 0.5, 0.7, 0.0}};
    std::vector<std::array<double, 2>> feats{{0.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_WITH(model::gcn_embed(asym, feats, params, cfg),
                      doctest::Contains("not symmetric"));
    roadnet::SymMatrix neg{1, {-0.1}};
    CHECK_THROWS_WITH(model::gcn_embed(neg, {{0.0, 0.0}}, params, cfg),
                      doctest::Contains("negative"));
    CHECK_THROWS_WITH(model::gcn_embed(roadnet::SymMatrix{}, {}, params, cfg),
                      doctest::Contains("empty adjacency"));
}

TEST_CASE("encode: shape contract and determinism") {
    ModelConfig cfg = tiny_config();
    Params params = model::init_params(cfg);
    rng::Rng r(21);
    for (size_t len : {size_t(2), size_t(17), size_t(128)}) {
        auto rows = random_rows(r, len);
        std::vector<uint8_t> mask(len, 1);
        Tensor out = model::encode(rows, mask, params, cfg);
        CHECK(out.shape() == tensor::Shape{int64_t(len), cfg.d_model});
        Tensor again = model::encode(rows, mask, params, cfg);
        CHECK(out.data() == again.data());  // bitwise deterministic
    }
    auto rows = random_rows(r, 129);
    std::vector<uint8_t> mask(129, 1);
    CHECK_THROWS_WITH(model::encode(rows, mask, params, cfg),
                      doctest::Contains("sequence too long"));
}

TEST_CASE("encode: mask invariance and padded-row zeroing") {
    ModelConfig cfg = tiny_config();
    Params params = model::init_params(cfg);
    rng::Rng r(33);
    auto rows = random_rows(r, 10);

    std::vector<uint8_t> mask_alone(10, 1);
    Tensor alone = model::encode(rows, mask_alone, params, cfg);

    for (size_t padded_len : {size_t(32), size_t(128)}) {
        auto padded = rows;
        std::vector<uint8_t> mask(padded_len, 0);
        for (size_t i = 0; i < 10; ++i) mask[i] = 1;
        while (padded.size() < padded_len) padded.push_back({7.7, -9.9, 3.3});  // junk rows
        Tensor wide = model::encode(padded, mask, params, cfg);
        REQUIRE(wide.shape() == tensor::Shape{int64_t(padded_len), cfg.d_model});
        for (size_t i = 0; i < 10; ++i) {
            for (int j = 0; j < cfg.d_model; ++j) {
                CHECK(std::abs(wide.at({int64_t(i), j}) - alone.at({int64_t(i), j})) < 1e-9);
            }
        }
        for (size_t i = 10; i < padded_len; ++i) {
            for (int j = 0; j < cfg.d_model; ++j) CHECK(wide.at({int64_t(i), j}) == 0.0);
        }
    }
}

TEST_CASE("encode: dropout is seeded and only active in training mode") {
    ModelConfig cfg = tiny_config();
    cfg.dropout_p = 0.3;
    Params params = model::init_params(cfg);
    rng::Rng r(55);
    auto rows = random_rows(r, 12);
    std::vector<uint8_t> mask(12, 1);

    Tensor infer1 = model::encode(rows, mask, params, cfg);
    Tensor infer2 = model::encode(rows, mask, params, cfg);
    CHECK(infer1.data() == infer2.data());

    model::RunMode tr1{true, 1234, 0};
    model::RunMode tr2{true, 1234, 0};
    model::RunMode tr3{true, 9999, 0};
    Tensor a = model::encode(rows, mask, params, cfg, tr1);
    Tensor b = model::encode(rows, mask, params, cfg, tr2);
    Tensor c = model::encode(rows, mask, params, cfg, tr3);
    CHECK(a.data() == b.data());       // same dropout seed
    CHECK(a.data() != c.data());       // different dropout seed
    CHECK(a.data() != infer1.data());  // training mode actually drops
}

TEST_CASE("decode: shape, gcn-key permutation invariance, pad invariance") {
    ModelConfig cfg = tiny_config();
    Params params = model::init_params(cfg);
    rng::Rng r(66);

    auto rows = random_rows(r, 10);
    std::vector<uint8_t> mask(10, 1);
    Tensor memory = model::encode(rows, mask, params, cfg);

    size_t n_nodes = 7;
    std::vector<double> gcn_data(n_nodes * size_t(cfg.d_model));
    for (auto& x : gcn_data) x = r.uniform01() * 2 - 1;
    Tensor gcn = Tensor::from_data({int64_t(n_nodes), cfg.d_model}, gcn_data);

    Tensor out = model::decode(memory, gcn, mask, params, cfg);
    REQUIRE(out.shape() == tensor::Shape{10, 2});

    // permuting the GCN rows must not change the decode output
    std::vector<size_t> perm(n_nodes);
    std::iota(perm.begin(), perm.end(), size_t(0));
    r.shuffle(perm);
    std::vector<double> permuted(gcn_data.size());
    for (size_t i = 0; i < n_nodes; ++i) {
        for (int j = 0; j < cfg.d_model; ++j) {
            permuted[i * size_t(cfg.d_model) + size_t(j)] =
                gcn_data[perm[i] * size_t(cfg.d_model) + size_t(j)];
        }
    }
    Tensor gcn_perm = Tensor::from_data({int64_t(n_nodes), cfg.d_model}, permuted);
    Tensor out_perm = model::decode(memory, gcn_perm, mask, params, cfg);
    for (int64_t i = 0; i < 10; ++i) {
        for (int64_t j = 0; j < 2; ++j) {
            CHECK(std::abs(out.at({i, j}) - out_perm.at({i, j})) < 1e-9);
        }
    }

    // pad invariance through the full encode+decode stack
    size_t padded_len = 24;
    auto padded = rows;
    std::vector<uint8_t> wide_mask(padded_len, 0);
    for (size_t i = 0; i < 10; ++i) wide_mask[i] = 1;
    while (padded.size() < padded_len) padded.push_back({5.5, 5.5, 5.5});
    Tensor wide_mem = model::encode(padded, wide_mask, params, cfg);
    Tensor wide_out = model::decode(wide_mem, gcn, wide_mask, params, cfg);
    REQUIRE(wide_out.shape() == tensor::Shape{int64_t(padded_len), 2});
    for (int64_t i = 0; i < 10; ++i) {
        for (int64_t j = 0; j < 2; ++j) {
            CHECK(std::abs(wide_out.at({i, j}) - out.at({i, j})) < 1e-9);
        }
    }
    for (size_t i = 10; i < padded_len; ++i) {
        CHECK(wide_out.at({int64_t(i), 0}) == 0.0);
        CHECK(wide_out.at({int64_t(i), 1}) == 0.0);
    }

    // d_model mismatch between memory and gcn keys
    Tensor bad_gcn = Tensor::zeros({3, cfg.d_model + 2});
    CHECK_THROWS_WITH(model::decode(memory, bad_gcn, mask, params, cfg),
                      doctest::Contains("d_model mismatch"));
}

TEST_CASE("gradient flow: one backward pass touches every parameter") {
    ModelConfig cfg = tiny_config();
    Params params = model::init_params(cfg);
    rng::Rng r(88);

    roadnet::SymMatrix adj{3, std::vector<double>(9, 0.0)};
    adj.at(0, 1) = adj.at(1, 0) = 1.3;
    adj.at(1, 2) = adj.at(2, 1) = 0.7;
    std::vector<std::array<double, 2>> feats{{0.1, -0.2}, {0.4, 0.9}, {-0.6, 0.3}};
    Tensor gcn = model::gcn_embed(adj, feats, params, cfg);

    auto rows = random_rows(r, 6);
    std::vector<uint8_t> mask(6, 1);
    Tensor memory = model::encode(rows, mask, params, cfg);
    Tensor pred = model::decode(memory, gcn, mask, params, cfg);

    std::vector<model::Point2> target(6);
    for (auto& p : target) p = {r.uniform01(), r.uniform01()};
    Tensor loss = model::softdtw_loss(pred, target, cfg.softdtw_gamma);
    tensor::backward(loss);

    for (const auto& [name, t] : params) {
        REQUIRE(t.has_grad());
        bool any = false;
        for (double gv : t.grad()) any = any || gv != 0.0;
        INFO("parameter ", name);
        CHECK(any);
    }
}

TEST_CASE("train: validation errors") {
    Fixture fx = make_fixture(2, 11);
    ModelConfig cfg = tiny_config();
    cfg.epochs = 1;

    CHECK_THROWS_WITH(model::train(fx.g, {}, cfg), doctest::Contains("train: empty dataset"));

    auto bad_pairs = fx.pairs;
    bad_pairs[0].first.points.pop_back();
    CHECK_THROWS_WITH(model::train(fx.g, bad_pairs, cfg),
                      doctest::Contains("mismatched lengths"));

    std::vector<std::pair<Trajectory, Trajectory>> shorty{
        {Trajectory{"s", {{{0.0, 0.0}, 0.0}}}, Trajectory{"s", {{{0.0, 0.0}, 0.0}}}}};
    CHECK_THROWS_WITH(model::train(fx.g, shorty, cfg), doctest::Contains("shorter than 2"));
}

TEST_CASE("train: same seed reproduces the training log bitwise") {
    Fixture fx = make_fixture(3, 7);
    ModelConfig cfg = tiny_config();
    cfg.epochs = 3;
    cfg.lr = 3e-3;

    model::Checkpoint c1 = model::train(fx.g, fx.pairs, cfg);
    model::Checkpoint c2 = model::train(fx.g, fx.pairs, cfg);
    REQUIRE(c1.training_log.size() == 3);
    CHECK(c1.training_log == c2.training_log);
    for (const auto& [name, t] : c1.weights) {
        CHECK(t.data() == c2.weights.at(name).data());
    }

    ModelConfig other = cfg;
    other.seed = 1234;
    model::Checkpoint c3 = model::train(fx.g, fx.pairs, other);
    CHECK(c3.training_log != c1.training_log);
}

TEST_CASE("train: loss trends downward over 30 epochs on 50 pairs") {
    Fixture fx = make_fixture(50, 99);
    REQUIRE(fx.pairs.size() == 50);
    ModelConfig cfg = tiny_config();
    cfg.epochs = 30;
    cfg.lr = 3e-3;
    cfg.subgraph_radius_km = 0.8;

    model::Checkpoint ckpt = model::train(fx.g, fx.pairs, cfg);
    REQUIRE(ckpt.training_log.size() == 30);
    int non_increasing = 0;
    for (size_t e = 1; e < 30; ++e) {
        if (ckpt.training_log[e] <= ckpt.training_log[e - 1] + 1e-12) ++non_increasing;
    }
    INFO("first ", ckpt.training_log.front(), " last ", ckpt.training_log.back());
    CHECK(non_increasing >= 24);  // >= 80% of the 29 consecutive pairs
    CHECK(ckpt.training_log.back() < ckpt.training_log.front());
}

TEST_CASE("checkpoint: bit-exact round trip and validation") {
    Fixture fx = make_fixture(2, 5);
    ModelConfig cfg = tiny_config();
    cfg.epochs = 2;
    model::Checkpoint ckpt = model::train(fx.g, fx.pairs, cfg);
    ckpt.hexgrid = fx.hexgrid;

    const std::string path = "model_test_roundtrip.ckpt";
    model::save_checkpoint(path, ckpt);
    model::Checkpoint back = model::load_checkpoint(path);

    CHECK(back.config.d_model == cfg.d_model);
    CHECK(back.config.n_heads == cfg.n_heads);
    CHECK(back.config.softdtw_gamma == cfg.softdtw_gamma);
    CHECK(back.config.seed == cfg.seed);
    CHECK(back.norm_stats.mean_lat == ckpt.norm_stats.mean_lat);
    CHECK(back.norm_stats.std_lon == ckpt.norm_stats.std_lon);
    CHECK(back.training_log == ckpt.training_log);
    CHECK(back.train_bbox.lo.lat == ckpt.train_bbox.lo.lat);
    CHECK(back.train_bbox.hi.lon == ckpt.train_bbox.hi.lon);
    REQUIRE(back.hexgrid.has_value());
    CHECK(back.hexgrid->edge_len_m == fx.hexgrid.edge_len_m);
    CHECK(back.hexgrid->frame.origin.lat == fx.hexgrid.frame.origin.lat);
    for (const auto& [name, t] : ckpt.weights) {
        CHECK(t.data() == back.weights.at(name).data());  // bitwise
    }

    // save(load(x)) reproduces the file byte for byte
    const std::string path2 = "model_test_roundtrip2.ckpt";
    model::save_checkpoint(path2, back);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    REQUIRE(!b1.empty());
    CHECK(b1.substr(0, 7) == "TRAJSR1");

    // a checkpoint without a hexgrid round-trips the absence
    model::Checkpoint bare = ckpt;
    bare.hexgrid.reset();
    model::save_checkpoint(path2, bare);
    CHECK(!model::load_checkpoint(path2).hexgrid.has_value());

    // validation failures
    model::Checkpoint broken = ckpt;
    broken.weights.erase("head.W");
    CHECK_THROWS_WITH(model::save_checkpoint(path2, broken),
                      doctest::Contains("missing weight head.W"));
    std::ofstream junk("model_test_junk.ckpt", std::ios::binary);
    junk << "NOTACKPT and some trailing bytes";
    junk.close();
    CHECK_THROWS_WITH(model::load_checkpoint("model_test_junk.ckpt"),
                      doctest::Contains("not a TRAJSR1 checkpoint"));
    CHECK_THROWS_WITH(model::load_checkpoint("does_not_exist.ckpt"),
                      doctest::Contains("cannot open"));
    // truncated payload
    std::ofstream trunc("model_test_trunc.ckpt", std::ios::binary);
    trunc << b1.substr(0, b1.size() - 16);
    trunc.close();
    CHECK_THROWS_WITH(model::load_checkpoint("model_test_trunc.ckpt"),
                      doctest::Contains("truncated payload"));

    std::remove(path.c_str());
    std::remove(path2.c_str());
    std::remove("model_test_junk.ckpt");
    std::remove("model_test_trunc.ckpt");
}

TEST_CASE("reconstruct: structure preserved, deterministic, in-bbox") {
    Fixture fx = make_fixture(4, 21);
    ModelConfig cfg = tiny_config();
    cfg.epochs = 2;
    model::Checkpoint ckpt = model::train(fx.g, fx.pairs, cfg);

    const Trajectory& deg = fx.pairs[0].first;
    Trajectory rec = model::reconstruct(ckpt, fx.g, deg);
    REQUIRE(rec.points.size() == deg.points.size());
    CHECK(rec.id == deg.id);
    geo::BBox clip = ckpt.train_bbox.expanded(0.10);
    for (size_t i = 0; i < rec.points.size(); ++i) {
        CHECK(rec.points[i].t == deg.points[i].t);
        CHECK(clip.contains(rec.points[i].pos));
    }

    Trajectory rec2 = model::reconstruct(ckpt, fx.g, deg);
    for (size_t i = 0; i < rec.points.size(); ++i) {
        CHECK(rec.points[i].pos.lat == rec2.points[i].pos.lat);
        CHECK(rec.points[i].pos.lon == rec2.points[i].pos.lon);
    }

    // a trajectory far away from every node: actionable subgraph error
    Trajectory far{"far", {{{45.0, 60.0}, 0.0}, {{45.0, 60.01}, 20.0}}};
    CHECK_THROWS_WITH(model::reconstruct(ckpt, fx.g, far),
                      doctest::Contains("increase subgraph_radius_km"));
}
