#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trajsr/model.hpp"

#include <json.hpp>

namespace trajsr::model {

namespace {

constexpr char kMagic[] = "TRAJSR1";  // 7 bytes on disk, no terminator
constexpr size_t kMagicLen = 7;

void append_u64_le(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t read_u64_le(const std::string& buf, size_t pos) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    return v;
}

void append_f64_le(std::string& out, double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    append_u64_le(out, bits);
}

double read_f64_le(const std::string& buf, size_t pos) {
    uint64_t bits = read_u64_le(buf, pos);
    double d;
    std::memcpy(&d, &bits, sizeof d);
    return d;
}

nlohmann::ordered_json config_json(const ModelConfig& c) {
    nlohmann::ordered_json j;
    j["d_model"] = c.d_model;
    j["n_heads"] = c.n_heads;
    j["n_enc_layers"] = c.n_enc_layers;
    j["n_dec_layers"] = c.n_dec_layers;
    j["ff_mult"] = c.ff_mult;
    j["gcn_layers"] = c.gcn_layers;
    j["gcn_hidden"] = c.gcn_hidden;
    j["dropout_p"] = c.dropout_p;
    j["softdtw_gamma"] = c.softdtw_gamma;
    j["max_len"] = c.max_len;
    j["subgraph_radius_km"] = c.subgraph_radius_km;
    j["lr"] = c.lr;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.d_model = j.at("d_model").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.n_enc_layers = j.at("n_enc_layers").get<int>();
    c.n_dec_layers = j.at("n_dec_layers").get<int>();
    c.ff_mult = j.at("ff_mult").get<int>();
    c.gcn_layers = j.at("gcn_layers").get<int>();
    c.gcn_hidden = j.at("gcn_hidden").get<int>();
    c.dropout_p = j.at("dropout_p").get<double>();
    c.softdtw_gamma = j.at("softdtw_gamma").get<double>();
    c.max_len = j.at("max_len").get<int>();
    c.subgraph_radius_km = j.at("subgraph_radius_km").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.seed = j.at("seed").get<uint64_t>();
    return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    ckpt.config.validate();
    auto manifest = weight_manifest(ckpt.config);

    nlohmann::ordered_json header;
    header["config"] = config_json(ckpt.config);
    {
        nlohmann::ordered_json s;
        s["mean_lat"] = ckpt.norm_stats.mean_lat;
        s["std_lat"] = ckpt.norm_stats.std_lat;
        s["mean_lon"] = ckpt.norm_stats.mean_lon;
        s["std_lon"] = ckpt.norm_stats.std_lon;
        s["mean_t"] = ckpt.norm_stats.mean_t;
        s["std_t"] = ckpt.norm_stats.std_t;
        header["norm_stats"] = s;
    }
    if (ckpt.hexgrid.has_value()) {
        const degrade::HexGrid& g = *ckpt.hexgrid;
        nlohmann::ordered_json h;
        h["origin_lat"] = g.frame.origin.lat;
        h["origin_lon"] = g.frame.origin.lon;
        h["meters_per_deg_lat"] = g.frame.meters_per_deg_lat;
        h["meters_per_deg_lon"] = g.frame.meters_per_deg_lon;
        h["edge_len_m"] = g.edge_len_m;
        header["hexgrid"] = h;
    } else {
        header["hexgrid"] = nullptr;
    }
    {
        nlohmann::ordered_json b;
        b["lo_lat"] = ckpt.train_bbox.lo.lat;
        b["lo_lon"] = ckpt.train_bbox.lo.lon;
        b["hi_lat"] = ckpt.train_bbox.hi.lat;
        b["hi_lon"] = ckpt.train_bbox.hi.lon;
        header["train_bbox"] = b;
    }
    header["training_log"] = ckpt.training_log;

    nlohmann::ordered_json weights = nlohmann::ordered_json::array();
    uint64_t offset = 0;
    for (const auto& [name, shape] : manifest) {
        auto it = ckpt.weights.find(name);
        if (it == ckpt.weights.end()) throw std::invalid_argument("save_checkpoint: missing weight " + name);
        if (it->second.shape() != shape)
            throw std::invalid_argument("save_checkpoint: weight " + name + " has wrong shape");
        nlohmann::ordered_json w;
        w["name"] = name;
        w["shape"] = shape;
        w["offset"] = offset;
        weights.push_back(w);
        offset += static_cast<uint64_t>(it->second.data().size()) * 8;
    }
    header["weights"] = weights;
    if (ckpt.weights.size() != manifest.size())
        throw std::invalid_argument("save_checkpoint: weight map has entries outside the manifest");

    std::string blob;
    std::string header_str = header.dump();
    blob.reserve(kMagicLen + 8 + header_str.size() + offset);
    blob.append(kMagic, kMagicLen);
    append_u64_le(blob, header_str.size());
    blob += header_str;
    for (const auto& [name, shape] : manifest) {
        for (double d : ckpt.weights.at(name).data()) append_f64_le(blob, d);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    out.flush();
    if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < kMagicLen + 8 || buf.compare(0, kMagicLen, kMagic) != 0)
        throw std::runtime_error("load_checkpoint: " + path + " is not a TRAJSR1 checkpoint");
    uint64_t header_len = read_u64_le(buf, kMagicLen);
    size_t header_start = kMagicLen + 8;
    if (buf.size() < header_start + header_len)
        throw std::runtime_error("load_checkpoint: truncated header in " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(buf.substr(header_start, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_checkpoint: bad header in " + path + ": " + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.config = config_from_json(header.at("config"));
        const auto& s = header.at("norm_stats");
        ckpt.norm_stats.mean_lat = s.at("mean_lat").get<double>();
        ckpt.norm_stats.std_lat = s.at("std_lat").get<double>();
        ckpt.norm_stats.mean_lon = s.at("mean_lon").get<double>();
        ckpt.norm_stats.std_lon = s.at("std_lon").get<double>();
        ckpt.norm_stats.mean_t = s.at("mean_t").get<double>();
        ckpt.norm_stats.std_t = s.at("std_t").get<double>();
        if (!header.at("hexgrid").is_null()) {
            const auto& h = header.at("hexgrid");
            degrade::HexGrid g;
            g.frame.origin.lat = h.at("origin_lat").get<double>();
            g.frame.origin.lon = h.at("origin_lon").get<double>();
            g.frame.meters_per_deg_lat = h.at("meters_per_deg_lat").get<double>();
            g.frame.meters_per_deg_lon = h.at("meters_per_deg_lon").get<double>();
            g.edge_len_m = h.at("edge_len_m").get<double>();
            ckpt.hexgrid = g;
        }
        const auto& b = header.at("train_bbox");
        ckpt.train_bbox.lo.lat = b.at("lo_lat").get<double>();
        ckpt.train_bbox.lo.lon = b.at("lo_lon").get<double>();
        ckpt.train_bbox.hi.lat = b.at("hi_lat").get<double>();
        ckpt.train_bbox.hi.lon = b.at("hi_lon").get<double>();
        ckpt.training_log = header.at("training_log").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_checkpoint: bad header in " + path + ": " + e.what());
    }

    auto manifest = weight_manifest(ckpt.config);
    const auto& weights_json = header.at("weights");
    if (weights_json.size() != manifest.size())
        throw std::runtime_error("load_checkpoint: weight manifest size mismatch in " + path);

    size_t payload_start = header_start + header_len;
    for (size_t i = 0; i < manifest.size(); ++i) {
        const auto& [name, shape] = manifest[i];
        const auto& w = weights_json.at(i);
        if (w.at("name").get<std::string>() != name)
            throw std::runtime_error("load_checkpoint: weight " + std::to_string(i) + " is " +
                                     w.at("name").get<std::string>() + ", expected " + name);
        if (w.at("shape").get<tensor::Shape>() != shape)
            throw std::runtime_error("load_checkpoint: weight " + name + " has unexpected shape");
        uint64_t offset = w.at("offset").get<uint64_t>();
        size_t count = static_cast<size_t>(tensor::shape_numel(shape));
        size_t begin = payload_start + offset;
        if (buf.size() < begin + count * 8)
            throw std::runtime_error("load_checkpoint: truncated payload in " + path);
        std::vector<double> data(count);
        for (size_t k = 0; k < count; ++k) data[k] = read_f64_le(buf, begin + k * 8);
        ckpt.weights.emplace(name, tensor::Tensor::from_data(shape, std::move(data), true));
    }
    return ckpt;
}

}  // namespace trajsr::model
