#include "trajsr/config.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "trajsr/degrade.hpp"
#include "trajsr/io.hpp"

namespace trajsr::cli {

namespace {

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
    throw std::invalid_argument(source + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strips a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_str = false;
            }
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    return s;
}

std::string parse_quoted(const std::string& token, const std::string& source, int line) {
    if (token.size() < 2 || token.back() != '"') fail(source, line, "unterminated string");
    std::string out;
    for (size_t i = 1; i + 1 < token.size(); ++i) {
        char c = token[i];
        if (c == '\\') {
            if (i + 2 >= token.size()) fail(source, line, "bad escape at end of string");
            char n = token[++i];
            if (n == '"' || n == '\\') {
                out.push_back(n);
            } else if (n == 'n') {
                out.push_back('\n');
            } else if (n == 't') {
                out.push_back('\t');
            } else {
                fail(source, line, std::string("unsupported escape \\") + n);
            }
        } else if (c == '"') {
            fail(source, line, "unexpected '\"' inside string");
        } else {
            out.push_back(c);
        }
    }
    return out;
}

bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i >= s.size()) return false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '+' ||
              c == '-'))
            return false;
    }
    return true;
}

double parse_number(const std::string& token, const std::string& source, int line) {
    try {
        size_t used = 0;
        double v = std::stod(token, &used);
        if (used != token.size()) fail(source, line, "bad number '" + token + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(source, line, "bad number '" + token + "'");
    } catch (const std::out_of_range&) {
        fail(source, line, "number out of range '" + token + "'");
    }
}

TomlValue parse_value(const std::string& token, const std::string& source, int line) {
    TomlValue v;
    v.line = line;
    if (token.empty()) fail(source, line, "missing value");
    if (token[0] == '"') {
        v.kind = TomlValue::Kind::kString;
        v.str = parse_quoted(token, source, line);
        return v;
    }
    if (token == "true" || token == "false") {
        v.kind = TomlValue::Kind::kBool;
        v.boolean = token == "true";
        return v;
    }
    if (token[0] == '[') {
        if (token.back() != ']') fail(source, line, "unterminated array");
        v.kind = TomlValue::Kind::kArray;
        std::string body = token.substr(1, token.size() - 2);
        size_t pos = 0;
        while (pos <= body.size()) {
            size_t comma = body.find(',', pos);
            std::string item = trim(comma == std::string::npos ? body.substr(pos) : body.substr(pos, comma - pos));
            if (!item.empty()) v.array.push_back(parse_number(item, source, line));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return v;
    }
    if (looks_numeric(token)) {
        v.kind = TomlValue::Kind::kNumber;
        v.raw = token;
        parse_number(token, source, line);  // validate eagerly
        return v;
    }
    fail(source, line, "unrecognized value '" + token + "' (strings need quotes)");
}

bool valid_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// ---- typed accessors over the parsed doc --------------------------------

class Schema {
public:
    Schema(const TomlDoc& doc, std::string source) : doc_(doc), source_(std::move(source)) {}

    bool has(const std::string& section, const std::string& key) {
        mark(section, key);
        auto s = doc_.sections.find(section);
        if (s == doc_.sections.end()) return false;
        return s->second.count(key) > 0;
    }

    const TomlValue& get(const std::string& section, const std::string& key) {
        return doc_.sections.at(section).at(key);
    }

    double number(const std::string& section, const std::string& key, double fallback) {
        if (!has(section, key)) return fallback;
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::kNumber) bad_type(section, key, "a number", v.line);
        return parse_number(v.raw, source_, v.line);
    }

    int integer(const std::string& section, const std::string& key, int fallback) {
        if (!has(section, key)) return fallback;
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::kNumber) bad_type(section, key, "an integer", v.line);
        long long x = 0;
        size_t used = 0;
        try {
            x = std::stoll(v.raw, &used);
        } catch (const std::invalid_argument&) {
            bad_type(section, key, "an integer", v.line);
        } catch (const std::out_of_range&) {
            fail(source_, v.line, key_name(section, key) + " out of int range");
        }
        if (used != v.raw.size()) bad_type(section, key, "an integer", v.line);
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
            fail(source_, v.line, key_name(section, key) + " out of int range");
        return static_cast<int>(x);
    }

    uint64_t unsigned64(const std::string& section, const std::string& key, uint64_t fallback) {
        if (!has(section, key)) return fallback;
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::kNumber) bad_type(section, key, "an unsigned integer", v.line);
        unsigned long long x = 0;
        size_t used = 0;
        try {
            x = std::stoull(v.raw, &used);
        } catch (const std::exception&) {
            bad_type(section, key, "an unsigned integer", v.line);
        }
        if (used != v.raw.size() || v.raw[0] == '-') bad_type(section, key, "an unsigned integer", v.line);
        return static_cast<uint64_t>(x);
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) {
        if (!has(section, key)) return fallback;
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::kString) bad_type(section, key, "a string", v.line);
        return v.str;
    }

    std::vector<double> numbers(const std::string& section, const std::string& key) {
        if (!has(section, key)) return {};
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::kArray) bad_type(section, key, "an array of numbers", v.line);
        return v.array;
    }

    // Every key present in the doc must have been consumed via has().
    void reject_unknown() {
        for (const auto& [section, keys] : doc_.sections) {
            for (const auto& [key, value] : keys) {
                if (seen_.count(section + "\n" + key) == 0)
                    fail(source_, value.line, "unknown key '" + key_name(section, key) + "'");
            }
        }
    }

private:
    void mark(const std::string& section, const std::string& key) { seen_.insert(section + "\n" + key); }

    static std::string key_name(const std::string& section, const std::string& key) {
        return section.empty() ? key : section + "." + key;
    }

    [[noreturn]] void bad_type(const std::string& section, const std::string& key, const char* want, int line) {
        fail(source_, line, key_name(section, key) + " must be " + want);
    }

    const TomlDoc& doc_;
    std::string source_;
    std::set<std::string> seen_;
};

}  // namespace

TomlDoc parse_toml(const std::string& text, const std::string& source_name) {
    TomlDoc doc;
    std::string section;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string line = nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        line = trim(strip_comment(line));
        if (line.empty()) continue;

        if (line[0] == '[') {
            if (line.back() != ']') fail(source_name, line_no, "unterminated section header");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) fail(source_name, line_no, "empty section name");
            for (char c : name)
                if (!valid_key_char(c)) fail(source_name, line_no, "bad section name '" + name + "'");
            section = name;
            doc.sections[section];  // a section may be empty
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string::npos) fail(source_name, line_no, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(source_name, line_no, "empty key");
        for (char c : key)
            if (!valid_key_char(c)) fail(source_name, line_no, "bad key '" + key + "'");
        if (doc.sections[section].count(key))
            fail(source_name, line_no, "duplicate key '" + key + "'");
        doc.sections[section].emplace(key, parse_value(value, source_name, line_no));
    }
    return doc;
}

PipelineConfig PipelineConfig::from_string(const std::string& text, const std::string& source_name) {
    TomlDoc doc = parse_toml(text, source_name);
    Schema s(doc, source_name);
    PipelineConfig cfg;

    cfg.seed = s.unsigned64("", "seed", cfg.seed);

    cfg.paths.graph = s.text("paths", "graph", cfg.paths.graph);
    cfg.paths.out_dir = s.text("paths", "out_dir", cfg.paths.out_dir);
    cfg.paths.checkpoint = s.text("paths", "checkpoint", cfg.paths.checkpoint);

    if (s.has("gen", "bbox")) {
        std::vector<double> b = s.numbers("gen", "bbox");
        if (b.size() != 4)
            throw std::invalid_argument(source_name + ": gen.bbox must be [lo_lat, lo_lon, hi_lat, hi_lon]");
        cfg.gen.bbox = {{b[0], b[1]}, {b[2], b[3]}};
    }
    cfg.gen.n_traj = s.integer("gen", "n_traj", cfg.gen.n_traj);
    cfg.gen.speed_mps = s.number("gen", "speed_mps", cfg.gen.speed_mps);
    cfg.gen.dt_s = s.number("gen", "dt_s", cfg.gen.dt_s);
    cfg.gen.max_len = s.integer("gen", "max_len", cfg.gen.max_len);

    cfg.degrade.kind = s.text("degrade", "kind", cfg.degrade.kind);
    if (cfg.degrade.kind != "hex" && cfg.degrade.kind != "round" && cfg.degrade.kind != "noise")
        throw std::invalid_argument(source_name + ": degrade.kind must be hex, round, or noise");
    cfg.degrade.level = s.integer("degrade", "level", cfg.degrade.level);
    if (s.has("degrade", "edge_len_m")) cfg.degrade.edge_len_m = s.number("degrade", "edge_len_m", 0.0);
    cfg.degrade.decimals = s.integer("degrade", "decimals", cfg.degrade.decimals);
    cfg.degrade.sigma_m = s.number("degrade", "sigma_m", cfg.degrade.sigma_m);

    cfg.model.d_model = s.integer("model", "d_model", cfg.model.d_model);
    cfg.model.n_heads = s.integer("model", "n_heads", cfg.model.n_heads);
    cfg.model.n_enc_layers = s.integer("model", "n_enc_layers", cfg.model.n_enc_layers);
    cfg.model.n_dec_layers = s.integer("model", "n_dec_layers", cfg.model.n_dec_layers);
    cfg.model.ff_mult = s.integer("model", "ff_mult", cfg.model.ff_mult);
    cfg.model.gcn_layers = s.integer("model", "gcn_layers", cfg.model.gcn_layers);
    cfg.model.gcn_hidden = s.integer("model", "gcn_hidden", cfg.model.gcn_hidden);
    cfg.model.dropout_p = s.number("model", "dropout_p", cfg.model.dropout_p);
    cfg.model.softdtw_gamma = s.number("model", "softdtw_gamma", cfg.model.softdtw_gamma);
    cfg.model.max_len = s.integer("model", "max_len", cfg.model.max_len);
    cfg.model.subgraph_radius_km = s.number("model", "subgraph_radius_km", cfg.model.subgraph_radius_km);
    cfg.model.lr = s.number("model", "lr", cfg.model.lr);
    cfg.model.batch_size = s.integer("model", "batch_size", cfg.model.batch_size);
    cfg.model.epochs = s.integer("model", "epochs", cfg.model.epochs);

    cfg.hmm.sigma_m = s.number("hmm", "sigma_m", cfg.hmm.sigma_m);
    cfg.hmm.beta_m = s.number("hmm", "beta_m", cfg.hmm.beta_m);
    cfg.hmm.candidate_radius_m = s.number("hmm", "candidate_radius_m", cfg.hmm.candidate_radius_m);
    cfg.hmm.max_candidates = s.integer("hmm", "max_candidates", cfg.hmm.max_candidates);

    cfg.eval.bin_width_km = s.number("eval", "bin_width_km", cfg.eval.bin_width_km);
    cfg.eval.bin_max_km = s.number("eval", "bin_max_km", cfg.eval.bin_max_km);
    if (!(cfg.eval.bin_width_km > 0.0) || !(cfg.eval.bin_max_km > cfg.eval.bin_width_km / 2.0))
        throw std::invalid_argument(source_name + ": eval bins must have positive width below bin_max_km");

    s.reject_unknown();
    return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    return from_string(io::read_text_file(path), path);
}

double PipelineConfig::hex_edge_len_m() const {
    if (degrade.edge_len_m.has_value()) {
        if (!(*degrade.edge_len_m > 0.0))
            throw std::invalid_argument("config: degrade.edge_len_m must be positive");
        return *degrade.edge_len_m;
    }
    return degrade::resolution_edge_len(degrade.level);
}

std::vector<double> PipelineConfig::eval_bin_edges() const {
    std::vector<double> edges;
    for (double e = 0.0; e < eval.bin_max_km + eval.bin_width_km / 2.0; e += eval.bin_width_km)
        edges.push_back(e);
    edges.push_back(std::numeric_limits<double>::infinity());
    return edges;
}

}  // namespace trajsr::cli
