#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "ogc/graph.hpp"

namespace ogc {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

template <typename F>
void for_each_line(const std::string& text, F&& f) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        ++line_no;
        f(std::string_view(text).substr(pos, end - pos), line_no);
        if (end == text.size()) break;
        pos = end + 1;
    }
}

bool parse_index(std::string_view tok, std::size_t& out) {
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

bool parse_real(std::string_view tok, double& out) {
    // std::from_chars for double is not available in every libstdc++ we target.
    std::string buf(tok);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return !buf.empty() && end == buf.c_str() + buf.size() && std::isfinite(out);
}

}  // namespace

EdgeList parse_edge_list(const std::string& text) {
    EdgeList out;
    std::size_t declared = 0;
    bool has_declared = false;
    std::size_t max_id = 0;
    bool any = false;

    for_each_line(text, [&](std::string_view raw, std::size_t line_no) {
        const auto line = trim(raw);
        if (line.empty()) return;
        if (line.front() == '#') {
            const auto body = trim(line.substr(1));
            if (body.starts_with("n=") || body.starts_with("n =")) {
                const auto value = trim(body.substr(body.find('=') + 1));
                if (!parse_index(value, declared)) throw ParseError("bad node-count header", line_no);
                has_declared = true;
            }
            return;
        }
        const auto tokens = split_ws(line);
        std::size_t u = 0, v = 0;
        if (tokens.size() != 2 || !parse_index(tokens[0], u) || !parse_index(tokens[1], v))
            throw ParseError("expected \"src<TAB>dst\" with non-negative integers", line_no);
        out.edges.emplace_back(u, v);
        max_id = std::max({max_id, u, v});
        any = true;
    });

    out.num_nodes = has_declared ? declared : (any ? max_id + 1 : 0);
    return out;
}

EdgeList load_edge_list(const std::filesystem::path& path) { return parse_edge_list(read_file(path)); }

NodeDataset parse_cora_format(const std::string& content, const std::string& cites) {
    std::unordered_map<std::string, std::size_t> id_to_index;
    std::unordered_map<std::string, int> label_to_class;
    std::vector<std::string> class_names;
    std::vector<double> feature_data;
    std::vector<int> labels;
    std::size_t width = 0;
    bool width_known = false;

    for_each_line(content, [&](std::string_view raw, std::size_t line_no) {
        const auto line = trim(raw);
        if (line.empty()) return;
        const auto tokens = split_ws(line);
        if (tokens.size() < 2) throw ParseError("content row needs an id and a label", line_no);
        const std::size_t d = tokens.size() - 2;
        if (!width_known) {
            width = d;
            width_known = true;
        } else if (d != width) {
            throw ParseError("inconsistent feature width: expected " + std::to_string(width) + ", got " +
                                 std::to_string(d),
                             line_no);
        }
        std::string id(tokens.front());
        if (id_to_index.contains(id)) throw ParseError("duplicate node id '" + id + "'", line_no);
        id_to_index.emplace(std::move(id), labels.size());
        for (std::size_t k = 1; k + 1 < tokens.size(); ++k) {
            double v = 0.0;
            if (!parse_real(tokens[k], v)) throw ParseError("non-numeric feature value", line_no);
            feature_data.push_back(v);
        }
        std::string label(tokens.back());
        auto [it, inserted] = label_to_class.emplace(label, static_cast<int>(class_names.size()));
        if (inserted) class_names.push_back(label);
        labels.push_back(it->second);
    });

    EdgeList edges;
    edges.num_nodes = labels.size();
    std::size_t dropped = 0;
    for_each_line(cites, [&](std::string_view raw, std::size_t line_no) {
        const auto line = trim(raw);
        if (line.empty()) return;
        const auto tokens = split_ws(line);
        if (tokens.size() != 2) throw ParseError("cites row must be \"cited<TAB>citing\"", line_no);
        const auto a = id_to_index.find(std::string(tokens[0]));
        const auto b = id_to_index.find(std::string(tokens[1]));
        if (a == id_to_index.end() || b == id_to_index.end()) {
            ++dropped;
            return;
        }
        edges.edges.emplace_back(a->second, b->second);
    });

    NodeDataset ds;
    ds.graph = normalize_adjacency(edges);
    ds.features = Matrix(labels.size(), width, std::move(feature_data));
    ds.labels = std::move(labels);
    ds.num_classes = static_cast<int>(class_names.size());
    ds.class_names = std::move(class_names);
    ds.dropped_edges = dropped;
    return ds;
}

NodeDataset load_cora_format(const std::filesystem::path& content_path, const std::filesystem::path& cites_path) {
    return parse_cora_format(read_file(content_path), read_file(cites_path));
}

void validate_split(const Split& split, std::size_t n) {
    std::vector<char> owner(n, 0);
    auto mark = [&](const std::vector<std::size_t>& idx, char tag, const char* name) {
        for (std::size_t i : idx) {
            if (i >= n)
                throw SplitError(std::string("split '") + name + "' index " + std::to_string(i) + " outside [0, " +
                                 std::to_string(n) + ")");
            if (owner[i] != 0)
                throw SplitError(std::string("split '") + name + "' index " + std::to_string(i) +
                                 " already assigned to another split");
            owner[i] = tag;
        }
    };
    mark(split.train, 1, "train");
    mark(split.val, 2, "val");
    mark(split.test, 3, "test");
}

Split parse_splits(const std::string& json_text, std::size_t n) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("split file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("split file must hold a JSON object");
    auto read = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array())
            throw ParseError(std::string("split file needs an integer array \"") + key + "\"");
        std::vector<std::size_t> out;
        for (const auto& v : j[key]) {
            if (!v.is_number_integer()) throw ParseError(std::string("non-integer entry in \"") + key + "\"");
            const auto x = v.get<long long>();
            if (x < 0) throw SplitError(std::string("negative index in \"") + key + "\"");
            out.push_back(static_cast<std::size_t>(x));
        }
        return out;
    };
    Split s{read("train"), read("val"), read("test")};
    validate_split(s, n);
    return s;
}

Split load_splits(const std::filesystem::path& path, std::size_t n) { return parse_splits(read_file(path), n); }

void validate_dataset(const NodeDataset& ds) {
    const std::size_t n = ds.num_nodes();
    if (ds.features.rows() != n)
        throw ContractError("dataset: feature rows " + std::to_string(ds.features.rows()) + " != nodes " +
                            std::to_string(n));
    if (ds.labels.size() != n) throw ContractError("dataset: label count does not match node count");
    if (ds.num_classes <= 0) throw ContractError("dataset: num_classes must be positive");
    for (int y : ds.labels)
        if (y < 0 || y >= ds.num_classes) throw ContractError("dataset: label outside [0, num_classes)");
    validate_split(ds.split, n);
}

Split random_class_split(const std::vector<int>& labels, int num_classes, std::size_t per_class, std::size_t num_val,
                         std::size_t num_test, std::uint64_t seed) {
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    Split s;
    std::vector<std::size_t> taken(static_cast<std::size_t>(num_classes), 0);
    std::vector<std::size_t> rest;
    for (std::size_t i : order) {
        auto& t = taken[static_cast<std::size_t>(labels[i])];
        if (t < per_class) {
            s.train.push_back(i);
            ++t;
        } else {
            rest.push_back(i);
        }
    }
    if (rest.size() < num_val + num_test)
        throw ContractError("random_class_split: not enough nodes for the requested val/test sizes");
    s.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(num_val));
    s.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(num_val),
                  rest.begin() + static_cast<std::ptrdiff_t>(num_val + num_test));
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

void row_normalize_features(Matrix& features) {
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto r = features.row(i);
        double s = 0.0;
        for (double v : r) s += std::abs(v);
        if (s == 0.0) continue;
        for (double& v : r) v /= s;
    }
}

NodeDataset make_sbm_dataset(const SbmConfig& cfg) {
    if (cfg.num_classes <= 0 || cfg.num_nodes == 0 || cfg.feature_dim < static_cast<std::size_t>(cfg.num_classes))
        throw ContractError("make_sbm_dataset: invalid configuration");
    Rng rng(cfg.seed);
    const std::size_t n = cfg.num_nodes;
    const auto k = static_cast<std::size_t>(cfg.num_classes);

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % k);
    std::shuffle(labels.begin(), labels.end(), rng);

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    EdgeList edges;
    edges.num_nodes = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = labels[i] == labels[j] ? cfg.p_in : cfg.p_out;
            if (coin(rng) < p) edges.edges.emplace_back(i, j);
        }

    const std::size_t vocab = cfg.feature_dim / k;
    std::uniform_int_distribution<std::size_t> any_word(0, cfg.feature_dim - 1);
    std::uniform_int_distribution<std::size_t> topic_word(0, vocab - 1);
    Matrix features(n, cfg.feature_dim);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t base = static_cast<std::size_t>(labels[i]) * vocab;
        for (std::size_t w = 0; w < cfg.words_per_node; ++w) {
            const std::size_t word = coin(rng) < cfg.topic_word_prob ? base + topic_word(rng) : any_word(rng);
            features(i, word) = 1.0;
        }
    }

    NodeDataset ds;
    ds.graph = normalize_adjacency(edges);
    ds.features = std::move(features);
    ds.labels = std::move(labels);
    ds.num_classes = cfg.num_classes;
    for (int c = 0; c < cfg.num_classes; ++c) ds.class_names.push_back("class" + std::to_string(c));
    ds.split = random_class_split(ds.labels, cfg.num_classes, cfg.train_per_class, cfg.num_val, cfg.num_test,
                                  cfg.seed + 1);
    return ds;
}

}  // namespace ogc
