#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ogc/diagnostics.hpp"
#include "ogc/engine.hpp"
#include "ogc/graph.hpp"
#include "ogc/ortho.hpp"

namespace ogc::cli {

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTrainingFailed = 3;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw UsageError("invalid " + what + " '" + text + "'");
    return std::stoull(t);
}

// ---------------------------------------------------------------------------
// Flags and the merged run configuration
// ---------------------------------------------------------------------------

/// Every option's value lives here; JSON config keys are the long flag names
/// with '-' replaced by '_'.
struct Flags {
    std::string dataset = "sbm";
    std::string data_dir;
    std::string content;
    std::string cites;
    std::string edges;
    std::string features;
    std::string labels;
    std::string split;
    std::string normalize_features = "on";
    std::uint64_t data_seed = 0;

    int layers = 2;
    std::size_t hidden = 64;
    std::string activation = "relu";
    std::string ortho = "off";
    int T = 4;
    double beta = 0.4;
    double lambda = 1e-4;
    int penalty_exponent = 2;
    std::string scale_forward = "off";
    double lr = 0.01;
    double weight_decay = 5e-4;
    double dropout = 0.0;
    int epochs = 200;
    int steadiness_every = 1;
    std::string seeds;

    std::string depths = "2,4,8,16";
    std::string variants = "vanilla,ortho,aggregation_only";

    std::string config;
    std::string out = ".";
    int workers = 1;
};

struct Field {
    std::string key;
    CLI::Option* option;
    std::function<json()> get;
    std::function<void(const json&)> set;
    bool echoed = true;
};

template <typename T>
void assign_from_json(T& var, const json& j) {
    var = j.get<T>();
}

void assign_from_json(std::string& var, const json& j) {
    if (j.is_string()) {
        var = j.get<std::string>();
    } else if (j.is_boolean()) {
        var = j.get<bool>() ? "on" : "off";
    } else if (j.is_array()) {
        std::string joined;
        for (const auto& e : j) joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
        var = joined;
    } else {
        var = j.dump();
    }
}

class Registry {
public:
    explicit Registry(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* add(const std::string& flag, T& var, const std::string& help, bool echoed = true) {
        CLI::Option* opt = app_->add_option("--" + flag, var, help)->capture_default_str();
        std::string key = flag;
        std::replace(key.begin(), key.end(), '-', '_');
        fields_.push_back({key, opt, [&var] { return json(var); }, [&var](const json& j) { assign_from_json(var, j); },
                           echoed});
        return opt;
    }

    /// Config-file values fill every option not given on the command line.
    void merge_config_file(const std::string& path) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open config file '" + path + "'");
        json file;
        try {
            file = json::parse(in);
        } catch (const json::parse_error& e) {
            throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
        }
        if (!file.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& [key, value] : file.items()) {
            auto it = std::find_if(fields_.begin(), fields_.end(), [&](const Field& f) { return f.key == key; });
            if (it == fields_.end() || key == "config") throw UsageError("unknown config key '" + key + "'");
            if (it->option->count() > 0) continue;
            try {
                it->set(value);
            } catch (const json::exception& e) {
                throw UsageError("config key '" + key + "' has the wrong type: " + e.what());
            }
        }
    }

    json echo() const {
        json j = json::object();
        for (const auto& f : fields_)
            if (f.echoed) j[f.key] = f.get();
        return j;
    }

private:
    CLI::App* app_;
    std::vector<Field> fields_;
};

bool on_off(const std::string& value, const std::string& key) {
    if (value == "on") return true;
    if (value == "off") return false;
    throw UsageError("--" + key + " expects on|off, got '" + value + "'");
}

void add_dataset_flags(Registry& r, Flags& f) {
    r.add("dataset", f.dataset, "cora | sbm | files");
    r.add("data-dir", f.data_dir, "directory holding cora.content and cora.cites");
    r.add("content", f.content, "content file (citation format)");
    r.add("cites", f.cites, "cites file (citation format)");
    r.add("edges", f.edges, "edge list (files dataset)");
    r.add("features", f.features, "feature matrix CSV (files dataset)");
    r.add("labels", f.labels, "one integer label per line (files dataset)");
    r.add("split", f.split, "split JSON with train/val/test arrays");
    r.add("normalize-features", f.normalize_features, "row-normalize features to unit L1: on|off");
    r.add("data-seed", f.data_seed, "seed for the synthetic graph and the fallback split");
}

void add_model_flags(Registry& r, Flags& f) {
    r.add("layers", f.layers, "number of GCN layers");
    r.add("hidden", f.hidden, "hidden width");
    r.add("activation", f.activation, "relu | identity");
    r.add("ortho", f.ortho, "orthogonal transformation on square layers: on|off");
    r.add("T", f.T, "Newton iterations");
    r.add("beta", f.beta, "hybrid-init blend weight");
    r.add("lambda", f.lambda, "regularizer weight");
    r.add("penalty-exponent", f.penalty_exponent, "regularizer exponent: 1 or 2");
    r.add("scale-forward", f.scale_forward, "experimental: multiply W by sqrt(c) in the forward pass: on|off");
    r.add("lr", f.lr, "Adam learning rate");
    r.add("weight-decay", f.weight_decay, "L2 weight decay on raw weights");
    r.add("dropout", f.dropout, "dropout rate on layer inputs");
    r.add("epochs", f.epochs, "training epochs");
    r.add("steadiness-every", f.steadiness_every, "record msig/smoothness every N epochs (0: never)");
    r.add("seeds", f.seeds, "seed list, e.g. 0..9 or 1,4,7 (default: $ORTHO_GCONV_SEED or 0)");
}

void add_run_flags(Registry& r, Flags& f) {
    r.add("config", f.config, "JSON config file; command-line flags take precedence", false);
    r.add("out", f.out, "output directory", false);
    r.add("workers", f.workers, "parallel workers over seeds / cells", false);
}

std::vector<std::uint64_t> resolve_seeds(Flags& f) {
    if (trim(f.seeds).empty()) {
        const char* env = std::getenv("ORTHO_GCONV_SEED");
        f.seeds = env && *env ? env : "0";
    }
    return parse_seed_list(f.seeds);
}

// ---------------------------------------------------------------------------
// Dataset and model construction
// ---------------------------------------------------------------------------

std::vector<int> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size() || v < 0) throw ParseError("label must be a non-negative integer", line_no);
        labels.push_back(v);
    }
    return labels;
}

Split fallback_split(const std::vector<int>& labels, int num_classes, std::uint64_t seed) {
    const std::size_t n = labels.size();
    const auto k = static_cast<std::size_t>(num_classes);
    const std::size_t per_class = std::clamp<std::size_t>(n / (5 * k), 1, 20);
    const std::size_t train = random_class_split(labels, num_classes, per_class, 0, 0, seed).train.size();
    const std::size_t rest = n - train;
    const std::size_t val = std::min<std::size_t>(500, rest / 3);
    const std::size_t test = std::min<std::size_t>(1000, rest - val);
    return random_class_split(labels, num_classes, per_class, val, test, seed);
}

NodeDataset load_dataset(const Flags& f) {
    NodeDataset ds;
    if (f.dataset == "sbm") {
        SbmConfig cfg;
        cfg.seed = f.data_seed;
        ds = make_sbm_dataset(cfg);
    } else if (f.dataset == "cora") {
        const std::filesystem::path dir = f.data_dir.empty() ? "." : f.data_dir;
        const std::filesystem::path content = f.content.empty() ? dir / "cora.content" : std::filesystem::path(f.content);
        const std::filesystem::path cites = f.cites.empty() ? dir / "cora.cites" : std::filesystem::path(f.cites);
        for (const auto& p : {content, cites})
            if (!std::filesystem::exists(p)) throw UsageError("dataset file not found: " + p.string());
        ds = load_cora_format(content, cites);
    } else if (f.dataset == "files") {
        if (f.edges.empty() || f.features.empty() || f.labels.empty())
            throw UsageError("--dataset files needs --edges, --features and --labels");
        EdgeList edges = load_edge_list(f.edges);
        ds.features = read_csv_matrix(f.features);
        ds.labels = read_labels(f.labels);
        if (ds.labels.size() != ds.features.rows())
            throw UsageError("label count " + std::to_string(ds.labels.size()) + " does not match feature rows " +
                             std::to_string(ds.features.rows()));
        if (edges.num_nodes > ds.features.rows())
            throw UsageError("edge list names more nodes than there are feature rows");
        edges.num_nodes = ds.features.rows();
        ds.graph = normalize_adjacency(edges);
        ds.num_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    } else {
        throw UsageError("--dataset must be cora, sbm or files, got '" + f.dataset + "'");
    }

    if (on_off(f.normalize_features, "normalize-features")) row_normalize_features(ds.features);
    if (!f.split.empty()) {
        ds.split = load_splits(f.split, ds.num_nodes());
    } else if (f.dataset != "sbm") {
        ds.split = fallback_split(ds.labels, ds.num_classes, f.data_seed);
    }
    validate_dataset(ds);
    return ds;
}

ModelConfig model_config(const Flags& f, const NodeDataset& ds) {
    ModelConfig c;
    c.num_layers = f.layers;
    c.hidden_dim = f.hidden;
    c.input_dim = ds.feature_dim();
    c.num_classes = static_cast<std::size_t>(ds.num_classes);
    try {
        c.activation = activation_from_string(f.activation);
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
    c.ortho.enabled = on_off(f.ortho, "ortho");
    c.ortho.iterations = f.T;
    c.ortho.beta = f.beta;
    c.ortho.lambda = f.lambda;
    c.ortho.penalty_exponent = f.penalty_exponent;
    c.ortho.scale_forward = on_off(f.scale_forward, "scale-forward");
    c.learning_rate = f.lr;
    c.weight_decay = f.weight_decay;
    c.dropout_rate = f.dropout;
    c.epochs = f.epochs;
    c.steadiness_every = f.steadiness_every;
    if (f.T < 1) throw UsageError("--T must be a positive integer");
    if (f.steadiness_every < 0) throw UsageError("--steadiness-every must be >= 0");
    try {
        c.validate();
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
    return c;
}

json model_config_json(const ModelConfig& c) {
    return {{"layers", c.num_layers},
            {"hidden", c.hidden_dim},
            {"input_dim", c.input_dim},
            {"num_classes", c.num_classes},
            {"activation", to_string(c.activation)},
            {"ortho", c.ortho.enabled},
            {"T", c.ortho.iterations},
            {"beta", c.ortho.beta},
            {"lambda", c.ortho.lambda},
            {"penalty_exponent", c.ortho.penalty_exponent},
            {"scale_forward", c.ortho.scale_forward},
            {"lr", c.learning_rate},
            {"weight_decay", c.weight_decay},
            {"dropout", c.dropout_rate},
            {"epochs", c.epochs},
            {"steadiness_every", c.steadiness_every},
            {"seed", c.seed}};
}

json dataset_json(const Flags& f, const NodeDataset& ds) {
    return {{"name", f.dataset},
            {"nodes", ds.num_nodes()},
            {"edges", ds.graph.num_edges()},
            {"features", ds.feature_dim()},
            {"classes", ds.num_classes},
            {"train", ds.split.train.size()},
            {"val", ds.split.val.size()},
            {"test", ds.split.test.size()},
            {"dropped_edges", ds.dropped_edges}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json epoch_json(const EpochMetrics& m, std::uint64_t seed) {
    return {{"seed", seed},
            {"epoch", m.epoch},
            {"train_loss", m.train_loss},
            {"aux_loss", m.aux_loss},
            {"train_acc", m.train_acc},
            {"val_acc", m.val_acc},
            {"test_acc", m.test_acc},
            {"msig", optional_json(m.msig)},
            {"grad_norms", m.grad_norms},
            {"smoothness", optional_json(m.smoothness)}};
}

json mean_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
    return {{"mean", mean}, {"std", sd}, {"n", xs.size()}};
}

/// Runs job(i) for i in [0, count) on `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
    const auto w = static_cast<std::size_t>(std::max(1, workers));
    if (w == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(w, count); ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
    for (auto& t : pool) t.join();
}

std::filesystem::path prepare_out_dir(const std::string& out) {
    std::filesystem::path dir = out.empty() ? "." : out;
    std::filesystem::create_directories(dir);
    return dir;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream o(path);
    if (!o) throw UsageError("cannot write " + path.string());
    o << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_train(Flags& f, const Registry& reg, std::ostream& out) {
    const auto seeds = resolve_seeds(f);
    const NodeDataset ds = load_dataset(f);
    const ModelConfig base = model_config(f, ds);
    const auto dir = prepare_out_dir(f.out);

    std::vector<TrainResult> results(seeds.size());
    std::vector<std::string> errors(seeds.size());
    parallel_for(seeds.size(), f.workers, [&](std::size_t i) {
        ModelConfig c = base;
        c.seed = seeds[i];
        try {
            results[i] = train(c, ds);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    json runs = json::array();
    std::vector<double> test_acc, val_acc, msig;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!errors[i].empty()) {
            runs.push_back({{"seed", seeds[i]}, {"ok", false}, {"error", errors[i]}});
            continue;
        }
        const auto& r = results[i];
        std::ofstream jsonl(dir / ("metrics_seed" + std::to_string(seeds[i]) + ".jsonl"));
        for (const auto& m : r.series) jsonl << epoch_json(m, seeds[i]).dump() << '\n';
        runs.push_back({{"seed", seeds[i]},
                        {"ok", true},
                        {"best_epoch", r.best_epoch},
                        {"best_val_acc", r.best_val_acc},
                        {"test_acc_at_best", r.test_acc_at_best},
                        {"msig_at_best", r.msig_at_best},
                        {"smoothness_at_best", r.smoothness_at_best},
                        {"final_train_loss", r.series.empty() ? json(nullptr) : json(r.series.back().train_loss)}});
        test_acc.push_back(r.test_acc_at_best);
        val_acc.push_back(r.best_val_acc);
        msig.push_back(r.msig_at_best);
    }

    json config = reg.echo();
    config["seeds"] = seeds;
    json summary = {{"command", "train"},
                    {"config", config},
                    {"model", model_config_json(base)},
                    {"dataset", dataset_json(f, ds)},
                    {"runs", runs}};
    if (!test_acc.empty()) {
        summary["test_acc"] = mean_std(test_acc);
        summary["best_val_acc"] = mean_std(val_acc);
        summary["msig_at_best"] = mean_std(msig);
    }
    write_json(dir / "summary.json", summary);

    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!errors[i].empty()) {
            out << "seed " << seeds[i] << ": FAILED " << errors[i] << '\n';
        } else {
            out << "seed " << seeds[i] << ": best epoch " << results[i].best_epoch << ", val "
                << results[i].best_val_acc << ", test " << results[i].test_acc_at_best << '\n';
        }
    }
    if (!test_acc.empty())
        out << std::fixed << std::setprecision(2) << "test accuracy " << 100.0 * summary["test_acc"]["mean"].get<double>()
            << " +/- " << 100.0 * summary["test_acc"]["std"].get<double>() << " over " << test_acc.size()
            << " seed(s)\n";
    out << "wrote " << (dir / "summary.json").string() << '\n';
    return test_acc.size() == seeds.size() ? kExitOk : kExitTrainingFailed;
}

int cmd_probe(Flags& f, const Registry& reg, std::ostream& out) {
    SweepConfig sweep;
    sweep.seeds = resolve_seeds(f);
    sweep.depths = parse_int_list(f.depths);
    for (int d : sweep.depths)
        if (d < 1) throw UsageError("--depths entries must be positive");
    std::stringstream vs(f.variants);
    for (std::string v; std::getline(vs, v, ',');) {
        try {
            sweep.variants.push_back(variant_from_string(trim(v)));
        } catch (const ContractError& e) {
            throw UsageError(e.what());
        }
    }
    if (sweep.variants.empty()) throw UsageError("--variants must name at least one variant");
    sweep.workers = f.workers;

    const NodeDataset ds = load_dataset(f);
    sweep.base = model_config(f, ds);
    const auto dir = prepare_out_dir(f.out);
    const auto cells = depth_sweep(ds, sweep);

    std::ofstream csv(dir / "probe.csv");
    csv << "depth,variant,seed,accuracy,msig,smoothness\n";
    csv << std::setprecision(17);
    std::ofstream jsonl(dir / "probe_cells.jsonl");
    json config = reg.echo();
    config["seeds"] = sweep.seeds;
    int failures = 0;
    for (const auto& c : cells) {
        csv << c.depth << ',' << to_string(c.variant) << ',' << c.seed << ',' << c.accuracy << ',' << c.msig << ','
            << c.smoothness << '\n';
        json cell = {{"depth", c.depth},  {"variant", to_string(c.variant)}, {"seed", c.seed},
                     {"ok", c.ok},        {"accuracy", c.accuracy},          {"msig", c.msig},
                     {"smoothness", c.smoothness}, {"config", config}};
        if (!c.ok) cell["error"] = c.error;
        if (c.variant != Variant::aggregation_only)
            cell["model"] = model_config_json(variant_config(sweep.base, c.variant, c.depth, c.seed));
        json series = json::array();
        for (const auto& m : c.series) series.push_back(epoch_json(m, c.seed));
        cell["series"] = std::move(series);
        jsonl << cell.dump() << '\n';
        if (!c.ok) ++failures;
    }

    out << std::left << std::setw(7) << "depth" << std::setw(18) << "variant" << std::setw(6) << "seed"
        << std::setw(10) << "accuracy" << std::setw(14) << "msig" << "smoothness\n";
    for (const auto& c : cells) {
        out << std::setw(7) << c.depth << std::setw(18) << to_string(c.variant) << std::setw(6) << c.seed;
        if (c.ok) {
            out << std::setw(10) << std::setprecision(4) << c.accuracy << std::setw(14) << std::setprecision(4)
                << c.msig << std::setprecision(4) << c.smoothness << '\n';
        } else {
            out << "FAILED: " << c.error << '\n';
        }
    }
    out << "wrote " << (dir / "probe.csv").string() << '\n';
    return failures == 0 ? kExitOk : kExitTrainingFailed;
}

struct TheoremFlags {
    std::string dims = "4,8";
    std::string depths = "2,3,5";
    int trials = 5;
    std::string theorem2_dims = "4,16,64";
    std::size_t samples = 100000;
    double sigma = 1.0;
    int newton_T = 20;
    std::uint64_t seed = 0;
    bool perturb_newton = false;
};

double linear_objective(const Graph& g, const Matrix& x, const std::vector<Matrix>& w, const Matrix& up) {
    return dot(linear_forward(g, x, w).back(), up);
}

int cmd_check_theorems(const TheoremFlags& f, std::ostream& out) {
    const auto dims = parse_int_list(f.dims);
    const auto depths = parse_int_list(f.depths);
    const auto t2_dims = parse_int_list(f.theorem2_dims);
    if (f.trials < 1) throw UsageError("--trials must be positive");
    constexpr double kBackpropTol = 1e-10;
    constexpr double kFdTol = 1e-6;
    int failed = 0;
    out << std::scientific << std::setprecision(2);

    for (int d : dims) {
        for (int depth : depths) {
            if (d < 1 || depth < 1) throw UsageError("--dims and --depths entries must be positive");
            double worst_bp = 0.0, worst_fd = 0.0;
            for (int trial = 0; trial < f.trials; ++trial) {
                Rng rng(derive_seed(f.seed, static_cast<std::uint64_t>(d * 1000003 + depth * 1009 + trial)));
                const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 16)(rng);
                EdgeList e;
                e.num_nodes = n;
                std::bernoulli_distribution coin(0.3);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j)
                        if (coin(rng)) e.edges.emplace_back(i, j);
                const Graph g = normalize_adjacency(e);
                const auto du = static_cast<std::size_t>(d);
                const Matrix x = random_normal(n, du, 1.0, rng);
                std::vector<Matrix> w;
                for (int l = 0; l < depth; ++l) w.push_back(random_normal(du, du, 1.0 / std::sqrt(double(d)), rng));
                const Matrix up = random_normal(n, du, 1.0, rng);
                const auto bp = linear_backprop(g, x, w, up);
                for (int l = 1; l <= depth; ++l) {
                    const auto li = static_cast<std::size_t>(l - 1);
                    const Matrix closed = theorem1_gradient(g, x, w, up, l);
                    worst_bp = std::max(worst_bp, relative_error(closed, bp[li]));
                    Matrix fd(du, du);
                    for (std::size_t i = 0; i < du; ++i)
                        for (std::size_t j = 0; j < du; ++j) {
                            const double saved = w[li](i, j);
                            const double h = 1e-5;
                            w[li](i, j) = saved + h;
                            const double plus = linear_objective(g, x, w, up);
                            w[li](i, j) = saved - h;
                            const double minus = linear_objective(g, x, w, up);
                            w[li](i, j) = saved;
                            fd(i, j) = (plus - minus) / (2 * h);
                        }
                    worst_fd = std::max(worst_fd, relative_error(closed, fd));
                }
            }
            const bool ok = worst_bp <= kBackpropTol && worst_fd <= kFdTol;
            failed += ok ? 0 : 1;
            out << "theorem1  d=" << d << " L=" << depth << " trials=" << f.trials << "  backprop " << worst_bp
                << " (tol " << kBackpropTol << ")  finite-diff " << worst_fd << " (tol " << kFdTol << ")  "
                << (ok ? "PASS" : "FAIL") << '\n';
        }
    }

    auto report = [&](const char* name, int d, const Theorem2Report& r) {
        failed += r.passed() ? 0 : 1;
        out << "theorem2  " << name << " d=" << d << "  mean " << r.max_mean_dev << " (tol " << r.mean_tolerance
            << ")  cov " << r.max_cov_dev << " (tol " << r.cov_tolerance << ")  norm " << r.norm_rel_dev
            << "  grad-norm " << r.grad_norm_rel_dev << " (tol " << r.norm_tolerance << ")  "
            << (r.passed() ? "PASS" : "FAIL") << '\n';
    };
    for (int d : t2_dims) {
        if (d < 2) throw UsageError("--theorem2-dims entries must be >= 2");
        const auto du = static_cast<std::size_t>(d);
        report("householder", d, theorem2_check(du, f.samples, f.sigma, f.seed));

        // Orthogonal matrix recovered by the Newton transformation from a scaled orthogonal input.
        Rng rng(derive_seed(f.seed, 0x2e2 + du));
        const Matrix u = householder_orthogonal(du, du, rng);
        Matrix w = newton_orthogonalize(spectral_bound(u * 3.7), f.newton_T).weight;
        if (f.perturb_newton) w(0, 0) += 1e-3;
        report("newton", d, theorem2_check(w, f.samples, f.sigma, f.seed));
    }

    if (failed == 0) {
        out << "all checks passed\n";
        return kExitOk;
    }
    out << failed << " check(s) failed\n";
    return kExitCheckFailed;
}

struct OrthogonalizeFlags {
    std::string input;
    std::string output;
    std::string report;
    int T = 4;
};

int cmd_orthogonalize(const OrthogonalizeFlags& f, std::ostream& out) {
    if (f.T < 0) throw UsageError("--T must be >= 0");
    const Matrix q = read_csv_matrix(f.input);
    if (!q.is_square())
        throw UsageError("orthogonalize needs a square matrix, got " + std::to_string(q.rows()) + "x" +
                         std::to_string(q.cols()));
    const NewtonResult r = newton_orthogonalize(spectral_bound(q), f.T);
    std::filesystem::path output = f.output;
    if (output.empty()) {
        output = f.input;
        output.replace_filename(output.stem().string() + "_orthogonal.csv");
    }
    std::filesystem::path report = f.report;
    if (report.empty()) report = std::filesystem::path(output).replace_extension(".json");
    write_csv_matrix(output, r.weight);
    const double err = frobenius_norm(matmul_nt(r.weight, r.weight) - Matrix::identity(q.rows()));
    write_json(report, {{"input", f.input},
                        {"T", f.T},
                        {"dim", q.rows()},
                        {"residuals", r.residuals},
                        {"orthogonality_error", err},
                        {"rank_deficient", r.rank_deficient}});
    out << std::scientific << std::setprecision(3);
    for (std::size_t t = 0; t < r.residuals.size(); ++t) out << "t=" << t << "  residual " << r.residuals[t] << '\n';
    out << "||W W^T - I||_F = " << err << '\n';
    if (r.rank_deficient) out << "warning: input is numerically rank deficient\n";
    out << "wrote " << output.string() << " and " << report.string() << '\n';
    return kExitOk;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        item = trim(item);
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_u64(item, "seed"));
            continue;
        }
        const auto lo = parse_u64(item.substr(0, dots), "seed range");
        const auto hi = parse_u64(item.substr(dots + 2), "seed range");
        if (hi < lo) throw UsageError("seed range '" + item + "' is empty");
        if (hi - lo >= 100000) throw UsageError("seed range '" + item + "' is too long");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    if (out.empty()) throw UsageError("empty seed list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (auto v : parse_seed_list(text)) {
        if (v > 1000000) throw UsageError("list value " + std::to_string(v) + " is too large");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::vector<double> data;
    std::size_t cols = 0, rows = 0, line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::stringstream ls(line);
        std::size_t count = 0;
        for (std::string cell; std::getline(ls, cell, ',');) {
            const std::string t = trim(cell);
            char* end = nullptr;
            const double v = std::strtod(t.c_str(), &end);
            if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
                throw ParseError("invalid number '" + t + "'", line_no);
            data.push_back(v);
            ++count;
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw ParseError("expected " + std::to_string(cols) + " values, got " + std::to_string(count), line_no);
        }
        ++rows;
    }
    if (rows == 0) throw ParseError("empty matrix file " + path.string());
    return Matrix(rows, cols, std::move(data));
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream o(path);
    if (!o) throw ParseError("cannot write " + path.string());
    o << std::setprecision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) o << (j ? "," : "") << m(i, j);
        o << '\n';
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Orthogonal graph convolution: training, depth probes and numerical checks"};
    app.require_subcommand(1);

    Flags train_flags;
    CLI::App* train_cmd = app.add_subcommand("train", "train a GCN over one or more seeds");
    Registry train_reg(train_cmd);
    add_dataset_flags(train_reg, train_flags);
    add_model_flags(train_reg, train_flags);
    add_run_flags(train_reg, train_flags);

    Flags probe_flags;
    CLI::App* probe_cmd = app.add_subcommand("probe", "depth x variant sweep of accuracy, msig and smoothness");
    Registry probe_reg(probe_cmd);
    add_dataset_flags(probe_reg, probe_flags);
    add_model_flags(probe_reg, probe_flags);
    probe_reg.add("depths", probe_flags.depths, "comma-separated depths");
    probe_reg.add("variants", probe_flags.variants, "vanilla, ortho, aggregation_only");
    add_run_flags(probe_reg, probe_flags);

    TheoremFlags theorem_flags;
    CLI::App* check_cmd = app.add_subcommand("check-theorems", "gradient closed form and orthogonal-transform checks");
    check_cmd->add_option("--dims", theorem_flags.dims, "feature widths for the gradient check")->capture_default_str();
    check_cmd->add_option("--depths", theorem_flags.depths, "depths for the gradient check")->capture_default_str();
    check_cmd->add_option("--trials", theorem_flags.trials, "random instances per (dim, depth)")->capture_default_str();
    check_cmd->add_option("--theorem2-dims", theorem_flags.theorem2_dims, "dimensions for the orthogonal checks")
        ->capture_default_str();
    check_cmd->add_option("--samples", theorem_flags.samples, "Gaussian samples per orthogonal check")
        ->capture_default_str();
    check_cmd->add_option("--sigma", theorem_flags.sigma, "sample standard deviation")->capture_default_str();
    check_cmd->add_option("--newton-T", theorem_flags.newton_T, "Newton iterations for the recovered matrix")
        ->capture_default_str();
    check_cmd->add_option("--seed", theorem_flags.seed, "seed")->capture_default_str();
    check_cmd->add_flag("--perturb-newton", theorem_flags.perturb_newton,
                        "test hook: perturb the Newton output so its norm check must fail");

    OrthogonalizeFlags ortho_flags;
    CLI::App* ortho_cmd = app.add_subcommand("orthogonalize", "spectral bounding + Newton iteration on a CSV matrix");
    ortho_cmd->add_option("--input", ortho_flags.input, "square matrix CSV")->required()->check(CLI::ExistingFile);
    ortho_cmd->add_option("--output", ortho_flags.output, "W as CSV (default: <input>_orthogonal.csv)");
    ortho_cmd->add_option("--report", ortho_flags.report, "residual report JSON (default: <output>.json)");
    ortho_cmd->add_option("--T", ortho_flags.T, "Newton iterations")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train_cmd->parsed()) {
            train_reg.merge_config_file(train_flags.config);
            return cmd_train(train_flags, train_reg, out);
        }
        if (probe_cmd->parsed()) {
            probe_reg.merge_config_file(probe_flags.config);
            return cmd_probe(probe_flags, probe_reg, out);
        }
        if (check_cmd->parsed()) return cmd_check_theorems(theorem_flags, out);
        if (ortho_cmd->parsed()) return cmd_orthogonalize(ortho_flags, out);
    } catch (const DivergedError& e) {
        err << "error: " << e.what() << '\n';
        return kExitTrainingFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("ogc");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace ogc::cli
