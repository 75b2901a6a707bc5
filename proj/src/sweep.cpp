#include <algorithm>
#include <atomic>
#include <thread>

#include "ogc/diagnostics.hpp"

namespace ogc {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::vanilla: return "vanilla";
        case Variant::ortho: return "ortho";
        case Variant::aggregation_only: return "aggregation_only";
    }
    return "unknown";
}

Variant variant_from_string(const std::string& name) {
    if (name == "vanilla") return Variant::vanilla;
    if (name == "ortho") return Variant::ortho;
    if (name == "aggregation_only") return Variant::aggregation_only;
    throw ContractError("unknown variant '" + name + "'");
}

Matrix propagate(const Graph& graph, const Matrix& x, int steps) {
    if (steps < 0) throw ContractError("propagate: steps must be >= 0");
    Matrix h = x;
    for (int s = 0; s < steps; ++s) h = spmm(graph, h);
    return h;
}

double logistic_probe_accuracy(const Matrix& features, const NodeDataset& dataset, const ProbeConfig& cfg) {
    if (dataset.split.train.empty() || dataset.split.val.empty() || dataset.split.test.empty())
        throw ContractError("logistic_probe_accuracy: train, val and test splits must be non-empty");
    Matrix w = glorot_uniform(features.cols(), static_cast<std::size_t>(dataset.num_classes), cfg.seed);
    AdamMoments moments;
    double best_val = -1.0;
    double best_test = 0.0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto loss = masked_cross_entropy(matmul(features, w), dataset.labels, dataset.split.train);
        adam_update(w, matmul_tn(features, loss.grad_logits), moments, cfg.learning_rate, cfg.weight_decay, epoch);
        const Matrix logits = matmul(features, w);
        const double val = accuracy(logits, dataset.labels, dataset.split.val);
        if (val > best_val) {
            best_val = val;
            best_test = accuracy(logits, dataset.labels, dataset.split.test);
        }
    }
    return best_test;
}

ModelConfig variant_config(const ModelConfig& base, Variant variant, int depth, std::uint64_t seed) {
    ModelConfig c = base;
    c.num_layers = depth;
    c.seed = seed;
    c.ortho.enabled = variant == Variant::ortho;
    return c;
}

namespace {

SweepCell run_cell(const NodeDataset& dataset, const SweepConfig& cfg, int depth, Variant variant,
                   std::uint64_t seed) {
    SweepCell cell;
    cell.depth = depth;
    cell.variant = variant;
    cell.seed = seed;
    try {
        if (variant == Variant::aggregation_only) {
            const Matrix h = propagate(dataset.graph, dataset.features, depth);
            cell.msig = signal_magnification(dataset.features, h);
            cell.smoothness = graph_smoothness(h);
            ProbeConfig probe;
            probe.epochs = cfg.base.epochs;
            probe.learning_rate = cfg.base.learning_rate;
            probe.weight_decay = cfg.base.weight_decay;
            probe.seed = seed;
            cell.accuracy = logistic_probe_accuracy(h, dataset, probe);
        } else {
            auto result = train(variant_config(cfg.base, variant, depth, seed), dataset);
            cell.accuracy = result.test_acc_at_best;
            cell.msig = result.msig_at_best;
            cell.smoothness = result.smoothness_at_best;
            cell.series = std::move(result.series);
        }
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

std::vector<SweepCell> depth_sweep(const NodeDataset& dataset, const SweepConfig& cfg) {
    if (cfg.depths.empty()) throw ContractError("depth_sweep: depths must be non-empty");
    struct Job {
        int depth;
        Variant variant;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (int depth : cfg.depths)
        for (Variant v : cfg.variants)
            for (std::uint64_t s : cfg.seeds) jobs.push_back({depth, v, s});

    std::vector<SweepCell> cells(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
            cells[i] = run_cell(dataset, cfg, jobs[i].depth, jobs[i].variant, jobs[i].seed);
    };
    const auto workers = static_cast<std::size_t>(std::max(1, cfg.workers));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(workers, jobs.size()); ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return cells;
}

}  // namespace ogc
