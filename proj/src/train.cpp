#include <cmath>
#include <iostream>

#include "ogc/diagnostics.hpp"
#include "ogc/engine.hpp"

namespace ogc {

namespace {

struct Evaluation {
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    std::optional<double> msig;
    std::optional<double> smoothness;
};

double acc_or_zero(const Matrix& logits, const NodeDataset& ds, const std::vector<std::size_t>& mask) {
    return mask.empty() ? 0.0 : accuracy(logits, ds.labels, mask);
}

Evaluation evaluate(ModelState& state, const ModelConfig& config, const NodeDataset& dataset, bool steadiness) {
    const Matrix logits = model_forward(state, config, dataset, false);
    Evaluation e;
    e.train_acc = acc_or_zero(logits, dataset, dataset.split.train);
    e.val_acc = acc_or_zero(logits, dataset, dataset.split.val);
    e.test_acc = acc_or_zero(logits, dataset, dataset.split.test);
    if (steadiness) {
        e.msig = signal_magnification(dataset.features, logits);
        e.smoothness = graph_smoothness(logits);
    }
    state.tape.clear();
    return e;
}

}  // namespace

TrainResult train(const ModelConfig& config, const NodeDataset& dataset, const EpochCallback& on_epoch) {
    config.validate();
    validate_dataset(dataset);
    if (config.input_dim != dataset.feature_dim())
        throw ContractError("train: config input_dim does not match the dataset features");
    if (config.num_classes != static_cast<std::size_t>(dataset.num_classes))
        throw ContractError("train: config num_classes does not match the dataset");
    if (dataset.split.train.empty()) throw ContractError("train: empty training split");

    TrainResult result;
    ModelState state = init_model(config);

    const Evaluation initial = evaluate(state, config, dataset, true);
    result.state = state;
    result.best_val_acc = initial.val_acc;
    result.test_acc_at_best = initial.test_acc;
    result.msig_at_best = initial.msig.value_or(0.0);
    result.smoothness_at_best = initial.smoothness.value_or(0.0);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const Gradients grads = compute_gradients(state, config, dataset, true);
        if (!std::isfinite(grads.task_loss + grads.aux_loss)) throw DivergedError(epoch);

        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = grads.task_loss;
        m.aux_loss = grads.aux_loss;
        m.grad_norms.reserve(state.task_grads.size());
        for (const auto& g : state.task_grads) m.grad_norms.push_back(frobenius_norm(g));

        adam_step(state, grads, config.learning_rate, config.weight_decay);

        const bool steadiness = config.steadiness_every > 0 && epoch % config.steadiness_every == 0;
        const Evaluation e = evaluate(state, config, dataset, steadiness);
        m.train_acc = e.train_acc;
        m.val_acc = e.val_acc;
        m.test_acc = e.test_acc;
        m.msig = e.msig;
        m.smoothness = e.smoothness;

        if (e.val_acc > result.best_val_acc) {
            result.best_val_acc = e.val_acc;
            result.test_acc_at_best = e.test_acc;
            result.best_epoch = epoch;
            result.state = state;
            if (!e.msig) {
                const Evaluation full = evaluate(result.state, config, dataset, true);
                result.msig_at_best = full.msig.value_or(0.0);
                result.smoothness_at_best = full.smoothness.value_or(0.0);
            } else {
                result.msig_at_best = *e.msig;
                result.smoothness_at_best = *e.smoothness;
            }
        }
        if (on_epoch) on_epoch(m);
        result.series.push_back(std::move(m));
    }

    if (state.rank_deficient_events > 0)
        std::clog << "warning: Newton orthogonalization saw a rank-deficient weight " << state.rank_deficient_events
                  << " time(s)\n";
    return result;
}

}  // namespace ogc
