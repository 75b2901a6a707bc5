#include <cmath>

#include "ogc/engine.hpp"

namespace ogc {

void ModelConfig::validate() const {
    if (num_layers < 1) throw ContractError("model: num_layers must be >= 1");
    if (hidden_dim == 0 || input_dim == 0 || num_classes == 0)
        throw ContractError("model: hidden_dim, input_dim and num_classes must be positive");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ContractError("model: dropout_rate must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw ContractError("model: learning_rate must be positive");
    if (!(weight_decay >= 0.0)) throw ContractError("model: weight_decay must be >= 0");
    if (epochs < 0) throw ContractError("model: epochs must be >= 0");
    ortho.validate();
}

std::pair<std::size_t, std::size_t> ModelConfig::layer_shape(int l) const {
    const std::size_t d_in = l == 0 ? input_dim : hidden_dim;
    const std::size_t d_out = l == num_layers - 1 ? num_classes : hidden_dim;
    return {d_in, d_out};
}

ModelState init_model(const ModelConfig& config) {
    config.validate();
    ModelState state;
    for (int l = 0; l < config.num_layers; ++l) {
        const auto [d_in, d_out] = config.layer_shape(l);
        const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(l));
        OrthoLayerParams p;
        p.raw_weight = config.ortho.enabled && d_in == d_out ? hybrid_init(d_in, d_out, config.ortho.beta, seed)
                                                             : glorot_uniform(d_in, d_out, seed);
        p.scale = 1.0;
        state.layers.push_back(std::move(p));
        state.weight_moments.push_back({Matrix(d_in, d_out), Matrix(d_in, d_out)});
        state.scale_moments.push_back({});
    }
    return state;
}

namespace {

Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::uint64_t seed) {
    Rng rng(seed);
    std::bernoulli_distribution keep(1.0 - rate);
    const double scale = 1.0 / (1.0 - rate);
    Matrix mask(rows, cols);
    for (double& v : mask.values()) v = keep(rng) ? scale : 0.0;
    return mask;
}

}  // namespace

Matrix model_forward(ModelState& state, const ModelConfig& config, const NodeDataset& dataset, bool train_mode) {
    if (state.layers.size() != static_cast<std::size_t>(config.num_layers))
        throw ContractError("model_forward: state does not match config");
    state.tape.clear();
    state.task_grads.clear();
    const bool use_dropout = train_mode && config.dropout_rate > 0.0;
    if (train_mode) ++state.train_forward_count;

    Matrix h = dataset.features;
    for (int l = 0; l < config.num_layers; ++l) {
        auto& layer = state.layers[static_cast<std::size_t>(l)];
        if (applies_ortho(config.ortho, layer.raw_weight)) {
            const auto newton = newton_orthogonalize(spectral_bound(layer.raw_weight), config.ortho.iterations);
            if (newton.rank_deficient) ++state.rank_deficient_events;
            layer.effective = newton.weight;
            if (config.ortho.scale_forward) layer.effective *= std::sqrt(std::max(layer.scale, 0.0));
        } else {
            layer.effective = layer.raw_weight;
        }

        Matrix mask;
        if (use_dropout) {
            const std::uint64_t s = derive_seed(derive_seed(config.seed, 1000 + static_cast<std::uint64_t>(l)),
                                                static_cast<std::uint64_t>(state.train_forward_count));
            mask = dropout_mask(h.rows(), h.cols(), config.dropout_rate, s);
            h = hadamard(h, mask);
        }
        const bool last = l == config.num_layers - 1;
        auto out = gcn_layer_forward(dataset.graph, h, layer.effective, last ? Activation::identity : config.activation);
        out.cache.dropout_mask = std::move(mask);
        state.tape.push_back(std::move(out.cache));
        h = std::move(out.h);
    }
    return h;
}

const std::vector<Matrix>& model_backward(ModelState& state, const Matrix& grad_logits) {
    if (state.tape.size() != state.layers.size())
        throw ContractError("model_backward: no forward pass recorded since the last update");
    const std::size_t L = state.tape.size();
    state.task_grads.assign(L, Matrix());
    Matrix upstream = grad_logits;
    for (std::size_t l = L; l-- > 0;) {
        auto g = gcn_layer_backward(state.tape[l], upstream, l > 0);
        state.task_grads[l] = std::move(g.grad_w);
        upstream = std::move(g.grad_h_prev);
    }
    return state.task_grads;
}

namespace {

std::vector<std::size_t> ortho_layer_indices(const ModelState& state, const ModelConfig& config) {
    std::vector<std::size_t> idx;
    for (std::size_t l = 0; l < state.layers.size(); ++l)
        if (applies_ortho(config.ortho, state.layers[l].raw_weight)) idx.push_back(l);
    return idx;
}

RegularizerResult regularize(const ModelState& state, const ModelConfig& config,
                             const std::vector<std::size_t>& idx) {
    std::vector<const OrthoLayerParams*> layers;
    for (std::size_t l : idx) layers.push_back(&state.layers[l]);
    return ortho_regularizer(layers, config.ortho.lambda, config.ortho.penalty_exponent);
}

}  // namespace

Gradients compute_gradients(ModelState& state, const ModelConfig& config, const NodeDataset& dataset,
                            bool train_mode) {
    const Matrix logits = model_forward(state, config, dataset, train_mode);
    const auto loss = masked_cross_entropy(logits, dataset.labels, dataset.split.train);
    const auto idx = ortho_layer_indices(state, config);
    const auto reg = regularize(state, config, idx);

    Gradients out;
    out.task_loss = loss.loss;
    out.aux_loss = reg.loss;
    out.scales.assign(state.layers.size(), 0.0);

    std::vector<Matrix> grad_w = model_backward(state, loss.grad_logits);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        grad_w[idx[k]] += reg.grads_w[k];
        out.scales[idx[k]] += reg.grads_c[k];
    }

    out.raw_weights.reserve(state.layers.size());
    for (std::size_t l = 0; l < state.layers.size(); ++l) {
        const auto& layer = state.layers[l];
        if (config.ortho.scale_forward && applies_ortho(config.ortho, layer.raw_weight) && layer.scale > 0.0)
            out.scales[l] += dot(grad_w[l], layer.effective) / (2.0 * layer.scale);
        out.raw_weights.push_back(effective_weight_backward(layer, config.ortho, grad_w[l]));
    }
    return out;
}

double total_loss(ModelState& state, const ModelConfig& config, const NodeDataset& dataset) {
    const Matrix logits = model_forward(state, config, dataset, false);
    const double task = masked_cross_entropy(logits, dataset.labels, dataset.split.train).loss;
    return task + regularize(state, config, ortho_layer_indices(state, config)).loss;
}

}  // namespace ogc
