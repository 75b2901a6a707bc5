#include <algorithm>
#include <cmath>
#include <limits>

#include "ogc/engine.hpp"

namespace ogc {

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "identity") return Activation::identity;
    throw ContractError("unknown activation '" + name + "'");
}

LayerOutput gcn_layer_forward(const Graph& graph, const Matrix& h_prev, const Matrix& w, Activation activation) {
    if (h_prev.cols() != w.rows())
        throw ShapeError("gcn_layer_forward: H is " + std::to_string(h_prev.rows()) + "x" +
                         std::to_string(h_prev.cols()) + " but W has " + std::to_string(w.rows()) + " rows");
    LayerOutput out;
    out.cache.graph = &graph;
    out.cache.aggregated = spmm(graph, h_prev);
    out.cache.weight = w;
    out.cache.pre_activation = matmul(out.cache.aggregated, w);
    out.cache.activation = activation;
    out.h = out.cache.pre_activation;
    if (activation == Activation::relu)
        for (double& v : out.h.values()) v = v > 0.0 ? v : 0.0;
    return out;
}

LayerGrads gcn_layer_backward(const LayerCache& cache, const Matrix& upstream, bool need_input_grad) {
    if (!cache.valid()) throw ContractError("gcn_layer_backward: empty or stale cache");
    if (upstream.rows() != cache.pre_activation.rows() || upstream.cols() != cache.pre_activation.cols())
        throw ContractError("gcn_layer_backward: upstream gradient does not match the cached forward pass");

    Matrix grad_pre = upstream;
    if (cache.activation == Activation::relu) {
        auto g = grad_pre.values();
        auto z = cache.pre_activation.values();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!(z[i] > 0.0)) g[i] = 0.0;
    }

    LayerGrads out;
    out.grad_w = matmul_tn(cache.aggregated, grad_pre);
    if (need_input_grad) {
        // Âᵀ = Â for the symmetric normalization.
        out.grad_h_prev = spmm(*cache.graph, matmul_nt(grad_pre, cache.weight));
        if (!cache.dropout_mask.empty()) out.grad_h_prev = hadamard(out.grad_h_prev, cache.dropout_mask);
    }
    return out;
}

LossResult masked_cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                                const std::vector<std::size_t>& mask) {
    if (mask.empty()) throw ContractError("masked_cross_entropy: empty mask");
    if (labels.size() != logits.rows()) throw ShapeError("masked_cross_entropy: label count != logit rows");

    LossResult out;
    out.grad_logits = Matrix(logits.rows(), logits.cols());
    const double inv = 1.0 / static_cast<double>(mask.size());
    for (std::size_t i : mask) {
        if (i >= logits.rows()) throw ContractError("masked_cross_entropy: mask index out of range");
        const auto row = logits.row(i);
        const auto label = static_cast<std::size_t>(labels[i]);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - mx);
        const double log_z = mx + std::log(sum);
        out.loss += (log_z - row[label]) * inv;
        auto g = out.grad_logits.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) g[k] = std::exp(row[k] - log_z) * inv;
        g[label] -= inv;
    }
    return out;
}

double accuracy(const Matrix& logits, const std::vector<int>& labels, const std::vector<std::size_t>& mask) {
    if (mask.empty()) throw ContractError("accuracy: empty mask");
    std::size_t correct = 0;
    for (std::size_t i : mask) {
        const auto row = logits.row(i);
        // max_element returns the first maximum, i.e. the lowest class index on ties.
        const auto pred = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
        if (pred == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(mask.size());
}

}  // namespace ogc
