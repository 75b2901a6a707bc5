#include <cmath>

#include "ogc/engine.hpp"

namespace ogc {

void adam_update(Matrix& param, const Matrix& grad, AdamMoments& moments, double lr, double weight_decay,
                 std::int64_t step, const AdamHyper& hyper) {
    if (grad.rows() != param.rows() || grad.cols() != param.cols())
        throw ShapeError("adam_update: gradient shape does not match parameter");
    if (moments.m.empty()) {
        moments.m = Matrix(param.rows(), param.cols());
        moments.v = Matrix(param.rows(), param.cols());
    }
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
    auto p = param.values();
    auto g = grad.values();
    auto m = moments.m.values();
    auto v = moments.v.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] + weight_decay * p[i];
        m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * gi;
        v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * gi * gi;
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + hyper.eps);
    }
}

void adam_update(double& param, double grad, ScalarMoments& moments, double lr, double weight_decay,
                 std::int64_t step, const AdamHyper& hyper) {
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
    const double g = grad + weight_decay * param;
    moments.m = hyper.beta1 * moments.m + (1.0 - hyper.beta1) * g;
    moments.v = hyper.beta2 * moments.v + (1.0 - hyper.beta2) * g * g;
    param -= lr * (moments.m / bc1) / (std::sqrt(moments.v / bc2) + hyper.eps);
}

void adam_step(ModelState& state, const Gradients& grads, double lr, double weight_decay) {
    if (grads.raw_weights.size() != state.layers.size() || grads.scales.size() != state.layers.size())
        throw ContractError("adam_step: gradient list does not match the model");
    const std::int64_t step = ++state.step_count;
    for (std::size_t l = 0; l < state.layers.size(); ++l) {
        adam_update(state.layers[l].raw_weight, grads.raw_weights[l], state.weight_moments[l], lr, weight_decay, step);
        adam_update(state.layers[l].scale, grads.scales[l], state.scale_moments[l], lr, 0.0, step);
    }
    state.tape.clear();
    state.task_grads.clear();
}

}  // namespace ogc
