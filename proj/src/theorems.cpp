#include <cmath>
#include <string>

#include "ogc/diagnostics.hpp"

namespace ogc {

std::vector<Matrix> linear_forward(const Graph& graph, const Matrix& x, const std::vector<Matrix>& weights) {
    std::vector<Matrix> h;
    h.reserve(weights.size() + 1);
    h.push_back(x);
    for (const auto& w : weights) h.push_back(matmul(spmm(graph, h.back()), w));
    return h;
}

std::vector<Matrix> linear_backprop(const Graph& graph, const Matrix& x, const std::vector<Matrix>& weights,
                                    const Matrix& upstream) {
    std::vector<LayerCache> tape;
    tape.reserve(weights.size());
    Matrix h = x;
    for (const auto& w : weights) {
        auto out = gcn_layer_forward(graph, h, w, Activation::identity);
        tape.push_back(std::move(out.cache));
        h = std::move(out.h);
    }
    std::vector<Matrix> grads(weights.size());
    Matrix up = upstream;
    for (std::size_t l = weights.size(); l-- > 0;) {
        auto g = gcn_layer_backward(tape[l], up, l > 0);
        grads[l] = std::move(g.grad_w);
        up = std::move(g.grad_h_prev);
    }
    return grads;
}

Matrix theorem1_gradient(const Graph& graph, const Matrix& x, const std::vector<Matrix>& weights,
                         const Matrix& upstream, int layer) {
    const int L = static_cast<int>(weights.size());
    if (layer < 1 || layer > L)
        throw ContractError("theorem1_gradient: layer " + std::to_string(layer) + " outside [1, " +
                            std::to_string(L) + "]");
    const auto h = linear_forward(graph, x, weights);
    if (upstream.rows() != h.back().rows() || upstream.cols() != h.back().cols())
        throw ShapeError("theorem1_gradient: upstream gradient does not match H^(L)");

    const Matrix a_t = graph.densify().transposed();
    Matrix propagated = upstream;
    for (int k = 0; k < L - layer + 1; ++k) propagated = matmul(a_t, propagated);

    const auto l = static_cast<std::size_t>(layer);
    Matrix trailing = Matrix::identity(weights[l - 1].cols());
    for (std::size_t k = l; k < weights.size(); ++k) trailing = matmul(trailing, weights[k]);

    return matmul(matmul_tn(h[l - 1], propagated), trailing.transposed());
}

Theorem2Report theorem2_check(const Matrix& w, std::size_t num_samples, double sigma, std::uint64_t seed) {
    if (!w.is_square() || w.rows() < 2) throw ContractError("theorem2_check: W must be square with d >= 2");
    if (num_samples < 2) throw ContractError("theorem2_check: need at least two samples");
    const std::size_t d = w.rows();
    Rng rng(seed);

    Theorem2Report r;
    r.dim = d;
    r.samples = num_samples;
    r.sigma = sigma;
    r.mean_tolerance = 4.0 * sigma / std::sqrt(static_cast<double>(num_samples));
    r.cov_tolerance = 0.05 * sigma * sigma;

    const Matrix h_hat = random_normal(num_samples, d, sigma, rng);
    const Matrix h = matmul(h_hat, w);

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < num_samples; ++i)
        for (std::size_t k = 0; k < d; ++k) mean[k] += h(i, k);
    for (double& m : mean) {
        m /= static_cast<double>(num_samples);
        r.max_mean_dev = std::max(r.max_mean_dev, std::abs(m));
    }

    Matrix centered = h;
    for (std::size_t i = 0; i < num_samples; ++i)
        for (std::size_t k = 0; k < d; ++k) centered(i, k) -= mean[k];
    Matrix cov = matmul_tn(centered, centered);
    cov *= 1.0 / static_cast<double>(num_samples - 1);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            r.max_cov_dev = std::max(r.max_cov_dev, std::abs(cov(i, j) - (i == j ? sigma * sigma : 0.0)));

    const double n_hat = frobenius_norm(h_hat);
    r.norm_rel_dev = std::abs(frobenius_norm(h) - n_hat) / n_hat;

    const Matrix g = random_normal(num_samples, d, 1.0, rng);
    const double n_g = frobenius_norm(g);
    r.grad_norm_rel_dev = std::abs(frobenius_norm(matmul_nt(g, w)) - n_g) / n_g;

    r.mean_ok = r.max_mean_dev <= r.mean_tolerance;
    r.cov_ok = r.max_cov_dev <= r.cov_tolerance;
    r.norm_ok = r.norm_rel_dev <= r.norm_tolerance;
    r.grad_norm_ok = r.grad_norm_rel_dev <= r.norm_tolerance;
    return r;
}

Theorem2Report theorem2_check(std::size_t d, std::size_t num_samples, double sigma, std::uint64_t seed) {
    if (d < 2) throw ContractError("theorem2_check: d must be >= 2");
    Rng rng(derive_seed(seed, 0x7e02));
    const Matrix w = householder_orthogonal(d, d, rng);
    return theorem2_check(w, num_samples, sigma, seed);
}

}  // namespace ogc
