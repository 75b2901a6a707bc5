#include <cmath>
#include <string>

#include "ogc/ortho.hpp"

namespace ogc {

void OrthoConfig::validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ContractError("ortho: beta must lie in [0, 1]");
    if (iterations < 0) throw ContractError("ortho: iterations must be non-negative");
    if (!(lambda >= 0.0)) throw ContractError("ortho: lambda must be >= 0");
    if (penalty_exponent != 1 && penalty_exponent != 2) throw ContractError("ortho: penalty_exponent must be 1 or 2");
}

Matrix glorot_uniform(std::size_t d_in, std::size_t d_out, std::uint64_t seed) {
    Rng rng(seed);
    const double limit = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
    return random_uniform(d_in, d_out, -limit, limit, rng);
}

Matrix hybrid_init(std::size_t d_in, std::size_t d_out, double beta, std::uint64_t seed) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ContractError("hybrid_init: beta must lie in [0, 1]");
    Matrix q = glorot_uniform(d_in, d_out, seed);
    q *= beta;
    q.add_scaled(Matrix::partial_identity(d_in, d_out), 1.0 - beta);
    return q;
}

Matrix spectral_bound(const Matrix& q) {
    const double norm = frobenius_norm(q);
    if (norm == 0.0) throw DegenerateWeightError("spectral_bound: weight has zero Frobenius norm");
    return q * (1.0 / norm);
}

Matrix spectral_bound_backward(const Matrix& q, const Matrix& grad_q_hat) {
    const double norm = frobenius_norm(q);
    if (norm == 0.0) throw DegenerateWeightError("spectral_bound: weight has zero Frobenius norm");
    const Matrix q_hat = q * (1.0 / norm);
    Matrix g = grad_q_hat;
    g.add_scaled(q_hat, -dot(q_hat, grad_q_hat));
    return g *= 1.0 / norm;
}

namespace {

double newton_residual(const Matrix& b, const Matrix& m) {
    Matrix r = matmul(matmul(b, b), m);
    for (std::size_t i = 0; i < r.rows(); ++i) r(i, i) -= 1.0;
    return frobenius_norm(r);
}

// Smallest eigenvalue of a PSD M with spectrum in [0, 1], estimated as
// 1 − (top eigenvalue of I − M) by a fixed-seed power iteration.
double min_eigenvalue_estimate(const Matrix& m) {
    Matrix shifted = m * -1.0;
    for (std::size_t i = 0; i < m.rows(); ++i) shifted(i, i) += 1.0;
    const double top = spectral_norm_estimate(shifted, 100, 0x5eed);
    return 1.0 - top;
}

// Coupled form of B_t = (3 B − B³ M) / 2: Z_t = B_t and Y_t = M B_t, both
// polynomials in M, so the pair reproduces B_t exactly in exact arithmetic.
// Evaluating B³M directly lets non-commuting rounding errors grow by up to
// κ(M)/2 per step; the coupled update does not.
struct NewtonIterates {
    std::vector<Matrix> y;
    std::vector<Matrix> z;
    std::vector<Matrix> s;  ///< s[t] = 3I − Z_{t−1} Y_{t−1}, used by step t
};

NewtonIterates newton_iterates(const Matrix& m, int iterations) {
    NewtonIterates it;
    const auto n = static_cast<std::size_t>(iterations) + 1;
    it.y.reserve(n);
    it.z.reserve(n);
    it.s.reserve(n);
    it.y.push_back(m);
    it.z.push_back(Matrix::identity(m.rows()));
    it.s.emplace_back();
    for (int t = 1; t <= iterations; ++t) {
        Matrix s = matmul(it.z.back(), it.y.back()) * -1.0;
        for (std::size_t i = 0; i < s.rows(); ++i) s(i, i) += 3.0;
        it.y.push_back(matmul(it.y.back(), s) * 0.5);
        it.z.push_back(matmul(s, it.z.back()) * 0.5);
        it.s.push_back(std::move(s));
    }
    return it;
}

}  // namespace

NewtonResult newton_orthogonalize(const Matrix& q_hat, int iterations) {
    if (iterations < 0) throw ContractError("newton_orthogonalize: iterations must be >= 0");
    const Matrix m = matmul_nt(q_hat, q_hat);
    const auto it = newton_iterates(m, iterations);

    NewtonResult out;
    out.residuals.reserve(it.z.size());
    for (const auto& bt : it.z) out.residuals.push_back(newton_residual(bt, m));
    out.weight = matmul(it.z.back(), q_hat);
    out.rank_deficient = m.rows() > 0 && min_eigenvalue_estimate(m) < 1e-10;
    return out;
}

Matrix newton_orthogonalize_backward(const Matrix& q_hat, int iterations, const Matrix& grad_w) {
    if (iterations < 0) throw ContractError("newton_orthogonalize_backward: iterations must be >= 0");
    if (grad_w.rows() != q_hat.rows() || grad_w.cols() != q_hat.cols())
        throw ShapeError("newton_orthogonalize_backward: gradient shape does not match Q̂");
    if (iterations == 0) return grad_w;

    const Matrix m = matmul_nt(q_hat, q_hat);
    const auto it = newton_iterates(m, iterations);

    // W = Z_T Q̂
    Matrix grad_z = matmul_nt(grad_w, q_hat);
    Matrix grad_q = matmul_tn(it.z.back(), grad_w);
    Matrix grad_y(m.rows(), m.cols());

    // Step t: S = 3I − Z Y, Y' = Y S / 2, Z' = S Z / 2 with (Y, Z) from step t − 1.
    for (int t = iterations; t >= 1; --t) {
        const auto k = static_cast<std::size_t>(t);
        const Matrix& y = it.y[k - 1];
        const Matrix& z = it.z[k - 1];
        const Matrix& s = it.s[k];
        Matrix grad_s = matmul_tn(y, grad_y) * 0.5;
        grad_s.add_scaled(matmul_nt(grad_z, z), 0.5);
        Matrix next_y = matmul_nt(grad_y, s) * 0.5;
        Matrix next_z = matmul_tn(s, grad_z) * 0.5;
        // dS = −(dZ Y + Z dY)
        next_z.add_scaled(matmul_nt(grad_s, y), -1.0);
        next_y.add_scaled(matmul_tn(z, grad_s), -1.0);
        grad_y = std::move(next_y);
        grad_z = std::move(next_z);
    }

    // Y_0 = M = Q̂ Q̂ᵀ; Z_0 = I is constant.
    grad_q += matmul(grad_y + grad_y.transposed(), q_hat);
    return grad_q;
}

Matrix effective_weight(const OrthoLayerParams& params, const OrthoConfig& cfg) {
    if (!applies_ortho(cfg, params.raw_weight)) return params.raw_weight;
    Matrix w = newton_orthogonalize(spectral_bound(params.raw_weight), cfg.iterations).weight;
    if (cfg.scale_forward) w *= std::sqrt(std::max(params.scale, 0.0));
    return w;
}

Matrix effective_weight_backward(const OrthoLayerParams& params, const OrthoConfig& cfg, const Matrix& grad_w) {
    if (!applies_ortho(cfg, params.raw_weight)) return grad_w;
    const Matrix q_hat = spectral_bound(params.raw_weight);
    Matrix g = grad_w;
    if (cfg.scale_forward) g *= std::sqrt(std::max(params.scale, 0.0));
    return spectral_bound_backward(params.raw_weight, newton_orthogonalize_backward(q_hat, cfg.iterations, g));
}

RegularizerResult ortho_regularizer(const std::vector<const OrthoLayerParams*>& layers, double lambda,
                                    int penalty_exponent) {
    if (!(lambda >= 0.0)) throw ContractError("ortho_regularizer: lambda must be >= 0");
    if (penalty_exponent != 1 && penalty_exponent != 2)
        throw ContractError("ortho_regularizer: penalty_exponent must be 1 or 2");

    RegularizerResult out;
    for (const OrthoLayerParams* layer : layers) {
        const Matrix& w = layer->effective;
        if (!w.is_square()) throw ShapeError("ortho_regularizer: effective weight must be square");
        Matrix e = matmul_nt(w, w);
        for (std::size_t i = 0; i < e.rows(); ++i) e(i, i) -= layer->scale;
        const double norm = frobenius_norm(e);

        Matrix grad_w = matmul(e, w) * (4.0 * lambda);
        double grad_c = -2.0 * lambda * trace(e);
        if (penalty_exponent == 2) {
            out.loss += lambda * norm * norm;
        } else {
            out.loss += lambda * norm;
            const double s = norm > 0.0 ? 1.0 / (2.0 * norm) : 0.0;
            grad_w *= s;
            grad_c *= s;
        }
        out.grads_w.push_back(std::move(grad_w));
        out.grads_c.push_back(grad_c);
    }
    return out;
}

}  // namespace ogc
