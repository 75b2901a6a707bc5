#pragma once

#include <cstdint>
#include <vector>

#include "ogc/matrix.hpp"

namespace ogc {

/// Orthogonal graph convolution settings for the square hidden layers.
struct OrthoConfig {
    double beta = 0.4;          ///< hybrid-init blend weight on the random component
    int iterations = 4;         ///< Newton iterations T
    double lambda = 1e-4;       ///< regularizer weight
    int penalty_exponent = 2;   ///< 2: λ‖E‖_F², 1: λ‖E‖_F
    bool enabled = false;
    /// Experimental: multiply the effective weight by sqrt(c) in the forward pass.
    bool scale_forward = false;

    void validate() const;
};

/// Trainable state of one layer: raw weight Q, trainable scale c and the
/// effective weight W derived from Q on every forward pass.
struct OrthoLayerParams {
    Matrix raw_weight;
    double scale = 1.0;
    Matrix effective;
};

/// Glorot-uniform sample in ±sqrt(6 / (d_in + d_out)).
Matrix glorot_uniform(std::size_t d_in, std::size_t d_out, std::uint64_t seed);

/// beta * glorot_uniform(d_in, d_out, seed) + (1 − beta) * partial identity.
Matrix hybrid_init(std::size_t d_in, std::size_t d_out, double beta, std::uint64_t seed);

/// Q / ‖Q‖_F. Throws DegenerateWeightError for a zero matrix.
Matrix spectral_bound(const Matrix& q);
/// Adjoint of spectral_bound: maps dL/dQ̂ to dL/dQ.
Matrix spectral_bound_backward(const Matrix& q, const Matrix& grad_q_hat);

struct NewtonResult {
    Matrix weight;                 ///< W = B_T Q̂
    std::vector<double> residuals; ///< residuals[t] = ‖B_t² M − I‖_F for t = 0..T
    bool rank_deficient = false;   ///< smallest eigenvalue estimate of M below 1e-10
};

/// Newton iteration for M^{-1/2} with M = Q̂Q̂ᵀ: B_0 = I,
/// B_t = (3 B_{t−1} − B_{t−1}³ M) / 2, W = B_T Q̂. `iterations` may be 0.
/// Evaluated through the equivalent coupled pair (B_t, M B_t), which stays
/// accurate for large T where the direct recurrence amplifies rounding.
NewtonResult newton_orthogonalize(const Matrix& q_hat, int iterations);

/// Reverse-mode derivative of Q̂ ↦ B_T(Q̂) Q̂, replaying the iterations.
Matrix newton_orthogonalize_backward(const Matrix& q_hat, int iterations, const Matrix& grad_w);

/// True when the layer receives the orthogonal transformation and regularizer.
inline bool applies_ortho(const OrthoConfig& cfg, const Matrix& q) { return cfg.enabled && q.is_square(); }

/// W for the forward pass: Q passes through unless applies_ortho(cfg, Q).
Matrix effective_weight(const OrthoLayerParams& params, const OrthoConfig& cfg);

/// Chain dL/dW back to dL/dQ through effective_weight.
Matrix effective_weight_backward(const OrthoLayerParams& params, const OrthoConfig& cfg, const Matrix& grad_w);

struct RegularizerResult {
    double loss = 0.0;
    std::vector<Matrix> grads_w;   ///< w.r.t. each layer's effective weight
    std::vector<double> grads_c;
};

/// λ Σ_l ‖W_l W_lᵀ − c_l I‖_F^p for p = penalty_exponent over the given layers'
/// effective weights. With p = 1 the gradient at E = 0 is taken as 0.
RegularizerResult ortho_regularizer(const std::vector<const OrthoLayerParams*>& layers, double lambda,
                                    int penalty_exponent);

}  // namespace ogc
