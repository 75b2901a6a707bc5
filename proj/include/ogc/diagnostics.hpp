#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogc/engine.hpp"
#include "ogc/graph.hpp"
#include "ogc/matrix.hpp"

namespace ogc {

// ---------------------------------------------------------------------------
// Steadiness metrics
// ---------------------------------------------------------------------------

struct SignalMagnification {
    double value = 0.0;
    std::size_t excluded_rows = 0;  ///< rows of h0 with zero norm
};

/// Mean over nodes of ‖h_L[i]‖₂ / ‖h_0[i]‖₂, skipping rows where h_0 is zero.
/// Throws DegenerateInputError if every row of h0 is zero.
SignalMagnification signal_magnification_detail(const Matrix& h0, const Matrix& hL);
double signal_magnification(const Matrix& h0, const Matrix& hL);

struct Smoothness {
    double value = 0.0;
    bool sampled = false;
};

/// Exact pairs up to this node count; pair sampling above it.
inline constexpr std::size_t kExactSmoothnessLimit = 2000;
inline constexpr std::size_t kSmoothnessSamples = 1'000'000;

/// D = (1/n²) Σ_i Σ_j ‖h_i − h_j‖₂.
Smoothness graph_smoothness_detail(const Matrix& h, std::uint64_t seed = 0);
double graph_smoothness(const Matrix& h);

/// Per-layer ‖∂L_task/∂W^(l)‖_F from the last backward pass. Throws
/// ContractError when no backward pass has been run since the last update.
std::vector<double> gradient_norms(const ModelState& state);

struct SteadinessReport {
    int depth = 0;
    int epoch = 0;
    double signal_magnification = 0.0;
    std::size_t excluded_rows = 0;
    std::vector<double> grad_norms;
    double smoothness = 0.0;
    bool smoothness_sampled = false;
};

// ---------------------------------------------------------------------------
// Theorem checks
// ---------------------------------------------------------------------------

/// Linear stack H^(k) = Â H^(k−1) W^(k); returns H^(0..L).
std::vector<Matrix> linear_forward(const Graph& graph, const Matrix& x, const std::vector<Matrix>& weights);

/// Reverse-mode gradients of ⟨H^(L), upstream⟩ with respect to every W^(l),
/// through the engine's layer backward with identity activation.
std::vector<Matrix> linear_backprop(const Graph& graph, const Matrix& x, const std::vector<Matrix>& weights,
                                    const Matrix& upstream);

/// ∂L/∂W^(l) = (H^(l−1))ᵀ (Âᵀ)^{L−l+1} G (W^(l+1) ··· W^(L))ᵀ for the linear
/// stack, evaluated literally. `layer` is 1-based.
Matrix theorem1_gradient(const Graph& graph, const Matrix& x, const std::vector<Matrix>& weights,
                         const Matrix& upstream, int layer);

struct Theorem2Report {
    std::size_t dim = 0;
    std::size_t samples = 0;
    double sigma = 1.0;
    double max_mean_dev = 0.0;       ///< max_k |mean(ĥW)_k|
    double mean_tolerance = 0.0;     ///< 4σ/√samples
    double max_cov_dev = 0.0;        ///< max_ij |cov(ĥW)_ij − σ²δ_ij|
    double cov_tolerance = 0.0;      ///< 0.05σ²
    double norm_rel_dev = 0.0;       ///< |‖ĤW‖_F − ‖Ĥ‖_F| / ‖Ĥ‖_F
    double grad_norm_rel_dev = 0.0;  ///< |‖GWᵀ‖_F − ‖G‖_F| / ‖G‖_F
    double norm_tolerance = 1e-10;
    bool mean_ok = false;
    bool cov_ok = false;
    bool norm_ok = false;
    bool grad_norm_ok = false;

    bool passed() const noexcept { return mean_ok && cov_ok && norm_ok && grad_norm_ok; }
};

/// Checks the orthogonal-transformation properties on Gaussian samples
/// ĥ ~ N(0, σ²I) pushed through `w`.
Theorem2Report theorem2_check(const Matrix& w, std::size_t num_samples, double sigma, std::uint64_t seed);
/// Same, with `w` an exactly orthogonal Householder product of dimension d.
Theorem2Report theorem2_check(std::size_t d, std::size_t num_samples, double sigma, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Depth sweep
// ---------------------------------------------------------------------------

enum class Variant { vanilla, ortho, aggregation_only };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// H = Â^steps X.
Matrix propagate(const Graph& graph, const Matrix& x, int steps);

struct ProbeConfig {
    int epochs = 200;
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;
};

/// Softmax-regression probe trained on the train split of `features`;
/// returns test accuracy at the best validation epoch.
double logistic_probe_accuracy(const Matrix& features, const NodeDataset& dataset, const ProbeConfig& cfg);

struct SweepCell {
    int depth = 0;
    Variant variant = Variant::vanilla;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double msig = 0.0;
    double smoothness = 0.0;
    bool ok = true;
    std::string error;
    std::vector<EpochMetrics> series;  ///< empty for aggregation_only
};

struct SweepConfig {
    ModelConfig base;  ///< ortho settings are used by the ortho variant only
    std::vector<int> depths;
    std::vector<Variant> variants;
    std::vector<std::uint64_t> seeds{0};
    int workers = 1;
};

/// Trains (or, for aggregation_only, propagates and probes) every
/// depth × variant × seed cell. Failures are recorded per cell.
std::vector<SweepCell> depth_sweep(const NodeDataset& dataset, const SweepConfig& cfg);

/// ModelConfig for one sweep cell.
ModelConfig variant_config(const ModelConfig& base, Variant variant, int depth, std::uint64_t seed);

}  // namespace ogc
