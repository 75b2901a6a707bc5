#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ogc/graph.hpp"
#include "ogc/matrix.hpp"
#include "ogc/ortho.hpp"

namespace ogc {

enum class Activation { relu, identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// ---------------------------------------------------------------------------
// Single GCN layer: H = σ(Â H_prev W)
// ---------------------------------------------------------------------------

struct LayerCache {
    const Graph* graph = nullptr;
    Matrix aggregated;     ///< Ĥ = Â H_prev
    Matrix weight;         ///< W used in the forward pass
    Matrix pre_activation; ///< Ĥ W
    Activation activation = Activation::identity;
    Matrix dropout_mask;   ///< scaled keep mask applied to H_prev; empty when off

    bool valid() const noexcept { return graph != nullptr && !aggregated.empty(); }
};

struct LayerOutput {
    Matrix h;
    LayerCache cache;
};

struct LayerGrads {
    Matrix grad_h_prev;  ///< empty when not requested
    Matrix grad_w;
};

LayerOutput gcn_layer_forward(const Graph& graph, const Matrix& h_prev, const Matrix& w, Activation activation);

/// Adjoint of gcn_layer_forward. Uses Âᵀ = Â. Throws ContractError when the
/// cache is empty or does not match `upstream`.
LayerGrads gcn_layer_backward(const LayerCache& cache, const Matrix& upstream, bool need_input_grad = true);

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct ModelConfig {
    int num_layers = 2;
    std::size_t hidden_dim = 64;
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    Activation activation = Activation::relu;
    OrthoConfig ortho;
    double learning_rate = 0.01;
    double weight_decay = 5e-4;
    double dropout_rate = 0.0;
    int epochs = 200;
    std::uint64_t seed = 0;
    /// Record msig and smoothness every this many epochs (0 disables them).
    int steadiness_every = 1;

    void validate() const;
    /// (d_in, d_out) of layer l (0-based).
    std::pair<std::size_t, std::size_t> layer_shape(int l) const;
};

struct AdamMoments {
    Matrix m;
    Matrix v;
};

struct ScalarMoments {
    double m = 0.0;
    double v = 0.0;
};

struct ModelState {
    std::vector<OrthoLayerParams> layers;
    std::vector<AdamMoments> weight_moments;
    std::vector<ScalarMoments> scale_moments;
    std::int64_t step_count = 0;
    std::int64_t train_forward_count = 0;  ///< advances the dropout stream
    std::vector<LayerCache> tape;
    /// Task-loss gradient w.r.t. each effective weight from the last backward pass.
    std::vector<Matrix> task_grads;
    std::size_t rank_deficient_events = 0;
};

/// Layers per ModelConfig: d→hidden, (L−2)×hidden→hidden, hidden→classes
/// (a single d→classes layer when L = 1). Square layers under an enabled
/// ortho config start from hybrid_init, all others from Glorot-uniform.
ModelState init_model(const ModelConfig& config);

/// Logits of the full stack. Refreshes every layer's effective weight and
/// fills the tape. Dropout is applied to each layer input only in train_mode.
Matrix model_forward(ModelState& state, const ModelConfig& config, const NodeDataset& dataset, bool train_mode);

struct LossResult {
    double loss = 0.0;
    Matrix grad_logits;
};

/// Mean over `mask` of −log softmax(logits)[label]. Throws ContractError on an empty mask.
LossResult masked_cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                                const std::vector<std::size_t>& mask);

/// Fraction of masked rows whose argmax (lowest index on ties) equals the label.
double accuracy(const Matrix& logits, const std::vector<int>& labels, const std::vector<std::size_t>& mask);

/// Backpropagate dL/dlogits through the tape. Stores and returns the task
/// gradients with respect to each layer's effective weight.
const std::vector<Matrix>& model_backward(ModelState& state, const Matrix& grad_logits);

struct Gradients {
    std::vector<Matrix> raw_weights;  ///< dL/dQ per layer
    std::vector<double> scales;       ///< dL/dc per layer (0 for non-ortho layers)
    double task_loss = 0.0;
    double aux_loss = 0.0;
};

/// Forward, loss (task + regularizer) and full backward down to the raw
/// weights Q and scales c. Leaves the tape and task gradients populated.
Gradients compute_gradients(ModelState& state, const ModelConfig& config, const NodeDataset& dataset,
                            bool train_mode = true);

/// Total loss only (task + regularizer) for the current parameters; used by
/// finite-difference checks.
double total_loss(ModelState& state, const ModelConfig& config, const NodeDataset& dataset);

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One Adam update of `param` with L2 weight decay folded into the gradient.
/// `step` is the 1-based step index used for bias correction.
void adam_update(Matrix& param, const Matrix& grad, AdamMoments& moments, double lr, double weight_decay,
                 std::int64_t step, const AdamHyper& hyper = {});
void adam_update(double& param, double grad, ScalarMoments& moments, double lr, double weight_decay,
                 std::int64_t step, const AdamHyper& hyper = {});

/// Adam step over all raw weights and scales; weight decay applies to the
/// raw weights only. Clears the tape and stored task gradients.
void adam_step(ModelState& state, const Gradients& grads, double lr, double weight_decay);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double aux_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    std::vector<double> grad_norms;  ///< ‖∂L_task/∂W^(l)‖_F, layer 1 first
    std::optional<double> msig;
    std::optional<double> smoothness;
};

struct TrainResult {
    ModelState state;  ///< parameters with the best validation accuracy
    std::vector<EpochMetrics> series;
    int best_epoch = 0;  ///< 0 = initial parameters
    double best_val_acc = 0.0;
    double test_acc_at_best = 0.0;
    double msig_at_best = 0.0;
    double smoothness_at_best = 0.0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Full-batch training with Adam. Throws DivergedError on a non-finite loss.
TrainResult train(const ModelConfig& config, const NodeDataset& dataset, const EpochCallback& on_epoch = {});

}  // namespace ogc
