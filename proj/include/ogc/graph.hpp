#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ogc/matrix.hpp"

namespace ogc {

/// Raw (possibly directed, possibly duplicated) edge set over nodes [0, num_nodes).
struct EdgeList {
    std::size_t num_nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Self-loop-augmented, symmetrically normalized adjacency Â = D̃^{-1/2}(A + I)D̃^{-1/2}
/// in CSR form. Column indices within a row are sorted ascending and contain
/// the diagonal exactly once.
class Graph {
public:
    Graph() = default;

    std::size_t num_nodes() const noexcept { return row_offsets_.empty() ? 0 : row_offsets_.size() - 1; }
    /// Undirected edges excluding self-loops.
    std::size_t num_edges() const noexcept { return (col_indices_.size() - num_nodes()) / 2; }
    std::size_t nnz() const noexcept { return col_indices_.size(); }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
    std::span<const double> norm_values() const noexcept { return values_; }
    /// Self-loop-augmented degree d̃_i = deg_i + 1.
    std::size_t augmented_degree(std::size_t node) const { return row_offsets_[node + 1] - row_offsets_[node]; }

    /// Â as a dense n x n matrix. Intended for oracles and small graphs.
    Matrix densify() const;

    friend Graph normalize_adjacency(const EdgeList& edges);

private:
    std::vector<std::size_t> row_offsets_;
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

/// Symmetrize, deduplicate, add one self-loop per node and normalize.
/// Throws IngestionError for node ids outside [0, num_nodes).
Graph normalize_adjacency(const EdgeList& edges);

/// Â * h. Throws ShapeError if h.rows() != num_nodes.
Matrix spmm(const Graph& graph, const Matrix& h);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Throws SplitError if any index is >= n or appears in two lists (or twice in one).
void validate_split(const Split& split, std::size_t n);

struct NodeDataset {
    Graph graph;
    Matrix features;                 ///< n x d
    std::vector<int> labels;         ///< length n, values in [0, num_classes)
    int num_classes = 0;
    std::vector<std::string> class_names;  ///< optional, index = class id
    Split split;
    std::size_t dropped_edges = 0;   ///< ingestion-time drops (unknown ids)

    std::size_t num_nodes() const noexcept { return graph.num_nodes(); }
    std::size_t feature_dim() const noexcept { return features.cols(); }
};

/// Throws ContractError if labels, features and split do not agree with the graph.
void validate_dataset(const NodeDataset& ds);

/// "src dst" per line (tab or space separated), 0-based. Lines starting with
/// '#' are comments; a comment of the form "# n=<count>" declares the node
/// count, otherwise it is max id + 1.
EdgeList load_edge_list(const std::filesystem::path& path);
EdgeList parse_edge_list(const std::string& text);

/// Citation-network distribution format: `content` rows are
/// "id<TAB>f_1 ... f_d<TAB>label", `cites` rows are "cited<TAB>citing".
/// Citations naming unknown ids are dropped and counted in `dropped_edges`.
NodeDataset load_cora_format(const std::filesystem::path& content_path, const std::filesystem::path& cites_path);
NodeDataset parse_cora_format(const std::string& content, const std::string& cites);

/// JSON object with integer arrays "train", "val", "test".
Split load_splits(const std::filesystem::path& path, std::size_t n);
Split parse_splits(const std::string& json_text, std::size_t n);

/// `per_class` training nodes per class, then `num_val` and `num_test` nodes
/// drawn from the remainder, all by a seeded shuffle.
Split random_class_split(const std::vector<int>& labels, int num_classes, std::size_t per_class,
                         std::size_t num_val, std::size_t num_test, std::uint64_t seed);

/// Scale every feature row to unit L1 norm; all-zero rows are left untouched.
void row_normalize_features(Matrix& features);

/// Synthetic stochastic-block-model node-classification benchmark with
/// binary bag-of-words features, used when a real citation dataset is absent.
struct SbmConfig {
    std::size_t num_nodes = 500;
    int num_classes = 5;
    std::size_t feature_dim = 200;
    double p_in = 0.03;             ///< intra-class edge probability
    double p_out = 0.002;           ///< inter-class edge probability
    std::size_t words_per_node = 12;
    double topic_word_prob = 0.35;  ///< chance a word comes from the class vocabulary
    std::size_t train_per_class = 20;
    std::size_t num_val = 100;
    std::size_t num_test = 200;
    std::uint64_t seed = 0;
};

NodeDataset make_sbm_dataset(const SbmConfig& cfg);

}  // namespace ogc
