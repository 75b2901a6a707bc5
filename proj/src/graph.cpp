#include <algorithm>
#include <cmath>
#include <string>

#include "ogc/graph.hpp"

namespace ogc {

Graph normalize_adjacency(const EdgeList& edges) {
    const std::size_t n = edges.num_nodes;
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [u, v] : edges.edges) {
        if (u >= n || v >= n)
            throw IngestionError("normalize_adjacency: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                 ") references a node outside [0, " + std::to_string(n) + ")");
        if (u == v) continue;  // the self-loop is added below exactly once
        adj[u].push_back(v);
        adj[v].push_back(u);
    }

    Graph g;
    g.row_offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& nbrs = adj[i];
        nbrs.push_back(i);
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        g.row_offsets_[i + 1] = g.row_offsets_[i] + nbrs.size();
    }

    g.col_indices_.reserve(g.row_offsets_[n]);
    g.values_.reserve(g.row_offsets_[n]);
    for (std::size_t i = 0; i < n; ++i) {
        const double di = static_cast<double>(adj[i].size());
        for (std::size_t j : adj[i]) {
            // di * dj is an exact integer product, so Â(i, j) and Â(j, i) are bitwise equal.
            const double dj = static_cast<double>(adj[j].size());
            g.col_indices_.push_back(j);
            g.values_.push_back(1.0 / std::sqrt(di * dj));
        }
    }
    return g;
}

Matrix Graph::densify() const {
    const std::size_t n = num_nodes();
    Matrix dense(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) dense(i, col_indices_[p]) = values_[p];
    return dense;
}

Matrix spmm(const Graph& graph, const Matrix& h) {
    const std::size_t n = graph.num_nodes();
    if (h.rows() != n)
        throw ShapeError("spmm: graph has " + std::to_string(n) + " nodes but h has " + std::to_string(h.rows()) +
                         " rows");
    const auto offsets = graph.row_offsets();
    const auto cols = graph.col_indices();
    const auto vals = graph.norm_values();
    const std::size_t d = h.cols();
    Matrix out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        double* dst = out.row(i).data();
        for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
            const double w = vals[p];
            const double* src = h.row(cols[p]).data();
            for (std::size_t k = 0; k < d; ++k) dst[k] += w * src[k];
        }
    }
    return out;
}

}  // namespace ogc
