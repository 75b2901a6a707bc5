#pragma once

#include <cmath>
#include <functional>

#include "ogc/graph.hpp"
#include "ogc/matrix.hpp"

namespace ogc::test_support {

/// Erdős–Rényi edge set on n nodes.
inline EdgeList random_edges(std::size_t n, double p, Rng& rng) {
    std::bernoulli_distribution coin(p);
    EdgeList e;
    e.num_nodes = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (coin(rng)) e.edges.emplace_back(i, j);
    return e;
}

inline Graph random_graph(std::size_t n, double p, Rng& rng) { return normalize_adjacency(random_edges(n, p, rng)); }

inline Graph path_graph(std::size_t n) {
    EdgeList e;
    e.num_nodes = n;
    for (std::size_t i = 0; i + 1 < n; ++i) e.edges.emplace_back(i, i + 1);
    return normalize_adjacency(e);
}

/// Central differences of `f` with respect to every entry of `param`.
inline Matrix central_difference(Matrix& param, const std::function<double()>& f, double step) {
    Matrix grad(param.rows(), param.cols());
    for (std::size_t i = 0; i < param.rows(); ++i) {
        for (std::size_t j = 0; j < param.cols(); ++j) {
            const double saved = param(i, j);
            param(i, j) = saved + step;
            const double up = f();
            param(i, j) = saved - step;
            const double down = f();
            param(i, j) = saved;
            grad(i, j) = (up - down) / (2.0 * step);
        }
    }
    return grad;
}

inline double central_difference(double& param, const std::function<double()>& f, double step) {
    const double saved = param;
    param = saved + step;
    const double up = f();
    param = saved - step;
    const double down = f();
    param = saved;
    return (up - down) / (2.0 * step);
}

inline double orthogonality_error(const Matrix& w) {
    return frobenius_norm(matmul_nt(w, w) - Matrix::identity(w.rows()));
}

}  // namespace ogc::test_support
