#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ogc/matrix.hpp"

namespace ogc {

namespace {

std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v) {
    std::vector<double> out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < m.cols(); ++k) s += m(i, k) * v[k];
        out[i] = s;
    }
    return out;
}

std::vector<double> mat_t_vec(const Matrix& m, const std::vector<double>& v) {
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t k = 0; k < m.cols(); ++k) out[k] += m(i, k) * v[i];
    return out;
}

double norm2(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

double spectral_norm_estimate(const Matrix& m, int iters, std::uint64_t seed) {
    if (!m.is_square())
        throw ShapeError("spectral_norm_estimate: matrix must be square, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    if (iters <= 0) throw ContractError("spectral_norm_estimate: iters must be positive");
    if (m.empty()) return 0.0;

    Rng rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(m.cols());
    for (double& x : v) x = dist(rng);
    double n = norm2(v);
    for (double& x : v) x /= n;

    double sigma = 0.0;
    for (int it = 0; it < iters; ++it) {
        const auto mv = mat_vec(m, v);
        sigma = norm2(mv);  // Rayleigh quotient sqrt(vᵀ mᵀm v) for unit v
        auto w = mat_t_vec(m, mv);
        n = norm2(w);
        if (n == 0.0) return 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = w[k] / n;
    }
    return std::max(sigma, norm2(mat_vec(m, v)));
}

SymEig symeig_oracle(const Matrix& m) {
    if (!m.is_square()) throw ShapeError("symeig_oracle: matrix must be square");
    const std::size_t d = m.rows();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-10)
                throw ContractError("symeig_oracle: matrix is not symmetric at (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");

    Matrix a = m;
    // Symmetrize exactly so rotations see a consistent pair.
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));
    Matrix v = Matrix::identity(d);

    const double scale = std::max(frobenius_norm(a), 1e-300);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= 1e-15 * scale) break;

        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymEig out;
    out.values.resize(d);
    out.vectors = Matrix(d, d);
    for (std::size_t k = 0; k < d; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < d; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

Matrix inverse_sqrt_oracle(const Matrix& m, double eps) {
    const SymEig eig = symeig_oracle(m);
    const std::size_t d = m.rows();
    std::vector<double> g(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        const double lambda = eig.values[k];
        if (lambda < -1e-8)
            throw NotPsdError("inverse_sqrt_oracle: eigenvalue " + std::to_string(lambda) + " is negative");
        g[k] = lambda > eps ? 1.0 / std::sqrt(lambda) : 0.0;
    }
    Matrix scaled = eig.vectors;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) scaled(i, k) *= g[k];
    return matmul_nt(scaled, eig.vectors);
}

}  // namespace ogc
