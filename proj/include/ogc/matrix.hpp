#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "ogc/errors.hpp"

namespace ogc {

using Rng = std::mt19937_64;

/// Derive an independent stream seed from (seed, salt) with a splitmix64 finalizer.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Row-major dense matrix of doubles.
///
/// The carrier for node features, embeddings, weights and their gradients.
/// A 0x0 matrix is allowed as an "empty" placeholder; every arithmetic
/// operation checks shapes and throws ShapeError on mismatch.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    /// Nested-list literal, e.g. `Matrix{{1, 2}, {3, 4}}`.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n) { return partial_identity(n, n); }
    /// Ones on the main diagonal of a rows x cols matrix.
    static Matrix partial_identity(std::size_t rows, std::size_t cols);
    static Matrix diagonal(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    Matrix transposed() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    /// this += s * other
    void add_scaled(const Matrix& other, double s);

    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

/// a * b. Accumulates over k in increasing order for every output entry so
/// the result is bit-reproducible; zero entries of `a` are skipped.
Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * bᵀ without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Entrywise product.
Matrix hadamard(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m);
/// Frobenius inner product sum_ij a_ij b_ij.
double dot(const Matrix& a, const Matrix& b);
double trace(const Matrix& m);

/// ‖a − b‖_F / ‖b‖_F, falling back to the absolute error when ‖b‖_F == 0.
double relative_error(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Largest singular value via power iteration on mᵀm, started from a seeded
/// random vector. Requires a square matrix.
double spectral_norm_estimate(const Matrix& m, int iters, std::uint64_t seed);

struct SymEig {
    std::vector<double> values;  ///< ascending
    Matrix vectors;              ///< column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Test-time oracle;
/// throws ContractError if `m` is not symmetric within 1e-10 entrywise.
SymEig symeig_oracle(const Matrix& m);

/// V diag(g(λ)) Vᵀ with g(λ) = λ^{-1/2} for λ > eps and 0 otherwise.
/// Throws NotPsdError when an eigenvalue is below −1e-8.
Matrix inverse_sqrt_oracle(const Matrix& m, double eps = 1e-12);

// Random and structured constructions.

Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng);
Matrix random_normal(std::size_t rows, std::size_t cols, double stddev, Rng& rng);

/// Exactly orthogonal d x d matrix built as a product of `reflectors`
/// Householder reflections with random unit normals.
Matrix householder_orthogonal(std::size_t d, std::size_t reflectors, Rng& rng);
/// P with P(i, perm[i]) = 1.
Matrix permutation_matrix(std::span<const std::size_t> perm);
/// Plane rotation by `theta` in coordinates (i, j).
Matrix givens_rotation(std::size_t d, std::size_t i, std::size_t j, double theta);

}  // namespace ogc
