#include "ogc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ogc {

namespace {

std::string shape_of(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
        throw ShapeError("Matrix: data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::partial_identity(std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < std::min(rows, cols); ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

void Matrix::add_scaled(const Matrix& other, double s) {
    require_same_shape(*this, other, "add_scaled");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: " + shape_of(a) + " x " + shape_of(b));
    const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
    Matrix out(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        double* out_row = out.row(i).data();
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* b_row = b.row(k).data();
            for (std::size_t j = 0; j < m; ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("matmul_tn: " + shape_of(a) + "ᵀ x " + shape_of(b));
    const std::size_t n = a.rows(), p = a.cols(), m = b.cols();
    Matrix out(p, m);
    // out(k, j) accumulates over i in increasing order.
    for (std::size_t i = 0; i < n; ++i) {
        const double* b_row = b.row(i).data();
        for (std::size_t k = 0; k < p; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            double* out_row = out.row(k).data();
            for (std::size_t j = 0; j < m; ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw ShapeError("matmul_nt: " + shape_of(a) + " x " + shape_of(b) + "ᵀ");
    const std::size_t n = a.rows(), inner = a.cols(), m = b.rows();
    Matrix out(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a_row = a.row(i).data();
        for (std::size_t j = 0; j < m; ++j) {
            const double* b_row = b.row(j).data();
            double s = 0.0;
            for (std::size_t k = 0; k < inner; ++k) s += a_row[k] * b_row[k];
            out(i, j) = s;
        }
    }
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    auto dst = out.values();
    auto src = b.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
    return out;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.values()) s += v * v;
    return std::sqrt(s);
}

double dot(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "dot");
    auto x = a.values();
    auto y = b.values();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double trace(const Matrix& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) s += m(i, i);
    return s;
}

double relative_error(const Matrix& a, const Matrix& b) {
    const double diff = frobenius_norm(a - b);
    const double ref = frobenius_norm(b);
    return ref > 0.0 ? diff / ref : diff;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double best = 0.0;
    auto x = a.values();
    auto y = b.values();
    for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, std::abs(x[i] - y[i]));
    return best;
}

Matrix random_uniform(std::size_t rows, std::size_t cols, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (double& v : m.values()) v = dist(rng);
    return m;
}

Matrix random_normal(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (double& v : m.values()) v = dist(rng);
    return m;
}

Matrix householder_orthogonal(std::size_t d, std::size_t reflectors, Rng& rng) {
    Matrix q = Matrix::identity(d);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> v(d);
    for (std::size_t r = 0; r < reflectors; ++r) {
        double norm2 = 0.0;
        do {
            for (double& x : v) x = dist(rng);
            norm2 = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
        } while (norm2 < 1e-12);
        // q <- q (I − 2 v vᵀ / vᵀv)
        for (std::size_t i = 0; i < d; ++i) {
            double proj = 0.0;
            for (std::size_t k = 0; k < d; ++k) proj += q(i, k) * v[k];
            const double s = 2.0 * proj / norm2;
            for (std::size_t k = 0; k < d; ++k) q(i, k) -= s * v[k];
        }
    }
    return q;
}

Matrix permutation_matrix(std::span<const std::size_t> perm) {
    const std::size_t d = perm.size();
    Matrix p(d, d);
    std::vector<bool> seen(d, false);
    for (std::size_t i = 0; i < d; ++i) {
        if (perm[i] >= d || seen[perm[i]]) throw ContractError("permutation_matrix: not a permutation");
        seen[perm[i]] = true;
        p(i, perm[i]) = 1.0;
    }
    return p;
}

Matrix givens_rotation(std::size_t d, std::size_t i, std::size_t j, double theta) {
    if (i >= d || j >= d || i == j) throw ContractError("givens_rotation: invalid plane");
    Matrix g = Matrix::identity(d);
    const double c = std::cos(theta), s = std::sin(theta);
    g(i, i) = c;
    g(j, j) = c;
    g(i, j) = -s;
    g(j, i) = s;
    return g;
}

}  // namespace ogc
