#include <cmath>

#include "ogc/diagnostics.hpp"

namespace ogc {

namespace {

double row_norm(std::span<const double> r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return std::sqrt(s);
}

double row_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

SignalMagnification signal_magnification_detail(const Matrix& h0, const Matrix& hL) {
    if (h0.rows() != hL.rows()) throw ShapeError("signal_magnification: row counts differ");
    SignalMagnification out;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < h0.rows(); ++i) {
        const double base = row_norm(h0.row(i));
        if (base == 0.0) {
            ++out.excluded_rows;
            continue;
        }
        sum += row_norm(hL.row(i)) / base;
        ++used;
    }
    if (used == 0) throw DegenerateInputError("signal_magnification: every input row has zero norm");
    out.value = sum / static_cast<double>(used);
    return out;
}

double signal_magnification(const Matrix& h0, const Matrix& hL) { return signal_magnification_detail(h0, hL).value; }

Smoothness graph_smoothness_detail(const Matrix& h, std::uint64_t seed) {
    const std::size_t n = h.rows();
    Smoothness out;
    if (n == 0) return out;
    if (n <= kExactSmoothnessLimit) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) row_sum += row_distance(h.row(i), h.row(j));
            sum += row_sum;
        }
        out.value = 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n));
        return out;
    }
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    double sum = 0.0;
    for (std::size_t s = 0; s < kSmoothnessSamples; ++s) sum += row_distance(h.row(pick(rng)), h.row(pick(rng)));
    out.value = sum / static_cast<double>(kSmoothnessSamples);
    out.sampled = true;
    return out;
}

double graph_smoothness(const Matrix& h) { return graph_smoothness_detail(h).value; }

std::vector<double> gradient_norms(const ModelState& state) {
    if (state.task_grads.empty() || state.task_grads.size() != state.layers.size())
        throw ContractError("gradient_norms: no backward pass since the last parameter update");
    std::vector<double> out;
    out.reserve(state.task_grads.size());
    for (const auto& g : state.task_grads) out.push_back(frobenius_norm(g));
    return out;
}

}  // namespace ogc
