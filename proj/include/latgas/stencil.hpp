#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace latgas {

/// Finite-difference weights for the m-th derivative at x0 from samples at
/// arbitrary nodes x[0..n-1] (Fornberg's recurrence).  Exact for polynomials
/// of degree n-1, so n nodes give order n-m accuracy on smooth data.
inline std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size());
    if (m < 0 || n < m + 1) throw std::invalid_argument("fd_weights: need at least m+1 nodes");
    // c[j][k] = weight of node j for the k-th derivative, built level by
    // level; the new node's column must read the previous level's values, so
    // it is filled inside the sweep just before column i-1 is transformed.
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
    c[0][0] = 1.0;
    double c1 = 1.0;
    double c4 = x[0] - x0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                auto& ci = c[static_cast<std::size_t>(i)];
                const auto& cp = c[static_cast<std::size_t>(i - 1)];
                for (int k = mn; k >= 1; --k)
                    ci[static_cast<std::size_t>(k)] =
                        c1 * (k * cp[static_cast<std::size_t>(k - 1)] - c5 * cp[static_cast<std::size_t>(k)]) / c2;
                ci[0] = -c1 * c5 * cp[0] / c2;
            }
            auto& cj = c[static_cast<std::size_t>(j)];
            for (int k = mn; k >= 1; --k)
                cj[static_cast<std::size_t>(k)] =
                    (c4 * cj[static_cast<std::size_t>(k)] - k * cj[static_cast<std::size_t>(k - 1)]) / c3;
            cj[0] = c4 * cj[0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
    return out;
}

/// Derivative of order m at every node of a uniform grid of n values with
/// spacing h, using `width`-point stencils (centered where possible, shifted
/// near the ends).  width >= m+1; accuracy order width-m.
inline std::vector<double> fd_derivative(const std::vector<double>& f, double h, int m, int width) {
    const int n = static_cast<int>(f.size());
    if (width > n) throw std::invalid_argument("fd_derivative: stencil wider than the grid");
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    std::vector<double> nodes(static_cast<std::size_t>(width));
    for (int i = 0; i < n; ++i) {
        int left = i - width / 2;
        left = std::max(0, std::min(left, n - width));
        for (int j = 0; j < width; ++j) nodes[static_cast<std::size_t>(j)] = (left + j) * h;
        const auto w = fd_weights(i * h, nodes, m);
        double s = 0.0;
        for (int j = 0; j < width; ++j) s += w[static_cast<std::size_t>(j)] * f[static_cast<std::size_t>(left + j)];
        out[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

}  // namespace latgas
