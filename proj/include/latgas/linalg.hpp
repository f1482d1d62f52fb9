#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace latgas {

/// Thomas algorithm for a tridiagonal system.  sub[0] and sup[n-1] are
/// ignored.  diag must be strongly diagonally dominant (all callers here
/// assemble I + positive-definite diffusion terms, so no pivoting).
/// Overwrites rhs with the solution.
inline void solve_tridiagonal(const std::vector<double>& sub, std::vector<double> diag,
                              const std::vector<double>& sup, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n)
        throw std::invalid_argument("solve_tridiagonal: size mismatch");
    for (std::size_t i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

/// Cyclic tridiagonal solve via Sherman-Morrison.  corner_lo couples row 0
/// to column n-1, corner_hi couples row n-1 to column 0.
inline void solve_cyclic_tridiagonal(const std::vector<double>& sub, const std::vector<double>& diag,
                                     const std::vector<double>& sup, double corner_lo, double corner_hi,
                                     std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n < 3) throw std::invalid_argument("solve_cyclic_tridiagonal: need n >= 3");
    // A = T + u v^T with u = (gamma, 0, ..., corner_hi), v = (1, 0, ..., corner_lo/gamma).
    const double gamma = -diag[0];
    std::vector<double> d = diag;
    d[0] = diag[0] - gamma;
    d[n - 1] = diag[n - 1] - corner_lo * corner_hi / gamma;

    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = corner_hi;

    std::vector<double> y = rhs;
    solve_tridiagonal(sub, d, sup, y);
    solve_tridiagonal(sub, d, sup, u);

    const double vy = y[0] + (corner_lo / gamma) * y[n - 1];
    const double vu = u[0] + (corner_lo / gamma) * u[n - 1];
    const double factor = vy / (1.0 + vu);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = y[i] - factor * u[i];
}

}  // namespace latgas
