#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace latgas {

/// Reservoir-coupled segment [0,1] with fixed densities at the ends.
struct BoundaryGeometry {
    double alpha{0.2};  ///< density pinned at u = 0
    double beta{0.8};   ///< density pinned at u = 1
};

/// Torus of unit length; total mass is conserved.
struct PeriodicGeometry {
    double mass{0.5};  ///< mean density, conserved by the dynamics
};

using Geometry = std::variant<BoundaryGeometry, PeriodicGeometry>;

inline bool is_periodic(const Geometry& g) { return std::holds_alternative<PeriodicGeometry>(g); }

/// Staggered uniform grid on [0,1]: scalar fields (densities, potentials)
/// live on the M+1 nodes i/M, fluxes live on the M cell centers (i+1/2)/M.
/// Periodic fields are stored with the wrap duplicate values[M] == values[0].
struct Grid {
    int cells{200};

    Grid() = default;
    explicit Grid(int m) : cells(m) {
        if (m < 4) throw std::invalid_argument("Grid: need at least 4 cells, got " + std::to_string(m));
    }

    double h() const { return 1.0 / cells; }
    int node_count() const { return cells + 1; }
    int cell_count() const { return cells; }
    double node(int i) const { return static_cast<double>(i) / cells; }
    double center(int i) const { return (i + 0.5) / cells; }

    friend bool operator==(const Grid& a, const Grid& b) { return a.cells == b.cells; }
    friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }
};

/// What a set of values on the grid represents; fixes where it lives.
enum class FieldKind {
    density,    ///< node values, constrained to the model's density range
    potential,  ///< node values, unconstrained scalar (F, phi, H, test functions)
    current,    ///< cell-center values (fluxes)
};

inline bool on_nodes(FieldKind k) { return k != FieldKind::current; }

/// Values of one field on a Grid.  size() must equal node_count() for node
/// fields and cell_count() for currents; checked at construction.
struct GridFunction {
    Grid grid;
    FieldKind kind{FieldKind::density};
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(const Grid& g, FieldKind k) : grid(g), kind(k), values(expected_size(g, k), 0.0) {}
    GridFunction(const Grid& g, FieldKind k, std::vector<double> v) : grid(g), kind(k), values(std::move(v)) {
        if (static_cast<int>(values.size()) != expected_size(g, k))
            throw std::invalid_argument("GridFunction: got " + std::to_string(values.size()) +
                                        " values, expected " + std::to_string(expected_size(g, k)));
    }

    static int expected_size(const Grid& g, FieldKind k) { return on_nodes(k) ? g.node_count() : g.cell_count(); }

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }

    /// Tabulate f at the locations appropriate for `kind`.
    template <typename F>
    static GridFunction tabulate(const Grid& g, FieldKind k, F&& f) {
        GridFunction out(g, k);
        const int n = out.size();
        for (int i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = f(on_nodes(k) ? g.node(i) : g.center(i));
        return out;
    }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Trapezoid rule over [0,1] for node fields.
inline double integrate_nodes(const GridFunction& f) {
    const double h = f.grid.h();
    double s = 0.5 * (f.values.front() + f.values.back());
    for (int i = 1; i < f.grid.cells; ++i) s += f[i];
    return s * h;
}

/// Midpoint rule over [0,1] for cell fields.
inline double integrate_cells(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.h();
}

/// Uniformly time-sampled field history: frame k holds the field at
/// t0 + k*dt.  All frames share one grid and kind.
struct SpaceTimePath {
    Grid grid;
    FieldKind kind{FieldKind::density};
    double dt{0.0};
    double t0{0.0};
    std::vector<std::vector<double>> frames;

    int frame_count() const { return static_cast<int>(frames.size()); }
    double time(int k) const { return t0 + k * dt; }
    double duration() const { return frames.empty() ? 0.0 : dt * (frame_count() - 1); }

    GridFunction frame(int k) const { return GridFunction(grid, kind, frames[static_cast<std::size_t>(k)]); }

    void check_consistent() const {
        const auto want = static_cast<std::size_t>(GridFunction::expected_size(grid, kind));
        for (const auto& fr : frames)
            if (fr.size() != want) throw std::invalid_argument("SpaceTimePath: frame size mismatch");
        if (dt <= 0.0 && frame_count() > 1) throw std::invalid_argument("SpaceTimePath: dt must be positive");
    }
};

}  // namespace latgas
