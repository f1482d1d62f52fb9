#pragma once

#include <vector>

#include "latgas/grid.hpp"
#include "latgas/models.hpp"

namespace latgas::pde {

/// rho_bar(u) = alpha (1-u) + beta u on the nodes.
GridFunction linear_profile(const Grid& grid, double alpha, double beta);

/// Constant profile on the nodes.
GridFunction constant_profile(const Grid& grid, double value);

/// (f_{i+1} - f_i)/h, node field -> cell field (periodic wrap is implicit in
/// the stored duplicate node).
std::vector<double> gradient_to_cells(const Grid& grid, const std::vector<double>& nodes);

/// (w_{i+1/2} - w_{i-1/2})/h at the interior nodes 1..M-1 (out has M+1
/// entries, endpoints left as 0); periodic=true also fills the wrap node.
std::vector<double> divergence_to_nodes(const Grid& grid, const std::vector<double>& cells, bool periodic);

/// d/dt rho = 1/2 Lap rho with rho(0)=alpha, rho(1)=beta, rho(.,0)=gamma,
/// Crank-Nicolson on the node grid.  dt <= 0 selects h/2; dt is adjusted so
/// an integer number of steps lands exactly on T.  gamma must match
/// alpha/beta at the ends within one grid spacing.
SpaceTimePath solve_heat(const GridFunction& gamma, double alpha, double beta, double T, double dt);

/// d/dt rho = div(D(rho) grad rho) - div(chi(rho) E), geometry taken from the
/// model (Dirichlet ends or periodic).  dt <= 0 selects h/2.  Diffusion is
/// implicit with coefficients frozen at the step start, drift explicit; a
/// step whose result leaves the density range is retried with dt halved, at
/// most 20 times.
SpaceTimePath solve_hydro(const models::TransportModel& model, const GridFunction& gamma, double T, double dt);

/// d/dt rho = -div w for a prescribed current history w (cell frames).
/// Trapezoidal in time, so it reproduces solve_heat exactly when w is the
/// Crank-Nicolson path's own current.  Boundary geometry pins the end nodes
/// at gamma's values; periodic updates every node and conserves the total
/// mass exactly (telescoping fluxes).
SpaceTimePath solve_continuity(const GridFunction& gamma, const SpaceTimePath& w, const Geometry& geometry);

/// Stationary profile: solves div(-D grad rho + chi E) = 0 with the model's
/// Dirichlet data by damped Newton from the linear interpolant.  Periodic
/// geometry returns the constant profile at the conserved mass (only constant
/// fields are meaningful there).
GridFunction stationary_profile(const models::TransportModel& model, const Grid& grid);

/// Instantaneous current J(rho) = -D(rho) grad rho + chi(rho) E per frame,
/// evaluated at the cell centers (coefficients at the node average).
SpaceTimePath extract_current(const SpaceTimePath& rho, const models::TransportModel& model);

}  // namespace latgas::pde
