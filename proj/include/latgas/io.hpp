#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "latgas/density_ldf.hpp"
#include "latgas/grid.hpp"
#include "latgas/microsim.hpp"
#include "latgas/phase.hpp"

#include "json.hpp"

namespace latgas::io {

using json = nlohmann::json;

/// Shortest representation that round-trips a double through text.
std::string format_double(double v);

// --- generic CSV ----------------------------------------------------------

/// One header row, then rows assembled from equally sized numeric columns.
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Reads a numeric CSV written by write_csv (header row + double cells).
std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(
    const std::filesystem::path& file);

// --- simulation statistics -------------------------------------------------

/// Columns site,mean,stderr: per-site occupation averages.
void write_site_stats_csv(const std::filesystem::path& file, const sim::StationaryStats& stats);

/// Columns x,y,corr,stderr: pair correlations for site pairs x < y.
void write_pair_stats_csv(const std::filesystem::path& file, const sim::StationaryStats& stats);

/// One JSON object per line: {"t":..., "density":[...], "current":[...]}.
void append_snapshot(std::ostream& out, double t, const GridFunction& density, const GridFunction& current);

// --- space-time paths ------------------------------------------------------

/// Long format with columns t,u,value (one row per frame point).
void write_path_csv(const std::filesystem::path& file, const SpaceTimePath& path);

/// Rebuilds a path from the long format; the layout (nodes vs centers) is
/// inferred from the u column, the field kind from the layout (density for
/// nodes, current for centers).
SpaceTimePath read_path_csv(const std::filesystem::path& file);

/// Compact frames: magic "LGPATH01", then little-endian int32 cell count,
/// int32 field kind, int64 frame count, double dt, double t0, followed by
/// the frame payload as doubles.
void write_path_frames(const std::filesystem::path& file, const SpaceTimePath& path);
SpaceTimePath read_path_frames(const std::filesystem::path& file);

// --- variational outputs ----------------------------------------------------

/// Scalar value and solver diagnostics (no profiles).
json to_json(const ldf::FreeEnergySolution& sol);

/// Total cost plus the per-slice breakdown.
json to_json(const ldf::RateEvaluation& eval);

/// Columns u,gamma,F,F_prime.
void write_free_energy_csv(const std::filesystem::path& file, const ldf::FreeEnergySolution& sol);

// --- phase tables ------------------------------------------------------------

std::string label_name(phase::PhaseClass c);

/// Columns q,U,envelope,tw,label.
void write_phase_csv(const std::filesystem::path& file, const phase::PhaseReport& report);
json to_json(const phase::PhaseReport& report);

// --- JSON documents -----------------------------------------------------------

void write_json(const std::filesystem::path& file, const json& doc);
json read_json(const std::filesystem::path& file);

}  // namespace latgas::io
