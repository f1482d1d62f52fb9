#include "latgas/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "latgas/errors.hpp"

namespace latgas::io {

namespace {

std::ofstream open_out(const std::filesystem::path& file, std::ios::openmode mode = std::ios::out) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, mode);
    if (!out) throw ValidationError("cannot open for writing: " + file.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& file, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(file, mode);
    if (!in) throw ValidationError("cannot open for reading: " + file.string());
    return in;
}

template <typename T>
void put_raw(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw ValidationError("write_csv: header/column count mismatch");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw ValidationError("write_csv: ragged columns");

    auto out = open_out(file);
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            out << (j ? "," : "") << format_double(columns[j][i]);
        out << '\n';
    }
}

std::pair<std::vector<std::string>, std::vector<std::vector<double>>> read_csv(
    const std::filesystem::path& file) {
    auto in = open_in(file);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("read_csv: empty file " + file.string());
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    std::vector<std::vector<double>> columns(header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t j = 0;
        while (std::getline(ss, cell, ',')) {
            if (j >= header.size())
                throw ValidationError("read_csv: extra cell at line " + std::to_string(lineno));
            columns[j++].push_back(std::strtod(cell.c_str(), nullptr));
        }
        if (j != header.size())
            throw ValidationError("read_csv: short row at line " + std::to_string(lineno));
    }
    return {std::move(header), std::move(columns)};
}

void write_site_stats_csv(const std::filesystem::path& file, const sim::StationaryStats& stats) {
    std::vector<double> site(stats.site_mean.size());
    for (std::size_t i = 0; i < site.size(); ++i) site[i] = static_cast<double>(i + 1);
    write_csv(file, {"site", "mean", "stderr"}, {site, stats.site_mean, stats.site_stderr});
}

void write_pair_stats_csv(const std::filesystem::path& file, const sim::StationaryStats& stats) {
    std::vector<double> xs, ys;
    xs.reserve(stats.corr.size());
    ys.reserve(stats.corr.size());
    for (int x = 1; x <= stats.N - 1; ++x)
        for (int y = x + 1; y <= stats.N - 1; ++y) {
            xs.push_back(x);
            ys.push_back(y);
        }
    if (xs.size() != stats.corr.size()) throw ValidationError("write_pair_stats_csv: pair count mismatch");
    write_csv(file, {"x", "y", "corr", "stderr"}, {xs, ys, stats.corr, stats.corr_stderr});
}

void append_snapshot(std::ostream& out, double t, const GridFunction& density, const GridFunction& current) {
    json rec;
    rec["t"] = t;
    rec["density"] = density.values;
    rec["current"] = current.values;
    out << rec.dump() << '\n';
}

void write_path_csv(const std::filesystem::path& file, const SpaceTimePath& path) {
    auto out = open_out(file);
    out << "t,u,value\n";
    const bool nodes = on_nodes(path.kind);
    const int n = nodes ? path.grid.node_count() : path.grid.cell_count();
    for (std::size_t k = 0; k < path.frames.size(); ++k) {
        const double t = path.t0 + static_cast<double>(k) * path.dt;
        const auto& frame = path.frames[k];
        for (int i = 0; i < n; ++i) {
            const double u = nodes ? path.grid.node(i) : path.grid.center(i);
            out << format_double(t) << ',' << format_double(u) << ','
                << format_double(frame[static_cast<std::size_t>(i)]) << '\n';
        }
    }
}

SpaceTimePath read_path_csv(const std::filesystem::path& file) {
    auto [header, cols] = read_csv(file);
    if (header.size() != 3 || header[0] != "t" || header[1] != "u" || header[2] != "value")
        throw ValidationError("read_path_csv: expected header t,u,value");
    const auto& t = cols[0];
    const auto& u = cols[1];
    const auto& v = cols[2];
    if (t.empty()) throw ValidationError("read_path_csv: no rows");

    std::size_t n = 1;
    while (n < t.size() && t[n] == t[0]) ++n;
    if (t.size() % n != 0) throw ValidationError("read_path_csv: ragged frames");
    const std::size_t K = t.size() / n;

    const bool nodes = u[0] == 0.0;
    const int M = nodes ? static_cast<int>(n - 1) : static_cast<int>(n);
    SpaceTimePath path;
    path.grid = Grid(M);
    path.kind = nodes ? FieldKind::density : FieldKind::current;
    path.t0 = t[0];
    path.dt = K > 1 ? (t.back() - t.front()) / static_cast<double>(K - 1) : 0.0;
    path.frames.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        path.frames[k].assign(v.begin() + static_cast<std::ptrdiff_t>(k * n),
                              v.begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
    path.check_consistent();
    return path;
}

void write_path_frames(const std::filesystem::path& file, const SpaceTimePath& path) {
    auto out = open_out(file, std::ios::binary);
    out.write("LGPATH01", 8);
    put_raw<std::int32_t>(out, path.grid.cells);
    put_raw<std::int32_t>(out, static_cast<std::int32_t>(path.kind));
    put_raw<std::int64_t>(out, static_cast<std::int64_t>(path.frames.size()));
    put_raw<double>(out, path.dt);
    put_raw<double>(out, path.t0);
    for (const auto& frame : path.frames)
        out.write(reinterpret_cast<const char*>(frame.data()),
                  static_cast<std::streamsize>(frame.size() * sizeof(double)));
}

SpaceTimePath read_path_frames(const std::filesystem::path& file) {
    auto in = open_in(file, std::ios::binary);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "LGPATH01", 8) != 0)
        throw ValidationError("read_path_frames: bad magic in " + file.string());
    SpaceTimePath path;
    const auto M = get_raw<std::int32_t>(in);
    const auto kind = get_raw<std::int32_t>(in);
    const auto K = get_raw<std::int64_t>(in);
    path.dt = get_raw<double>(in);
    path.t0 = get_raw<double>(in);
    if (!in || M < 4 || kind < 0 || kind > 2 || K < 1)
        throw ValidationError("read_path_frames: corrupt header in " + file.string());
    path.grid = Grid(M);
    path.kind = static_cast<FieldKind>(kind);
    const std::size_t n = static_cast<std::size_t>(
        on_nodes(path.kind) ? path.grid.node_count() : path.grid.cell_count());
    path.frames.assign(static_cast<std::size_t>(K), std::vector<double>(n));
    for (auto& frame : path.frames) {
        in.read(reinterpret_cast<char*>(frame.data()), static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw ValidationError("read_path_frames: truncated payload in " + file.string());
    }
    path.check_consistent();
    return path;
}

json to_json(const ldf::FreeEnergySolution& sol) {
    return json{{"value", sol.value},
                {"residual_sup", sol.residual_sup},
                {"endpoint_error", sol.endpoint_error},
                {"iterations", sol.iterations},
                {"bracket", {sol.bracket_lo, sol.bracket_hi}},
                {"used_collocation", sol.used_collocation}};
}

json to_json(const ldf::RateEvaluation& eval) {
    return json{{"cost", eval.cost}, {"slices", eval.per_slice.size()}, {"per_slice", eval.per_slice}};
}

void write_free_energy_csv(const std::filesystem::path& file, const ldf::FreeEnergySolution& sol) {
    const Grid& g = sol.F.grid;
    std::vector<double> u(static_cast<std::size_t>(g.node_count()));
    for (int i = 0; i < g.node_count(); ++i) u[static_cast<std::size_t>(i)] = g.node(i);
    write_csv(file, {"u", "gamma", "F", "F_prime"}, {u, sol.gamma.values, sol.F.values, sol.F_prime.values});
}

std::string label_name(phase::PhaseClass c) {
    switch (c) {
        case phase::PhaseClass::unique_phase: return "unique";
        case phase::PhaseClass::coexistence: return "coexistence";
        case phase::PhaseClass::traveling_wave: return "traveling_wave";
    }
    return "unknown";
}

void write_phase_csv(const std::filesystem::path& file, const phase::PhaseReport& report) {
    auto out = open_out(file);
    out << "q,U,envelope,tw,label\n";
    for (std::size_t i = 0; i < report.q.size(); ++i) {
        out << format_double(report.q[i]) << ',' << format_double(report.U[i]) << ','
            << format_double(report.envelope[i]) << ',' << format_double(report.tw[i]) << ','
            << label_name(report.labels[i]) << '\n';
    }
}

json to_json(const phase::PhaseReport& report) {
    std::vector<std::string> labels(report.labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = label_name(report.labels[i]);
    json doc{{"q", report.q},       {"U", report.U},       {"envelope", report.envelope},
             {"tw", report.tw},     {"labels", labels},    {"modes", report.modes}};
    if (std::isfinite(report.q_star)) doc["q_star"] = report.q_star;
    return doc;
}

void write_json(const std::filesystem::path& file, const json& doc) {
    auto out = open_out(file);
    out << doc.dump(2) << '\n';
}

json read_json(const std::filesystem::path& file) {
    auto in = open_in(file);
    return json::parse(in);
}

}  // namespace latgas::io
