#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "latgas/cli.hpp"
#include "latgas/errors.hpp"
#include "latgas/io.hpp"

namespace latgas::cli {

namespace {

const std::set<std::string> kCommands{"simulate",     "stationary-check", "free-energy",
                                      "optimal-path", "current-rate",     "phase-diagram"};
const std::set<std::string> kFamilies{"ssep", "kmp", "zero_range", "ginzburg_landau", "wasep"};
const std::set<std::string> kProfiles{"linear", "sine", "constant", "tabulated"};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && !s.empty();
}

bool parse_int(const std::string& s, long long& out) {
    char* end = nullptr;
    out = std::strtoll(s.c_str(), &end, 10);
    return end && *end == '\0' && !s.empty();
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
    if (s.empty() || s[0] == '-') return false;
    char* end = nullptr;
    out = std::strtoull(s.c_str(), &end, 10);
    return end && *end == '\0';
}

struct Entry {
    std::string value;
    int line;
};

}  // namespace

std::string config_help() {
    return R"(Config file format: flat key=value pairs; [section] headers prefix the
keys that follow; '#' starts a comment line.

[model]
  family      = ssep | kmp | zero_range | ginzburg_landau | wasep   (default ssep)
  <param>     = numeric model parameter (rho_max, psi_scale, psi_power,
                d0, d2, c0, field), passed through to the model family

[geometry]
  kind        = boundary | periodic                                  (default boundary)
  alpha       = left reservoir density, in (0,1)                     (default 0.2)
  beta        = right reservoir density, in (0,1)                    (default 0.8)
  mass        = mean density for periodic geometry                   (default 0.5)

[lattice]                      -- microscopic simulation commands
  N           = number of bonds, >= 3                                (default 50)
  t_end       = simulated time after t=0, > 0                        (default 200)
  burn_in     = discarded initial span, in [0, t_end)                (default 20)
  sample_interval = sampling tick, > 0                               (default 0.05)
  replicas    = independent replicas, >= 1                           (default 4)
  batches     = batch-means batches per replica, >= 20               (default 32)

[grid]                         -- macroscopic solvers
  M           = number of cells, >= 4                                (default 128)
  dt          = time step; 0 selects the solver default              (default 0)
  T           = time horizon, > 0                                    (default 1)

[profile]                      -- density profile gamma
  family      = linear | sine | constant | tabulated                 (default linear)
  level       = base level for constant/sine under periodic geometry (default 0.5)
  amplitude   = sine amplitude                                       (default 0.1)
  mode        = sine mode index, >= 1                                (default 1)
  file        = CSV file with header u,value (family = tabulated)

[flux]                         -- current-rate and phase-diagram
  q           = flux value for current-rate                          (default 1)
  q_min       = scan start                                           (default 0)
  q_max       = scan end, > q_min                                    (default 8)
  q_points    = scan points, >= 2                                    (default 25)
  modes       = Fourier modes for the wave ansatz, >= 2              (default 6)

[run]
  seed        = base RNG seed (missing: 0, recorded as a warning)
  out_dir     = output directory                                     (default out)

'seed' is also accepted without a section header.
)";
}

ConfigParse validate_config(const std::string& raw, const std::string& command) {
    ConfigParse result;
    RunConfig& cfg = result.config;
    auto& errors = result.errors;
    cfg.command = command;

    if (!kCommands.count(command))
        errors.push_back("unknown command '" + command + "'");

    // ---- scan lines into (dotted key -> value, line) -------------------
    std::map<std::string, Entry> entries;
    {
        std::istringstream in(raw);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']') {
                    errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                    continue;
                }
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
                continue;
            }
            std::string key = trim(t.substr(0, eq));
            const std::string value = trim(t.substr(eq + 1));
            if (key.empty()) {
                errors.push_back("line " + std::to_string(lineno) + ": empty key");
                continue;
            }
            if (!section.empty()) key = section + "." + key;
            if (key == "seed") key = "run.seed";
            if (entries.count(key))
                errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            entries[key] = Entry{value, lineno};
        }
    }

    auto where = [&](const Entry& e) { return "line " + std::to_string(e.line) + ": "; };
    auto take = [&](const std::string& key) -> const Entry* {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        return &it->second;
    };
    std::set<std::string> used;
    auto take_used = [&](const std::string& key) {
        const Entry* e = take(key);
        if (e) used.insert(key);
        return e;
    };
    auto get_double = [&](const std::string& key, double& slot) {
        if (const Entry* e = take_used(key)) {
            if (!parse_double(e->value, slot))
                errors.push_back(where(*e) + "value for '" + key + "' is not a number");
        }
    };
    auto get_int = [&](const std::string& key, int& slot, long long lo, const std::string& rule) {
        if (const Entry* e = take_used(key)) {
            long long v;
            if (!parse_int(e->value, v))
                errors.push_back(where(*e) + "value for '" + key + "' is not an integer");
            else if (v < lo)
                errors.push_back(where(*e) + "'" + key + "' " + rule);
            else
                slot = static_cast<int>(v);
        }
    };
    auto get_string = [&](const std::string& key, std::string& slot) {
        if (const Entry* e = take_used(key)) slot = e->value;
    };

    // ---- model ------------------------------------------------------------
    get_string("model.family", cfg.model_family);
    if (!kFamilies.count(cfg.model_family))
        errors.push_back("model.family '" + cfg.model_family + "' is not a known model family");
    for (const auto& [key, entry] : entries) {
        if (key.rfind("model.", 0) == 0 && key != "model.family") {
            double v;
            if (!parse_double(entry.value, v))
                errors.push_back(where(entry) + "value for '" + key + "' is not a number");
            else
                cfg.model_params[key.substr(6)] = v;
            used.insert(key);
        }
    }

    // ---- geometry ----------------------------------------------------------
    std::string kind = "boundary";
    get_string("geometry.kind", kind);
    if (kind == "periodic")
        cfg.periodic = true;
    else if (kind != "boundary")
        errors.push_back("geometry.kind must be 'boundary' or 'periodic', got '" + kind + "'");
    get_double("geometry.alpha", cfg.alpha);
    get_double("geometry.beta", cfg.beta);
    get_double("geometry.mass", cfg.mass);
    if (!cfg.periodic) {
        if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) errors.push_back("alpha must lie in (0,1)");
        if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) errors.push_back("beta must lie in (0,1)");
    } else if (!std::isfinite(cfg.mass)) {
        errors.push_back("geometry.mass must be finite");
    }

    // ---- lattice -------------------------------------------------------------
    get_int("lattice.N", cfg.N, 3, "must be >= 3");
    get_double("lattice.t_end", cfg.t_end);
    get_double("lattice.burn_in", cfg.burn_in);
    get_double("lattice.sample_interval", cfg.sample_interval);
    get_int("lattice.replicas", cfg.replicas, 1, "must be >= 1");
    get_int("lattice.batches", cfg.batches, 20, "must be >= 20");
    if (!(cfg.t_end > 0.0)) errors.push_back("lattice.t_end must be positive");
    if (!(cfg.burn_in >= 0.0))
        errors.push_back("lattice.burn_in must lie in [0, t_end)");
    else if (cfg.t_end > 0.0 && cfg.burn_in >= cfg.t_end)
        errors.push_back("lattice.burn_in must lie in [0, t_end)");
    if (!(cfg.sample_interval > 0.0)) errors.push_back("lattice.sample_interval must be positive");

    // ---- grid ------------------------------------------------------------------
    get_int("grid.M", cfg.M, 4, "must be >= 4");
    get_double("grid.dt", cfg.dt);
    get_double("grid.T", cfg.T);
    if (!(cfg.dt >= 0.0)) errors.push_back("grid.dt must be >= 0 (0 selects the default)");
    if (!(cfg.T > 0.0)) errors.push_back("grid.T must be positive");

    // ---- profile ------------------------------------------------------------------
    if (cfg.periodic && take("profile.family") == nullptr) {
        // the boundary-geometry default (linear between the reservoirs) has no
        // periodic analogue; fall back to a flat profile at the mean density
        cfg.profile_family = "constant";
        cfg.profile_level = cfg.mass;
    }
    get_string("profile.family", cfg.profile_family);
    get_double("profile.level", cfg.profile_level);
    get_double("profile.amplitude", cfg.profile_amplitude);
    get_int("profile.mode", cfg.profile_mode, 1, "must be >= 1");
    get_string("profile.file", cfg.profile_file);
    if (!kProfiles.count(cfg.profile_family))
        errors.push_back("profile.family '" + cfg.profile_family + "' is not one of " +
                         "linear|sine|constant|tabulated");
    if (cfg.profile_family == "tabulated" && cfg.profile_file.empty())
        errors.push_back("profile.family = tabulated requires profile.file");
    if (cfg.periodic && cfg.profile_family == "linear")
        errors.push_back("profile.family = linear is incompatible with periodic geometry");

    // ---- flux ------------------------------------------------------------------------
    get_double("flux.q", cfg.q);
    get_double("flux.q_min", cfg.q_min);
    get_double("flux.q_max", cfg.q_max);
    get_int("flux.q_points", cfg.q_points, 2, "must be >= 2");
    get_int("flux.modes", cfg.modes, 2, "must be >= 2");
    if (!(cfg.q_min < cfg.q_max)) errors.push_back("flux.q_min must be below flux.q_max");
    if (!std::isfinite(cfg.q) || !std::isfinite(cfg.q_min) || !std::isfinite(cfg.q_max))
        errors.push_back("flux values must be finite");

    // ---- run --------------------------------------------------------------------------
    if (const Entry* e = take_used("run.seed")) {
        if (!parse_u64(e->value, cfg.seed))
            errors.push_back(where(*e) + "value for 'run.seed' is not an unsigned integer");
        else
            cfg.seed_defaulted = false;
    } else {
        cfg.seed = 0;
        cfg.seed_defaulted = true;
        cfg.warnings.push_back("seed missing from config; defaulting to 0");
    }
    std::string out_dir;
    get_string("run.out_dir", out_dir);
    if (!out_dir.empty()) cfg.out_dir = out_dir;

    // ---- command-specific requirements ---------------------------------------------------
    if (command == "phase-diagram" && !cfg.periodic)
        errors.push_back("phase-diagram requires geometry.kind = periodic");
    if ((command == "free-energy" || command == "optimal-path") && cfg.periodic)
        errors.push_back(command + " requires geometry.kind = boundary");
    if ((command == "simulate" || command == "stationary-check") && cfg.periodic)
        errors.push_back(command + " requires geometry.kind = boundary");

    // ---- unknown keys ------------------------------------------------------------------------
    for (const auto& [key, entry] : entries)
        if (!used.count(key)) errors.push_back(where(entry) + "unknown key '" + key + "'");

    std::sort(errors.begin(), errors.end());
    return result;
}

ConfigParse load_config(const std::filesystem::path& file, const std::string& command) {
    std::ifstream in(file);
    if (!in) {
        ConfigParse r;
        r.errors.push_back("cannot read config file: " + file.string());
        return r;
    }
    std::ostringstream body;
    body << in.rdbuf();
    return validate_config(body.str(), command);
}

GridFunction build_profile(const RunConfig& cfg, const Grid& grid) {
    const double pi = 3.14159265358979323846;
    if (cfg.profile_family == "linear") {
        return GridFunction::tabulate(grid, FieldKind::density, [&](double u) {
            return cfg.alpha + (cfg.beta - cfg.alpha) * u;
        });
    }
    if (cfg.profile_family == "constant") {
        const double level = cfg.periodic ? cfg.mass : cfg.profile_level;
        return GridFunction::tabulate(grid, FieldKind::density, [&](double) { return level; });
    }
    if (cfg.profile_family == "sine") {
        if (cfg.periodic) {
            return GridFunction::tabulate(grid, FieldKind::density, [&](double u) {
                return cfg.mass + cfg.profile_amplitude * std::sin(2.0 * pi * cfg.profile_mode * u);
            });
        }
        return GridFunction::tabulate(grid, FieldKind::density, [&](double u) {
            return cfg.alpha + (cfg.beta - cfg.alpha) * u +
                   cfg.profile_amplitude * std::sin(pi * cfg.profile_mode * u);
        });
    }
    if (cfg.profile_family == "tabulated") {
        auto [header, cols] = io::read_csv(cfg.profile_file);
        if (header.size() != 2 || header[0] != "u" || header[1] != "value")
            throw ValidationError("profile.file must have header u,value");
        const auto& u = cols[0];
        const auto& v = cols[1];
        if (u.size() < 2) throw ValidationError("profile.file needs at least two rows");
        for (std::size_t i = 1; i < u.size(); ++i)
            if (!(u[i] > u[i - 1])) throw ValidationError("profile.file u column must be strictly ascending");
        if (u.front() > 0.0 || u.back() < 1.0)
            throw ValidationError("profile.file must cover the interval [0,1]");
        return GridFunction::tabulate(grid, FieldKind::density, [&](double x) {
            auto hi = std::upper_bound(u.begin(), u.end(), x);
            if (hi == u.begin()) return v.front();
            if (hi == u.end()) return v.back();
            const std::size_t j = static_cast<std::size_t>(hi - u.begin());
            const double t = (x - u[j - 1]) / (u[j] - u[j - 1]);
            return (1.0 - t) * v[j - 1] + t * v[j];
        });
    }
    throw ValidationError("unknown profile family: " + cfg.profile_family);
}

models::TransportModel build_model(const RunConfig& cfg) {
    const Geometry geometry = cfg.periodic ? Geometry{PeriodicGeometry{cfg.mass}}
                                           : Geometry{BoundaryGeometry{cfg.alpha, cfg.beta}};
    try {
        return models::builtin_model(cfg.model_family, cfg.model_params, geometry);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
}

}  // namespace latgas::cli
