#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "latgas/current_ldf.hpp"
#include "latgas/density_ldf.hpp"
#include "latgas/microsim.hpp"
#include "latgas/models.hpp"
#include "latgas/pde.hpp"
#include "latgas/phase.hpp"
#include "latgas/quasipotential.hpp"

namespace py = pybind11;
using namespace latgas;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    return {a.data(), a.data() + a.size()};
}

GridFunction node_field(const std::vector<double>& values) {
    const int M = static_cast<int>(values.size()) - 1;
    return GridFunction(Grid(M), FieldKind::density, values);
}

models::TransportModel make_model(const std::string& family, const std::map<std::string, double>& params,
                                  bool periodic, double alpha, double beta, double mass) {
    const Geometry g = periodic ? Geometry{PeriodicGeometry{mass}} : Geometry{BoundaryGeometry{alpha, beta}};
    return models::builtin_model(family, params, g);
}

}  // namespace

PYBIND11_MODULE(_latgas, m) {
    m.doc() = "lattice gas hydrodynamics: transport coefficients, simulation, and rate functionals";

    m.def(
        "coefficients",
        [](const std::string& family, const py::array_t<double>& rho,
           const std::map<std::string, double>& params) {
            const auto model = models::builtin_model(family, params);
            const auto r = from_array(rho);
            std::vector<double> D(r.size()), chi(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) {
                D[i] = model.D(r[i]);
                chi[i] = model.chi(r[i]);
            }
            return py::make_tuple(to_array(D), to_array(chi));
        },
        py::arg("family"), py::arg("rho"), py::arg("params") = std::map<std::string, double>{},
        "Evaluate (D, chi) for a model family on an array of densities.");

    m.def(
        "stationary_stats",
        [](int N, double alpha, double beta, double t_end, double burn_in, std::uint64_t seed, int replicas,
           double sample_interval, int batches) {
            sim::SimParams p;
            p.N = N;
            p.alpha = alpha;
            p.beta = beta;
            p.t_end = t_end;
            p.burn_in = burn_in;
            p.seed = seed;
            p.replicas = replicas;
            p.sample_interval = sample_interval;
            p.batches = batches;
            p.require_valid();
            const auto stats = sim::estimate_stationary(p);
            py::dict out;
            out["site_mean"] = to_array(stats.site_mean);
            out["site_stderr"] = to_array(stats.site_stderr);
            out["current_mean"] = to_array(stats.current_mean);
            out["current_stderr"] = to_array(stats.current_stderr);
            out["window"] = stats.window;
            out["batches"] = stats.batch_count;
            return out;
        },
        py::arg("N"), py::arg("alpha"), py::arg("beta"), py::arg("t_end") = 200.0, py::arg("burn_in") = 20.0,
        py::arg("seed") = 0, py::arg("replicas") = 4, py::arg("sample_interval") = 0.05,
        py::arg("batches") = 32,
        "Stationary site and bond-current statistics of the boundary-driven exclusion process.");

    m.def(
        "solve_heat",
        [](const py::array_t<double>& rho0, double alpha, double beta, double T, double dt) {
            const auto path = pde::solve_heat(node_field(from_array(rho0)), alpha, beta, T, dt);
            return to_array(path.frames.back());
        },
        py::arg("rho0"), py::arg("alpha"), py::arg("beta"), py::arg("T"), py::arg("dt") = 0.0,
        "Evolve a node profile under the diffusive dynamics; returns the final frame.");

    m.def(
        "free_energy",
        [](const py::array_t<double>& gamma, double alpha, double beta) {
            const auto sol = ldf::solve_F_bvp(node_field(from_array(gamma)), alpha, beta);
            py::dict out;
            out["value"] = sol.value;
            out["F"] = to_array(sol.F.values);
            out["residual_sup"] = sol.residual_sup;
            out["endpoint_error"] = sol.endpoint_error;
            return out;
        },
        py::arg("gamma"), py::arg("alpha"), py::arg("beta"),
        "Nonequilibrium free energy of a density profile between unequal reservoirs.");

    m.def(
        "quasipotential_gap",
        [](const py::array_t<double>& gamma, double alpha, double beta, double T) {
            const auto check = qp::verify_quasipotential(node_field(from_array(gamma)), alpha, beta, T);
            py::dict out;
            out["cost"] = check.cost;
            out["free_energy"] = check.free_energy;
            out["relative_gap"] = check.relative_gap;
            out["T_used"] = check.T_used;
            return out;
        },
        py::arg("gamma"), py::arg("alpha"), py::arg("beta"), py::arg("T") = 5.0,
        "Compare the dynamical cost of reaching a profile against its free energy.");

    m.def(
        "current_rate",
        [](double q, const py::array_t<double>& gamma, double T, double dt, const std::string& family,
           const std::map<std::string, double>& params, bool periodic, double alpha, double beta,
           double mass) {
            const auto g = node_field(from_array(gamma));
            const auto model = make_model(family, params, periodic, alpha, beta, mass);
            SpaceTimePath w;
            w.grid = g.grid;
            w.kind = FieldKind::current;
            const double step = dt > 0.0 ? dt : 0.5 * g.grid.h();
            const int K = std::max(2, static_cast<int>(std::lround(T / step)) + 1);
            w.dt = T / (K - 1);
            w.frames.assign(static_cast<std::size_t>(K),
                            std::vector<double>(static_cast<std::size_t>(g.grid.cell_count()), q));
            const auto eval = cur::rate_current(w, g, model);
            py::dict out;
            out["cost"] = eval.cost;
            out["per_slice"] = to_array(eval.per_slice);
            out["final_density"] = to_array(eval.rho.frames.back());
            return out;
        },
        py::arg("q"), py::arg("gamma"), py::arg("T") = 1.0, py::arg("dt") = 0.0, py::arg("family") = "ssep",
        py::arg("params") = std::map<std::string, double>{}, py::arg("periodic") = false,
        py::arg("alpha") = 0.2, py::arg("beta") = 0.8, py::arg("mass") = 0.5,
        "Cost of holding a constant flux q starting from a density profile.");

    m.def(
        "phase_table",
        [](const std::string& family, double mass, const py::array_t<double>& q_grid, int modes,
           const std::map<std::string, double>& params) {
            const auto model = make_model(family, params, true, 0.0, 0.0, mass);
            const auto report = phase::phase_report(model, mass, from_array(q_grid), modes);
            std::vector<std::string> labels(report.labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i)
                labels[i] = report.labels[i] == phase::PhaseClass::unique_phase        ? "unique"
                            : report.labels[i] == phase::PhaseClass::coexistence      ? "coexistence"
                                                                                      : "traveling_wave";
            py::dict out;
            out["q"] = to_array(report.q);
            out["U"] = to_array(report.U);
            out["envelope"] = to_array(report.envelope);
            out["tw"] = to_array(report.tw);
            out["labels"] = labels;
            out["q_star"] = report.q_star;
            return out;
        },
        py::arg("family"), py::arg("mass"), py::arg("q_grid"), py::arg("modes") = 6,
        py::arg("params") = std::map<std::string, double>{},
        "Classify the periodic-state phase structure over a flux grid.");

    m.attr("__version__") = "1.0.0";
}
