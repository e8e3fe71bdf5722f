#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "refldiff/cones.hpp"
#include "refldiff/errors.hpp"
#include "refldiff/harness.hpp"
#include "refldiff/lp.hpp"
#include "refldiff/parallel.hpp"
#include "refldiff/resolvent.hpp"
#include "refldiff/scenario.hpp"

namespace py = pybind11;
using namespace refldiff;

namespace {

Vecd to_vecd(const std::vector<double>& xs) {
    Vecd v(static_cast<int>(xs.size()));
    for (size_t i = 0; i < xs.size(); ++i) v[static_cast<int>(i)] = xs[i];
    return v;
}

std::vector<double> from_vecd(const Vecd& v) {
    std::vector<double> out(static_cast<size_t>(v.n));
    for (int i = 0; i < v.n; ++i) out[static_cast<size_t>(i)] = v[i];
    return out;
}

py::dict cone_report_dict(const ConeReport& rep) {
    py::dict d;
    d["x"] = from_vecd(rep.x);
    d["active"] = rep.active;
    d["holds"] = rep.holds();
    d["direction_holds"] = rep.direction.holds;
    d["margin"] = rep.direction.margin;
    if (rep.direction.witness) d["witness"] = from_vecd(*rep.direction.witness);
    d["game_holds"] = rep.game.holds;
    d["beta"] = rep.game.beta;
    py::list per_subset;
    for (const auto& s : rep.game.per_subset) {
        py::dict e;
        e["subset"] = s.subset;
        e["value"] = s.value;
        e["weights"] = s.weights;
        per_subset.append(e);
    }
    d["per_subset"] = per_subset;
    return d;
}

py::dict estimate_dict(const ResolventEstimate& est) {
    py::dict d;
    d["mean"] = est.mean;
    d["stderr"] = est.stderr_mean;
    d["truncation_bound"] = est.truncation_bound;
    d["n_paths"] = est.n_paths;
    d["estimator"] = est.estimator == EstimatorKind::ControlledClock ? "controlled-clock"
                                                                     : "constrained-clock";
    d["seed"] = est.seed;
    d["workers"] = est.workers;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "reflecting-diffusion simulation and verification toolkit";

    py::register_exception<ScenarioError>(m, "ScenarioError");
    py::register_exception<NotInCone>(m, "NotInConeError");
    py::register_exception<NotOnBoundary>(m, "NotOnBoundaryError");

    py::class_<ScenarioConfig>(m, "Scenario")
        .def_static("from_file", &load_scenario_file, py::arg("path"))
        .def_static("from_json", &load_scenario_json, py::arg("text"))
        .def_static("builtin", &builtin_scenario, py::arg("name"))
        .def_readonly("name", &ScenarioConfig::name)
        .def_property_readonly("dimension",
                               [](const ScenarioConfig& sc) { return sc.domain.dim; })
        .def_property_readonly("num_faces",
                               [](const ScenarioConfig& sc) { return sc.domain.num_faces(); })
        .def_property_readonly("x0",
                               [](const ScenarioConfig& sc) { return from_vecd(sc.x0); })
        .def("hash", &ScenarioConfig::hash)
        .def("to_json", &ScenarioConfig::to_json_string, py::arg("indent") = 2)
        .def("classify",
             [](const ScenarioConfig& sc, const std::vector<double>& x) {
                 Classification cl = classify(sc.domain, to_vecd(x));
                 const char* names[] = {"interior", "boundary", "exterior",
                                        "outside-working-region"};
                 py::dict d;
                 d["region"] = names[static_cast<int>(cl.region)];
                 d["active"] = cl.active;
                 return d;
             })
        .def("face_value",
             [](const ScenarioConfig& sc, int face, const std::vector<double>& x) {
                 FaceEval fe = evaluate_face(sc.domain.faces.at(static_cast<size_t>(face)),
                                             to_vecd(x));
                 return py::make_tuple(fe.value, from_vecd(fe.gradient));
             })
        .def("reflection_cone",
             [](const ScenarioConfig& sc, const std::vector<double>& x) {
                 py::list out;
                 for (const auto& [i, g] : reflection_cone(sc.domain, to_vecd(x)))
                     out.append(py::make_tuple(i, from_vecd(g)));
                 return out;
             })
        .def("exterior_subsets",
             [](const ScenarioConfig& sc, const std::vector<double>& x) {
                 return realizable_exterior_subsets(sc.domain, to_vecd(x));
             })
        .def("cone_report",
             [](const ScenarioConfig& sc, const std::vector<double>& x) {
                 return cone_report_dict(cone_report(sc.domain, to_vecd(x)));
             })
        .def("decompose_direction",
             [](const ScenarioConfig& sc, const std::vector<double>& x,
                const std::vector<double>& u) {
                 LocalBoundaryData local = local_boundary_data(sc.domain, to_vecd(x), false);
                 return decompose_direction(local, to_vecd(u), sc.domain.num_faces());
             })
        .def("boundary_sweep",
             [](const ScenarioConfig& sc, int samples, std::uint64_t seed) {
                 SweepSummary sweep = boundary_sweep(sc.domain, samples, seed);
                 py::dict d;
                 d["all_hold"] = sweep.all_hold;
                 d["min_margin"] = sweep.min_margin;
                 d["min_beta"] = sweep.min_beta;
                 py::list reports;
                 for (const auto& rep : sweep.reports) reports.append(cone_report_dict(rep));
                 d["reports"] = reports;
                 return d;
             },
             py::arg("samples") = 200, py::arg("seed") = 1)
        .def("simulate",
             [](const ScenarioConfig& sc, double lambda0_target, std::uint64_t seed,
                std::uint64_t path_index) {
                 ControlledPath path = simulate_controlled(
                     sc.domain, sc.coeffs, sc.behavior, sc.x0,
                     StopRule::lambda0(lambda0_target), sc.numerics, seed, path_index);
                 py::dict d;
                 d["terminal_s"] = path.terminal_s();
                 d["lambda0"] = path.terminal_lam0();
                 d["lambda1"] = path.terminal_lam1();
                 d["n_records"] = path.records.size();
                 d["n_atoms"] = path.atoms.size();
                 d["terminal_y"] = from_vecd(path.terminal_y());
                 d["clock_residual"] = path.clock_residual();
                 return d;
             },
             py::arg("lambda0_target") = 1.0, py::arg("seed") = 1,
             py::arg("path_index") = 0)
        .def("simulate_sder",
             [](const ScenarioConfig& sc, double horizon, std::uint64_t seed) {
                 SderPath p = simulate_sder(sc.domain, sc.coeffs, sc.x0, horizon,
                                            sc.numerics, seed);
                 py::dict d;
                 d["n_samples"] = p.samples.size();
                 d["lambda_total"] = p.lambda_total;
                 std::vector<std::vector<double>> xs;
                 std::vector<double> ts;
                 for (const auto& s : p.samples) {
                     ts.push_back(s.t);
                     xs.push_back(from_vecd(s.x));
                 }
                 d["t"] = ts;
                 d["x"] = xs;
                 return d;
             },
             py::arg("horizon") = 1.0, py::arg("seed") = 1)
        .def("resolvent",
             [](const ScenarioConfig& sc, const std::string& h_json, int n_paths,
                std::uint64_t seed, const std::string& estimator) {
                 TestFunction h = parse_test_function(h_json, sc.domain.dim);
                 if (estimator == "constrained")
                     return estimate_dict(estimate_vh_constrained(
                         sc.domain, sc.coeffs, sc.behavior, h, sc.x0, n_paths, sc.numerics,
                         seed, 0, sc.hash()));
                 return estimate_dict(estimate_vh_controlled(sc.domain, sc.coeffs,
                                                             sc.behavior, h, sc.x0, n_paths,
                                                             sc.numerics, seed, 0, sc.hash()));
             },
             py::arg("h"), py::arg("n_paths") = 1000, py::arg("seed") = 1,
             py::arg("estimator") = "controlled");

    m.def("matrix_game",
          [](const std::vector<std::vector<double>>& rows) {
              Matd M(static_cast<int>(rows.size()), static_cast<int>(rows.at(0).size()));
              for (int i = 0; i < M.rows; ++i)
                  for (int j = 0; j < M.cols; ++j)
                      M(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
              GameResult g = matrix_game(M);
              return py::make_tuple(g.value, g.weights);
          },
          "value and minimizing weights of min_eta max_j (eta^T M)_j");

    m.def("default_workers", &default_workers);
    m.attr("builtin_scenarios") =
        std::vector<std::string>{"disk_halfplane", "cusp", "cusp_odd", "halfline", "box2d"};
}
