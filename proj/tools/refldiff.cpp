#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "refldiff/cones.hpp"
#include "refldiff/errors.hpp"
#include "refldiff/harness.hpp"
#include "refldiff/parallel.hpp"
#include "refldiff/resolvent.hpp"
#include "refldiff/scenario.hpp"

using namespace refldiff;
using nlohmann::json;

namespace {

ScenarioConfig load_scenario_arg(const std::string& arg) {
    if (arg.rfind("builtin:", 0) == 0) return builtin_scenario(arg.substr(8));
    return load_scenario_file(arg);
}

Vecd parse_point(const std::string& csv, int dim) {
    Vecd v(dim);
    std::stringstream ss(csv);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= dim) throw ScenarioError("point has too many coordinates: " + csv);
        v[i++] = std::stod(tok);
    }
    if (i != dim) throw ScenarioError("point has too few coordinates: " + csv);
    return v;
}

StoppingRule parse_stop(const std::string& s, int dim) {
    if (s == "boundary") return StoppingRule::boundary();
    if (s.rfind("face:", 0) == 0) {
        StoppingRule r;
        r.kind = StoppingRule::HitFace;
        r.face = std::stoi(s.substr(5));
        return r;
    }
    if (s.rfind("time:", 0) == 0) return StoppingRule::fixed_time(std::stod(s.substr(5)));
    if (s.rfind("ball:", 0) == 0) {
        std::stringstream ss(s.substr(5));
        std::string tok;
        std::vector<double> nums;
        while (std::getline(ss, tok, ',')) nums.push_back(std::stod(tok));
        if (static_cast<int>(nums.size()) != dim + 1)
            throw ScenarioError("ball stop rule needs dim coords plus a radius");
        Vecd c(dim);
        for (int i = 0; i < dim; ++i) c[i] = nums[static_cast<size_t>(i)];
        return StoppingRule::ball(c, nums.back());
    }
    throw ScenarioError("unknown stopping rule: " + s);
}

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

void apply_overrides(ScenarioConfig& sc, double dt, double delta, double t_trunc,
                     std::uint64_t seed) {
    if (dt > 0) sc.numerics.dt = dt;
    if (delta > 0) sc.numerics.delta = delta;
    if (t_trunc > 0) sc.numerics.t_trunc = t_trunc;
    if (seed) sc.seed = seed;
    sc.numerics.validate();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification toolkit for reflecting diffusions"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // --h stays free for the reward spec

    std::string scenario_arg, out_json, out_prefix, h_arg, f_arg, vgrid_arg, stop_arg,
        lags_arg, emit_arg, estimator_arg = "both", metric_arg = "clock", ladder_arg,
        negctrl_arg, x0_arg, mode_arg = "controlled";
    int n_paths = 1000, n_samples = 500, workers = 0;
    std::uint64_t seed = 0;
    double dt = 0, delta = 0, t_trunc = 0, lambda0_target = 0, s_budget = 0,
           tolerance = 1e-6, bin_width = 0, reference = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->set_help_flag("--help", "print help");
        cmd->add_option("--scenario", scenario_arg,
                        "scenario JSON file or builtin:<name>")
            ->required();
        cmd->add_option("--seed", seed, "seed override");
        cmd->add_option("--workers", workers, "worker threads (default: env/auto)");
        cmd->add_option("--dt", dt, "macro step override");
        cmd->add_option("--delta", delta, "reflection micro-step override");
        cmd->add_option("--t-trunc", t_trunc, "truncation horizon override");
        cmd->add_option("--x0", x0_arg, "start point override (csv)");
    };

    CLI::App* conecheck = app.add_subcommand("conecheck", "verify the cone conditions on sampled boundary points");
    add_common(conecheck);
    conecheck->add_option("--samples", n_samples, "boundary sample count");
    conecheck->add_option("--json", out_json, "write the full report here");

    CLI::App* simulate = app.add_subcommand("simulate", "run controlled / reflected paths");
    add_common(simulate);
    simulate->add_option("--paths", n_paths, "number of paths");
    simulate->add_option("--lambda0-target", lambda0_target, "interior-clock horizon");
    simulate->add_option("--s-budget", s_budget, "controlled-clock budget");
    simulate->add_option("--out", out_prefix, "output prefix")->required();
    simulate->add_option("--emit", emit_arg, "full dumps: controlled|constrained|sder");
    simulate->add_option("--mode", mode_arg, "controlled (default) or sder");

    CLI::App* resolvent = app.add_subcommand("resolvent", "Monte Carlo discounted-reward estimate");
    add_common(resolvent);
    resolvent->add_option("--h", h_arg, "reward JSON, e.g. {\"kind\":\"exponential\",\"a\":[-1]}")
        ->required();
    resolvent->add_option("--paths", n_paths, "number of paths");
    resolvent->add_option("--estimator", estimator_arg, "controlled|constrained|both");
    resolvent->add_option("--json", out_json, "write the estimates here");

    CLI::App* viscosity = app.add_subcommand("viscosity", "subsolution check on a saved value grid");
    add_common(viscosity);
    viscosity->add_option("--vgrid", vgrid_arg, "grid JSON: {points, values, h}")->required();
    viscosity->add_option("--f", f_arg, "test function JSON")->required();
    viscosity->add_option("--tolerance", tolerance, "slack tolerance");
    viscosity->add_option("--json", out_json, "write the report here");

    CLI::App* markov = app.add_subcommand("markov-test", "strong-Markov restart comparison");
    add_common(markov);
    markov->add_option("--stop", stop_arg, "boundary | face:<i> | ball:<c...,r> | time:<t>")
        ->required();
    markov->add_option("--lags", lags_arg, "probe lags, csv")->required();
    markov->add_option("--paths", n_paths, "paths per arm");
    markov->add_option("--bin-width", bin_width, "entry-cell width");
    markov->add_option("--negative-control", negctrl_arg, "displaced start (csv)");
    markov->add_option("--json", out_json, "write the report here");

    CLI::App* converge = app.add_subcommand("converge", "metric across a (dt,delta) ladder");
    add_common(converge);
    converge->add_option("--ladder", ladder_arg, "dt:delta pairs, e.g. 1e-2:1e-3,1e-3:3e-4")
        ->required();
    converge->add_option("--metric", metric_arg, "resolvent|excursion|clock");
    converge->add_option("--paths", n_paths, "paths per rung");
    converge->add_option("--h", h_arg, "reward JSON (resolvent metric)");
    converge->add_option("--reference", reference, "reference value (resolvent metric)");

    CLI11_PARSE(app, argc, argv);

    try {
        ScenarioConfig sc = load_scenario_arg(scenario_arg);
        apply_overrides(sc, dt, delta, t_trunc, seed);
        if (workers <= 0) workers = default_workers();
        if (!x0_arg.empty()) sc.x0 = parse_point(x0_arg, sc.domain.dim);

        if (*conecheck) {
            SweepSummary sweep = boundary_sweep(sc.domain, n_samples, sc.seed);
            std::printf("conecheck %s: %zu points, min margin %.6g, min beta %.6g -> %s\n",
                        sc.name.c_str(), sweep.reports.size(), sweep.min_margin,
                        sweep.min_beta, sweep.all_hold ? "PASS" : "FAIL");
            if (!out_json.empty()) {
                json rows = json::array();
                for (const auto& rep : sweep.reports) {
                    json r;
                    json x = json::array();
                    for (int i = 0; i < rep.x.n; ++i) x.push_back(rep.x[i]);
                    r["x"] = x;
                    r["active"] = rep.active;
                    r["direction_holds"] = rep.direction.holds;
                    r["margin"] = rep.direction.margin;
                    r["game_holds"] = rep.game.holds;
                    r["beta"] = rep.game.beta;
                    rows.push_back(r);
                }
                json o{{"scenario", sc.name},
                       {"scenario_hash", sc.hash()},
                       {"all_hold", sweep.all_hold},
                       {"min_margin", sweep.min_margin},
                       {"min_beta", sweep.min_beta},
                       {"reports", rows}};
                write_file(out_json, o.dump(2));
            }
            return sweep.all_hold ? 0 : 1;
        }

        if (*simulate) {
            StopRule stop = StopRule::lambda0(sc.numerics.t_trunc);
            if (lambda0_target > 0) stop = StopRule::lambda0(lambda0_target);
            if (s_budget > 0) stop = StopRule::budget(s_budget);
            bool want_sder = mode_arg == "sder" || emit_arg == "sder";
            std::vector<PathSummary> rows(static_cast<size_t>(n_paths));
            std::vector<std::string> dumps(static_cast<size_t>(n_paths));
            parallel_for(n_paths, workers, [&](int p) {
                ControlledPath path = simulate_controlled(
                    sc.domain, sc.coeffs, sc.behavior, sc.x0, stop, sc.numerics, sc.seed,
                    static_cast<std::uint64_t>(p), want_sder);
                rows[static_cast<size_t>(p)] = summarize_path(path, sc.domain);
                if (emit_arg == "controlled")
                    dumps[static_cast<size_t>(p)] = controlled_path_json(path);
                else if (emit_arg == "constrained")
                    dumps[static_cast<size_t>(p)] =
                        constrained_path_json(time_change(path, sc.numerics.dt));
                else if (emit_arg == "sder")
                    dumps[static_cast<size_t>(p)] = sder_path_json(controlled_to_sder(path));
            });
            write_file(out_prefix + "_summary.csv",
                       path_summaries_csv(rows, sc.domain.dim, workers, sc.hash()));
            if (!emit_arg.empty()) {
                for (int p = 0; p < n_paths; ++p)
                    write_file(out_prefix + "_path" + std::to_string(p) + "." + emit_arg +
                                   ".json",
                               dumps[static_cast<size_t>(p)]);
            }
            std::printf("simulate %s: %d paths -> %s_summary.csv (workers=%d)\n",
                        sc.name.c_str(), n_paths, out_prefix.c_str(), workers);
            return 0;
        }

        if (*resolvent) {
            TestFunction h = parse_test_function(h_arg, sc.domain.dim);
            json out = json::array();
            double mean_c = 0, mean_x = 0;
            bool both = estimator_arg == "both";
            if (both || estimator_arg == "controlled") {
                ResolventEstimate est =
                    estimate_vh_controlled(sc.domain, sc.coeffs, sc.behavior, h, sc.x0,
                                           n_paths, sc.numerics, sc.seed, workers, sc.hash());
                est.per_path.clear();
                mean_c = est.mean;
                std::printf("controlled-clock: %.8g +- %.3g (trunc <= %.3g, N=%d)\n",
                            est.mean, est.stderr_mean, est.truncation_bound, est.n_paths);
                out.push_back(json::parse(estimate_json(est)));
            }
            if (both || estimator_arg == "constrained") {
                ResolventEstimate est = estimate_vh_constrained(
                    sc.domain, sc.coeffs, sc.behavior, h, sc.x0, n_paths, sc.numerics,
                    sc.seed + 1, workers, sc.hash());
                est.per_path.clear();
                mean_x = est.mean;
                std::printf("constrained-clock: %.8g +- %.3g (trunc <= %.3g, N=%d)\n",
                            est.mean, est.stderr_mean, est.truncation_bound, est.n_paths);
                out.push_back(json::parse(estimate_json(est)));
            }
            if (both)
                std::printf("difference: %.3g\n", mean_c - mean_x);
            if (!out_json.empty()) write_file(out_json, out.dump(2));
            return 0;
        }

        if (*viscosity) {
            std::ifstream in(vgrid_arg);
            if (!in) throw ScenarioError("cannot open vgrid file: " + vgrid_arg);
            std::stringstream ss;
            ss << in.rdbuf();
            json g = json::parse(ss.str());
            VGrid grid;
            for (const auto& p : g.at("points")) {
                Vecd v(sc.domain.dim);
                for (int i = 0; i < sc.domain.dim; ++i) v[i] = p[i].get<double>();
                grid.points.push_back(v);
            }
            for (const auto& v : g.at("values")) grid.values.push_back(v.get<double>());
            grid.h = parse_test_function(g.at("h").dump(), sc.domain.dim);
            TestFunction f = parse_test_function(f_arg, sc.domain.dim);
            ViscosityReport rep =
                viscosity_subsolution_check(grid, f, sc.domain, sc.coeffs, tolerance);
            std::printf("viscosity: argmax branch=%s slack=%.6g cone=%.6g -> %s\n",
                        rep.branch.c_str(), rep.interior_slack, rep.boundary_cone_max,
                        rep.holds ? "PASS" : "FAIL");
            if (!out_json.empty()) write_file(out_json, viscosity_report_json(rep));
            return rep.holds ? 0 : 1;
        }

        if (*markov) {
            StoppingRule rule = parse_stop(stop_arg, sc.domain.dim);
            std::vector<double> lags = parse_doubles(lags_arg);
            RestartTestOptions opts;
            opts.bin_width = bin_width;
            RestartTestReport rep =
                run_restart_test(sc, rule, lags, n_paths, sc.seed, opts);
            std::printf("markov-test %s: rule=%s bins=%d fired=%d/%d min_p=%.4g -> %s\n",
                        sc.name.c_str(), rep.rule.c_str(), rep.compared_bins, rep.n_fired,
                        rep.n_paths, rep.min_p, rep.min_p >= 0.01 ? "PASS" : "FAIL");
            bool ok = rep.min_p >= 0.01;
            if (!negctrl_arg.empty()) {
                Vecd far = parse_point(negctrl_arg, sc.domain.dim);
                RestartTestReport neg = run_restart_negative_control(
                    sc, rule, lags.front(), n_paths, sc.seed, far, opts);
                std::printf("negative control: min_p=%.4g -> %s\n", neg.min_p,
                            neg.min_p < 0.01 ? "PASS" : "FAIL");
                ok = ok && neg.min_p < 0.01;
            }
            if (!out_json.empty()) write_file(out_json, restart_report_json(rep));
            return ok ? 0 : 1;
        }

        if (*converge) {
            std::vector<std::pair<double, double>> ladder;
            std::stringstream ss(ladder_arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                auto pos = tok.find(':');
                if (pos == std::string::npos)
                    throw ScenarioError("ladder entries look like dt:delta");
                ladder.emplace_back(std::stod(tok.substr(0, pos)),
                                    std::stod(tok.substr(pos + 1)));
            }
            ConvMetric metric = ConvMetric::ClockResidual;
            if (metric_arg == "resolvent") metric = ConvMetric::ResolventError;
            else if (metric_arg == "excursion") metric = ConvMetric::MaxBoundaryExcursion;
            else if (metric_arg != "clock") throw ScenarioError("unknown metric: " + metric_arg);
            TestFunction h = h_arg.empty() ? TestFunction::one()
                                           : parse_test_function(h_arg, sc.domain.dim);
            auto table = convergence_study(sc, ladder, metric, n_paths, sc.seed, h, reference);
            std::printf("%12s %12s %16s\n", "dt", "delta", metric_arg.c_str());
            bool monotone = true;
            for (size_t i = 0; i < table.size(); ++i) {
                std::printf("%12.4g %12.4g %16.8g\n", table[i].dt, table[i].delta,
                            table[i].metric);
                if (i > 0 && table[i].metric > table[i - 1].metric) monotone = false;
            }
            std::printf("trend: %s\n", monotone ? "non-increasing" : "mixed");
            return 0;
        }
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    }
    return 2;
}
