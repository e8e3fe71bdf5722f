#include "refldiff/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "refldiff/errors.hpp"
#include "refldiff/parallel.hpp"

namespace refldiff {

using nlohmann::json;

bool StoppingRule::fires(const DomainSpec& dom, double t, const Vecd& x) const {
    switch (kind) {
        case HitBoundary:
            return classify(dom, x).region != Region::Interior;
        case HitBall:
            return dist(x, center) <= radius;
        case HitFace:
            return dom.faces[face].evaluate(x).value <= dom.boundary_tol;
        case FixedTime:
            return t >= time;
    }
    return false;
}

std::string StoppingRule::describe() const {
    char buf[128];
    switch (kind) {
        case HitBoundary:
            return "first-hit-boundary";
        case HitBall:
            std::snprintf(buf, sizeof buf, "first-hit-ball(r=%g)", radius);
            return buf;
        case HitFace:
            std::snprintf(buf, sizeof buf, "first-hit-face(%d)", face);
            return buf;
        case FixedTime:
            std::snprintf(buf, sizeof buf, "fixed-time(%g)", time);
            return buf;
    }
    return "?";
}

namespace {

struct ArmSample {
    bool fired = false;
    Vecd entry;
    std::vector<Vecd> at_lag;  // aligned with sorted lags
};

// run one path to the rule, then record X at sigma + each lag
ArmSample run_to_rule(const ScenarioConfig& sc, const StoppingRule& rule,
                      const std::vector<double>& lags, double horizon,
                      std::uint64_t seed, std::uint64_t stream) {
    ArmSample out;
    Stepper st(sc.domain, sc.coeffs, sc.behavior, sc.numerics, sc.x0,
               CounterRng(seed, stream));
    if (rule.fires(sc.domain, 0.0, sc.x0)) {
        out.fired = true;
        out.entry = sc.x0;
    }
    while (!out.fired) {
        if (st.lam0() > horizon) return out;
        st.step(sc.numerics.dt);
        if (rule.fires(sc.domain, st.lam0(), st.y())) {
            out.fired = true;
            out.entry = st.y();
        }
    }
    double sigma = st.lam0();
    for (double lag : lags) {
        double target = sigma + lag;
        while (st.lam0() < target) st.step(target - st.lam0());
        out.at_lag.push_back(st.y());
    }
    return out;
}

// fresh path from a given start, recording X at each lag
std::vector<Vecd> run_fresh(const ScenarioConfig& sc, const Vecd& start,
                            const std::vector<double>& lags, std::uint64_t seed,
                            std::uint64_t stream) {
    Stepper st(sc.domain, sc.coeffs, sc.behavior, sc.numerics, start,
               CounterRng(seed, stream));
    std::vector<Vecd> out;
    for (double lag : lags) {
        while (st.lam0() < lag) st.step(lag - st.lam0());
        out.push_back(st.y());
    }
    return out;
}

std::vector<int> bin_cell(const DomainSpec& dom, const Vecd& x, double width) {
    std::vector<int> cell(static_cast<size_t>(dom.dim));
    for (int d = 0; d < dom.dim; ++d)
        cell[static_cast<size_t>(d)] =
            static_cast<int>(std::floor((x[d] - dom.box.lo[d]) / width));
    return cell;
}

}  // namespace

RestartTestReport run_restart_test(const ScenarioConfig& sc, const StoppingRule& rule,
                                   const std::vector<double>& lags, int n_paths,
                                   std::uint64_t seed, const RestartTestOptions& opts) {
    std::vector<double> sorted_lags = lags;
    std::sort(sorted_lags.begin(), sorted_lags.end());
    double width = opts.bin_width > 0 ? opts.bin_width : 0.25 * sc.domain.diameter;

    std::vector<ArmSample> arm(static_cast<size_t>(n_paths));
    parallel_for(n_paths, default_workers(), [&](int p) {
        arm[static_cast<size_t>(p)] = run_to_rule(sc, rule, sorted_lags,
                                                  opts.sigma_horizon, seed,
                                                  static_cast<std::uint64_t>(p));
    });

    RestartTestReport rep;
    rep.rule = rule.describe();
    char bdesc[96];
    std::snprintf(bdesc, sizeof bdesc, "uniform-cells(width=%g)", width);
    rep.bin_definition = bdesc;
    rep.n_paths = n_paths;

    std::map<std::vector<int>, std::vector<int>> bins;  // cell -> path indices
    for (int p = 0; p < n_paths; ++p) {
        if (!arm[static_cast<size_t>(p)].fired) continue;
        ++rep.n_fired;
        bins[bin_cell(sc.domain, arm[static_cast<size_t>(p)].entry, width)].push_back(p);
    }

    std::vector<std::pair<std::vector<int>, std::vector<int>>> kept;
    for (auto& [cell, members] : bins)
        if (static_cast<int>(members.size()) >= opts.min_bin_count)
            kept.emplace_back(cell, members);
    if (kept.empty())
        throw UnderpopulatedBins("no spatial cell reached the minimum sample count");

    // fresh arm, one path per kept member, restarted from the member's entry
    std::uint64_t fresh_seed = seed ^ 0xf5e5a1d3u;
    rep.min_p = 1.0;
    for (auto& [cell, members] : kept) {
        std::vector<std::vector<Vecd>> fresh(members.size());
        parallel_for(static_cast<int>(members.size()), default_workers(), [&](int k) {
            int p = members[static_cast<size_t>(k)];
            fresh[static_cast<size_t>(k)] =
                run_fresh(sc, arm[static_cast<size_t>(p)].entry, sorted_lags, fresh_seed,
                          static_cast<std::uint64_t>(p));
        });
        for (size_t li = 0; li < sorted_lags.size(); ++li) {
            for (int d = 0; d < sc.domain.dim; ++d) {
                std::vector<double> a, b;
                a.reserve(members.size());
                b.reserve(members.size());
                for (size_t k = 0; k < members.size(); ++k) {
                    a.push_back(arm[static_cast<size_t>(members[k])].at_lag[li][d]);
                    b.push_back(fresh[k][li][d]);
                }
                KsResult ks = ks_two_sample(a, b);
                BinKs row;
                row.cell = cell;
                row.count = static_cast<int>(members.size());
                row.lag = sorted_lags[li];
                row.coordinate = d;
                row.statistic = ks.statistic;
                row.p_value = ks.p_value;
                rep.min_p = std::min(rep.min_p, ks.p_value);
                rep.results.push_back(std::move(row));
            }
        }
        ++rep.compared_bins;
    }
    return rep;
}

RestartTestReport run_restart_negative_control(const ScenarioConfig& sc,
                                               const StoppingRule& rule, double lag,
                                               int n_paths, std::uint64_t seed,
                                               const Vecd& far_start,
                                               const RestartTestOptions& opts) {
    std::vector<double> lags{lag};
    double width = opts.bin_width > 0 ? opts.bin_width : 0.25 * sc.domain.diameter;

    std::vector<ArmSample> arm(static_cast<size_t>(n_paths));
    parallel_for(n_paths, default_workers(), [&](int p) {
        arm[static_cast<size_t>(p)] = run_to_rule(sc, rule, lags, opts.sigma_horizon, seed,
                                                  static_cast<std::uint64_t>(p));
    });

    std::map<std::vector<int>, std::vector<int>> bins;
    for (int p = 0; p < n_paths; ++p)
        if (arm[static_cast<size_t>(p)].fired)
            bins[bin_cell(sc.domain, arm[static_cast<size_t>(p)].entry, width)].push_back(p);
    std::vector<int> best;
    std::vector<int> best_cell;
    for (auto& [cell, members] : bins)
        if (members.size() > best.size()) {
            best = members;
            best_cell = cell;
        }
    if (static_cast<int>(best.size()) < opts.min_bin_count)
        throw UnderpopulatedBins("negative control cell under the minimum sample count");

    std::vector<std::vector<Vecd>> fresh(best.size());
    std::uint64_t fresh_seed = seed ^ 0xab12cd34u;
    parallel_for(static_cast<int>(best.size()), default_workers(), [&](int k) {
        fresh[static_cast<size_t>(k)] = run_fresh(sc, far_start, lags, fresh_seed,
                                                  static_cast<std::uint64_t>(k));
    });

    RestartTestReport rep;
    rep.rule = rule.describe() + " vs displaced start";
    rep.bin_definition = "most-populated-cell";
    rep.n_paths = n_paths;
    rep.n_fired = static_cast<int>(best.size());
    rep.min_p = 1.0;
    for (int d = 0; d < sc.domain.dim; ++d) {
        std::vector<double> a, b;
        for (size_t k = 0; k < best.size(); ++k) {
            a.push_back(arm[static_cast<size_t>(best[k])].at_lag[0][d]);
            b.push_back(fresh[k][0][d]);
        }
        KsResult ks = ks_two_sample(a, b);
        BinKs row;
        row.cell = best_cell;
        row.count = static_cast<int>(best.size());
        row.lag = lag;
        row.coordinate = d;
        row.statistic = ks.statistic;
        row.p_value = ks.p_value;
        rep.min_p = std::min(rep.min_p, ks.p_value);
        rep.results.push_back(std::move(row));
    }
    rep.compared_bins = 1;
    return rep;
}

KsResult restart_calibration_control(const ScenarioConfig& sc, double lag, int n_paths,
                                     std::uint64_t seed_a, std::uint64_t seed_b,
                                     int coordinate) {
    std::vector<double> lags{lag};
    std::vector<double> a(static_cast<size_t>(n_paths)), b(static_cast<size_t>(n_paths));
    parallel_for(n_paths, default_workers(), [&](int p) {
        a[static_cast<size_t>(p)] =
            run_fresh(sc, sc.x0, lags, seed_a, static_cast<std::uint64_t>(p))[0][coordinate];
        b[static_cast<size_t>(p)] =
            run_fresh(sc, sc.x0, lags, seed_b, static_cast<std::uint64_t>(p))[0][coordinate];
    });
    return ks_two_sample(a, b);
}

std::vector<ConvergenceRung> convergence_study(
    const ScenarioConfig& sc, const std::vector<std::pair<double, double>>& ladder,
    ConvMetric metric, int n_paths, std::uint64_t seed, const TestFunction& h,
    double reference) {
    if (ladder.size() < 2) throw ScenarioError("convergence ladder needs >= 2 rungs");
    std::vector<ConvergenceRung> out;
    for (auto [dt, delta] : ladder) {
        Numerics num = sc.numerics;
        num.dt = dt;
        num.delta = delta;
        num.validate();
        ConvergenceRung rung{dt, delta, 0.0};
        if (metric == ConvMetric::ResolventError) {
            ResolventEstimate est = estimate_vh_controlled(
                sc.domain, sc.coeffs, sc.behavior, h, sc.x0, n_paths, num, seed);
            rung.metric = std::abs(est.mean - reference);
        } else {
            double horizon = std::min(1.0, num.t_trunc);
            std::vector<double> worst(static_cast<size_t>(n_paths), 0.0);
            parallel_for(n_paths, default_workers(), [&](int p) {
                ControlledPath path = simulate_controlled(
                    sc.domain, sc.coeffs, sc.behavior, sc.x0, StopRule::lambda0(horizon),
                    num, seed, static_cast<std::uint64_t>(p));
                double w = 0.0;
                if (metric == ConvMetric::MaxBoundaryExcursion) {
                    for (const auto& r : path.records)
                        w = std::max(w, sc.domain.violation_depth(r.y));
                } else {
                    w = path.clock_residual();
                }
                worst[static_cast<size_t>(p)] = w;
            });
            rung.metric = *std::max_element(worst.begin(), worst.end());
        }
        out.push_back(rung);
    }
    return out;
}

PathSummary summarize_path(const ControlledPath& path, const DomainSpec& dom) {
    PathSummary s;
    s.path_index = path.path_index;
    s.terminal_s = path.terminal_s();
    s.lam0 = path.terminal_lam0();
    s.lam1 = path.terminal_lam1();
    s.n_atoms = path.atoms.size();
    for (const auto& r : path.records)
        s.max_excursion = std::max(s.max_excursion, dom.violation_depth(r.y));
    s.terminal_y = path.terminal_y();
    return s;
}

std::string path_summaries_csv(const std::vector<PathSummary>& rows, int dim,
                               int workers, std::uint64_t scenario_hash) {
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "# scenario_hash=%llu workers=%d\n",
                  static_cast<unsigned long long>(scenario_hash), workers);
    out += buf;
    out += "path,terminal_s,lambda0,lambda1,atoms,max_excursion";
    for (int d = 0; d < dim; ++d) {
        std::snprintf(buf, sizeof buf, ",y%d", d);
        out += buf;
    }
    out += "\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%.17g,%zu,%.17g",
                      static_cast<unsigned long long>(r.path_index), r.terminal_s, r.lam0,
                      r.lam1, r.n_atoms, r.max_excursion);
        out += buf;
        for (int d = 0; d < dim; ++d) {
            std::snprintf(buf, sizeof buf, ",%.17g", r.terminal_y[d]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

namespace {

json vec_json(const Vecd& v) {
    json a = json::array();
    for (int i = 0; i < v.n; ++i) a.push_back(v[i]);
    return a;
}

}  // namespace

std::string controlled_path_json(const ControlledPath& path) {
    json o;
    o["dim"] = path.dim;
    o["seed"] = path.seed;
    o["path_index"] = path.path_index;
    o["dt"] = path.dt;
    o["delta"] = path.delta;
    json recs = json::array();
    for (const auto& r : path.records) {
        recs.push_back(json{{"s", r.s},
                            {"lambda0", r.lam0},
                            {"lambda1", r.lam1},
                            {"y", vec_json(r.y)},
                            {"kind", r.kind == StepKind::Diffusion
                                         ? "diffusion"
                                         : (r.kind == StepKind::Reflection ? "reflection"
                                                                           : "nonlocal")},
                            {"face", r.face}});
    }
    o["records"] = recs;
    json atoms = json::array();
    for (const auto& a : path.atoms)
        atoms.push_back(json{{"s", a.s},
                             {"x", vec_json(a.x)},
                             {"u", vec_json(a.u)},
                             {"mass", a.mass},
                             {"face", a.face}});
    o["atoms"] = atoms;
    if (path.has_increments) {
        json incs = json::array();
        for (size_t i = 0; i < path.increments.size(); ++i)
            incs.push_back(json{{"dt", path.increment_dt[i]}, {"dw", vec_json(path.increments[i])}});
        o["increments"] = incs;
    }
    return o.dump();
}

std::string constrained_path_json(const ConstrainedPath& path) {
    json o;
    o["dim"] = path.dim;
    o["tau0"] = path.tau0;
    o["horizon"] = path.horizon;
    o["delta"] = path.delta;
    json samples = json::array();
    for (const auto& s : path.samples)
        samples.push_back(json{{"t", s.t}, {"x", vec_json(s.x)}});
    o["samples"] = samples;
    json atoms = json::array();
    for (const auto& a : path.atoms)
        atoms.push_back(json{{"t", a.t},
                             {"x", vec_json(a.x)},
                             {"u", vec_json(a.u)},
                             {"mass", a.mass},
                             {"face", a.face}});
    o["atoms"] = atoms;
    json jumps = json::array();
    for (const auto& j : path.tau_jumps)
        jumps.push_back(json{{"t", j.t}, {"s_lo", j.s_lo}, {"s_hi", j.s_hi}});
    o["tau_jumps"] = jumps;
    return o.dump();
}

std::string sder_path_json(const SderPath& path) {
    json o;
    o["dim"] = path.dim;
    o["dt"] = path.dt;
    o["delta"] = path.delta;
    o["lambda_total"] = path.lambda_total;
    json samples = json::array();
    for (const auto& s : path.samples)
        samples.push_back(json{{"t", s.t}, {"x", vec_json(s.x)}});
    o["samples"] = samples;
    json atoms = json::array();
    for (const auto& a : path.atoms)
        atoms.push_back(json{{"t", a.t}, {"gamma", vec_json(a.gamma)}, {"dlam", a.dlam}});
    o["atoms"] = atoms;
    json incs = json::array();
    for (const auto& i : path.increments)
        incs.push_back(json{{"t", i.t}, {"dt", i.dt}, {"x_pre", vec_json(i.x_pre)}, {"dw", vec_json(i.dw)}});
    o["increments"] = incs;
    return o.dump();
}

std::string restart_report_json(const RestartTestReport& rep) {
    json o;
    o["rule"] = rep.rule;
    o["bin_definition"] = rep.bin_definition;
    o["n_paths"] = rep.n_paths;
    o["n_fired"] = rep.n_fired;
    o["compared_bins"] = rep.compared_bins;
    o["min_p"] = rep.min_p;
    json rows = json::array();
    for (const auto& r : rep.results) {
        rows.push_back(json{{"cell", r.cell},
                            {"count", r.count},
                            {"lag", r.lag},
                            {"coordinate", r.coordinate},
                            {"statistic", r.statistic},
                            {"p_value", r.p_value}});
    }
    o["results"] = rows;
    return o.dump(2);
}

std::string estimate_json(const ResolventEstimate& est) {
    json o;
    o["mean"] = est.mean;
    o["stderr"] = est.stderr_mean;
    o["truncation_bound"] = est.truncation_bound;
    o["n_paths"] = est.n_paths;
    o["estimator"] = est.estimator == EstimatorKind::ControlledClock ? "controlled-clock"
                                                                     : "constrained-clock";
    o["scenario_hash"] = est.scenario_hash;
    o["seed"] = est.seed;
    o["workers"] = est.workers;
    return o.dump(2);
}

std::string viscosity_report_json(const ViscosityReport& rep) {
    json o;
    o["argmax"] = vec_json(rep.argmax);
    o["value"] = rep.value;
    o["gap"] = rep.gap;
    o["on_boundary"] = rep.on_boundary;
    o["interior_slack"] = rep.interior_slack;
    o["boundary_cone_max"] = rep.boundary_cone_max;
    o["holds"] = rep.holds;
    o["branch"] = rep.branch;
    return o.dump(2);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << content;
}

}  // namespace refldiff
