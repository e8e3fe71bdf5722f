#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refldiff/resolvent.hpp"
#include "refldiff/sder.hpp"
#include "refldiff/scenario.hpp"
#include "refldiff/stats.hpp"
#include "refldiff/timechange.hpp"

namespace refldiff {

/// Safe builtin stopping rules, evaluated on the physical clock
/// (t, X(t)) = (lam0, Y) seen at each event.
struct StoppingRule {
    enum Kind { HitBoundary, HitBall, HitFace, FixedTime } kind = HitBoundary;
    Vecd center;
    double radius = 0.0;  // HitBall
    int face = 0;         // HitFace
    double time = 1.0;    // FixedTime

    bool fires(const DomainSpec& dom, double t, const Vecd& x) const;
    std::string describe() const;

    static StoppingRule boundary() { return StoppingRule{}; }
    static StoppingRule ball(const Vecd& c, double r) {
        StoppingRule s;
        s.kind = HitBall;
        s.center = c;
        s.radius = r;
        return s;
    }
    static StoppingRule fixed_time(double t) {
        StoppingRule s;
        s.kind = FixedTime;
        s.time = t;
        return s;
    }
};

struct BinKs {
    std::vector<int> cell;
    int count = 0;
    double lag = 0.0;
    int coordinate = 0;
    double statistic = 0.0;
    double p_value = 1.0;
};

struct RestartTestReport {
    std::string rule;
    std::string bin_definition;
    int n_paths = 0;
    int n_fired = 0;
    std::vector<BinKs> results;
    double min_p = 1.0;
    int compared_bins = 0;
};

struct RestartTestOptions {
    double bin_width = 0.0;     // 0 -> 0.25 * diameter
    int min_bin_count = 50;
    double sigma_horizon = 50.0;  // give up on paths whose rule never fires
};

/// Strong-Markov restart comparison: bins X(sigma) into spatial cells and,
/// per populated cell, KS-compares coordinate marginals of X(sigma + lag)
/// against fresh paths restarted from the cell's own entry points.
RestartTestReport run_restart_test(const ScenarioConfig& sc, const StoppingRule& rule,
                                   const std::vector<double>& lags, int n_paths,
                                   std::uint64_t seed,
                                   const RestartTestOptions& opts = {});

/// Negative control: the most populated cell's restart samples against
/// fresh paths from a displaced start. Expected to reject (small p).
RestartTestReport run_restart_negative_control(const ScenarioConfig& sc,
                                               const StoppingRule& rule, double lag,
                                               int n_paths, std::uint64_t seed,
                                               const Vecd& far_start,
                                               const RestartTestOptions& opts = {});

/// Calibration control: two independent fresh arms from the same start.
KsResult restart_calibration_control(const ScenarioConfig& sc, double lag, int n_paths,
                                     std::uint64_t seed_a, std::uint64_t seed_b,
                                     int coordinate = 0);

enum class ConvMetric { ResolventError, MaxBoundaryExcursion, ClockResidual };

struct ConvergenceRung {
    double dt = 0.0;
    double delta = 0.0;
    double metric = 0.0;
};

/// Re-runs a metric over a (dt, delta) ladder with common random numbers.
std::vector<ConvergenceRung> convergence_study(const ScenarioConfig& sc,
                                               const std::vector<std::pair<double, double>>& ladder,
                                               ConvMetric metric, int n_paths,
                                               std::uint64_t seed,
                                               const TestFunction& h,
                                               double reference = 0.0);

// --- emission ---------------------------------------------------------

struct PathSummary {
    std::uint64_t path_index = 0;
    double terminal_s = 0.0;
    double lam0 = 0.0;
    double lam1 = 0.0;
    size_t n_atoms = 0;
    double max_excursion = 0.0;
    Vecd terminal_y;
};

PathSummary summarize_path(const ControlledPath& path, const DomainSpec& dom);

std::string path_summaries_csv(const std::vector<PathSummary>& rows, int dim,
                               int workers, std::uint64_t scenario_hash);

std::string controlled_path_json(const ControlledPath& path);
std::string constrained_path_json(const ConstrainedPath& path);
std::string sder_path_json(const SderPath& path);
std::string restart_report_json(const RestartTestReport& rep);
std::string estimate_json(const ResolventEstimate& est);
std::string viscosity_report_json(const ViscosityReport& rep);

void write_file(const std::string& path, const std::string& content);

}  // namespace refldiff
