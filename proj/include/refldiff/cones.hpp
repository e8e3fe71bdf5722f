#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "refldiff/common.hpp"
#include "refldiff/geometry.hpp"

namespace refldiff {

/// Verdict for the common-test-direction condition: is there a unit
/// e in the normal cone N(x) with <g_i, e> > 0 for every active face?
struct CommonDirectionVerdict {
    bool holds = false;
    std::optional<Vecd> witness;  // unit e when holds
    double margin = 0.0;          // min_i <g_i, e>, witness normalized
};

/// Verdict for the exterior-configuration game condition: for each
/// realizable exterior subset I, the game value
///   v_I = min_{eta in simplex(I)} max_{j in I} <sum eta_i n_i, g_j>
/// must be positive; beta is the minimum over subsets.
struct GameSubsetValue {
    std::vector<int> subset;
    double value = 0.0;
    std::vector<double> weights;
};

struct GameVerdict {
    bool holds = false;
    double beta = 0.0;
    std::vector<int> worst_subset;
    std::vector<double> worst_weights;
    std::vector<GameSubsetValue> per_subset;
};

struct ConeReport {
    Vecd x;
    std::vector<int> active;
    CommonDirectionVerdict direction;
    GameVerdict game;
    bool holds() const { return direction.holds && game.holds; }
};

CommonDirectionVerdict check_condition_b(const LocalBoundaryData& local);
GameVerdict check_condition_c(const LocalBoundaryData& local);

ConeReport cone_report(const DomainSpec& dom, const Vecd& x);

/// Nonnegative coefficients eta with sum_i eta_i g_i(x) = u, supported on
/// the active faces; minimal Euclidean norm among nonnegative solutions.
/// Throws NotInCone when the best residual exceeds 1e-8.
std::vector<double> decompose_direction(const LocalBoundaryData& local, const Vecd& u,
                                        int num_faces);

struct SweepSummary {
    std::vector<ConeReport> reports;
    double min_margin = 0.0;
    double min_beta = 0.0;
    bool all_hold = false;
};

/// Samples boundary points (stratified across faces and intersections) and
/// checks both cone conditions at each.
SweepSummary boundary_sweep(const DomainSpec& dom, int n_samples, std::uint64_t seed);

}  // namespace refldiff
