#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "refldiff/coefficients.hpp"
#include "refldiff/common.hpp"
#include "refldiff/controlled.hpp"

namespace refldiff {

enum class EstimatorKind { ControlledClock, ConstrainedClock };

struct ResolventEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
    double truncation_bound = 0.0;  // e^{-T_trunc} * sup|h| on the box
    int n_paths = 0;
    EstimatorKind estimator = EstimatorKind::ControlledClock;
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    int workers = 1;
    std::vector<double> per_path;  // kept for cross-checks
};

/// Discounted running reward on the controlled clock:
/// per path, int_0^{T} e^{-lam0} h(Y) dlam0 with T = num.t_trunc.
ResolventEstimate estimate_vh_controlled(const DomainSpec& dom,
                                         const DiffusionCoefficients& coeffs,
                                         const BoundaryBehavior& behavior,
                                         const TestFunction& h, const Vecd& x0, int n_paths,
                                         const Numerics& num, std::uint64_t seed,
                                         int workers = 0, std::uint64_t scenario_hash = 0);

/// Same value through the time-changed path: int_0^{T} e^{-t} h(X(t)) dt.
ResolventEstimate estimate_vh_constrained(const DomainSpec& dom,
                                          const DiffusionCoefficients& coeffs,
                                          const BoundaryBehavior& behavior,
                                          const TestFunction& h, const Vecd& x0, int n_paths,
                                          const Numerics& num, std::uint64_t seed,
                                          int workers = 0, std::uint64_t scenario_hash = 0);

/// Product-integration of e^{-u} h(u) over one clock segment with h linear
/// between the nodes (exact for constant h; telescopes).
double discount_segment(double a, double b, double ha, double hb);

struct VGrid {
    std::vector<Vecd> points;
    std::vector<double> values;
    TestFunction h;
};

struct ViscosityReport {
    Vecd argmax;
    double value = 0.0;          // v(x*)
    double gap = 0.0;            // (v - f)(x*)
    bool on_boundary = false;
    double interior_slack = 0.0;   // v - Af - h at x*
    double boundary_cone_max = 0.0;  // max over generators of <grad f, g>
    bool holds = false;
    std::string branch;
};

/// Locates the grid argmax of v - f (ties to the lowest index) and checks
/// the subsolution inequality there: interior v - Af <= h + tol, boundary
/// the disjunction with the cone derivative max >= -tol.
ViscosityReport viscosity_subsolution_check(const VGrid& grid, const TestFunction& f,
                                            const DomainSpec& dom,
                                            const DiffusionCoefficients& coeffs,
                                            double tolerance);

/// Sign-flip wrapper: -v is checked as a subsolution for -h against -f,
/// which is the supersolution inequality for v at minima of v - f. The
/// returned report is in the flipped orientation.
ViscosityReport viscosity_supersolution_check(const VGrid& grid, const TestFunction& f,
                                              const DomainSpec& dom,
                                              const DiffusionCoefficients& coeffs,
                                              double tolerance);

/// Uniform grid over box intersected with the closed domain.
std::vector<Vecd> domain_grid(const DomainSpec& dom, double spacing);

}  // namespace refldiff
