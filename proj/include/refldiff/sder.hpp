#pragma once

#include <vector>

#include "refldiff/common.hpp"
#include "refldiff/controlled.hpp"
#include "refldiff/timechange.hpp"

namespace refldiff {

struct SderAtom {
    double t = 0.0;
    Vecd gamma;       // unit direction
    double dlam = 0.0;
};

struct SderIncrement {
    double t = 0.0;   // physical time before the step
    double dt = 0.0;
    Vecd x_pre;
    Vecd dw;
};

/// Reflected-SDE path on the physical clock: X in closure(E0), direction
/// process gamma in G(X) and nondecreasing local time lambda.
struct SderPath {
    int dim = 0;
    std::vector<ConstrainedSample> samples;
    std::vector<SderAtom> atoms;
    std::vector<SderIncrement> increments;  // kept for oracle replay
    double lambda_total = 0.0;
    double dt = 0.0;
    double delta = 0.0;

    Vecd x_at(double t) const;
};

/// Euler scheme for the reflected SDE, defined as the time change of the
/// controlled scheme on a shared stepping kernel (identical streams give
/// bitwise-identical states).
SderPath simulate_sder(const DomainSpec& dom, const DiffusionCoefficients& coeffs,
                       const Vecd& x0, double horizon, const Numerics& num,
                       std::uint64_t seed, std::uint64_t path_index = 0);

/// Converts a controlled path: time change, then merge each same-time atom
/// block into one (gamma, dlam) with gamma the normalized mass-weighted
/// resultant. Throws DegenerateDirection on a zero resultant.
SderPath controlled_to_sder(const ControlledPath& path);

/// Per-face local times on the controlled clock.
struct PatchworkLocalTimes {
    int num_faces = 0;
    std::vector<double> s;                // event times (atom times)
    std::vector<std::vector<double>> l;   // l[i][k]: cumulative face-i mass
    std::vector<double> totals;

    double total_mass() const;
};

/// l_i accumulated atom-by-atom: unit weight on the emitting face when the
/// atom carries one, otherwise the cone decomposition at the atom point.
PatchworkLocalTimes controlled_to_patchwork(const ControlledPath& path,
                                            const DomainSpec& dom);

}  // namespace refldiff
