#pragma once

#include <vector>

#include "refldiff/common.hpp"
#include "refldiff/controlled.hpp"

namespace refldiff {

struct TauJump {
    double t = 0.0;    // physical time of the jump
    double s_lo = 0.0; // controlled time at jump start
    double s_hi = 0.0; // controlled time at jump end
};

/// Right-continuous generalized inverse tau(t) = inf{s : lam0(s) > t},
/// built exactly from the path's interior-clock breakpoints.
class TimeChange {
public:
    explicit TimeChange(const ControlledPath& path);  // throws ZeroLambda0

    double tau(double t) const;
    double tau0() const { return tau0_; }
    double horizon() const { return horizon_; }  // terminal lam0
    const std::vector<TauJump>& jumps() const { return jumps_; }
    double max_jump() const;

private:
    std::vector<double> s_, l0_;
    std::vector<TauJump> jumps_;
    double tau0_ = 0.0;
    double horizon_ = 0.0;
};

TimeChange invert_clock(const ControlledPath& path);

struct ConstrainedSample {
    double t = 0.0;
    Vecd x;
};

struct ConstrainedAtom {
    double t = 0.0;
    Vecd x;
    Vecd u;
    double mass = 0.0;
    int face = -1;
};

/// Time-changed path X = Y o tau with the boundary measure pushed forward.
struct ConstrainedPath {
    int dim = 0;
    std::vector<ConstrainedSample> samples;   // breakpoints (+ uniform grid)
    std::vector<ConstrainedAtom> atoms;       // chronological
    std::vector<TauJump> tau_jumps;
    double tau0 = 0.0;
    double horizon = 0.0;
    double dt = 0.0;
    double delta = 0.0;

    double lambda_total() const;
    /// cumulative boundary mass lambda(t)
    double lambda_at(double t) const;
    /// linear interpolation between samples (right-continuous at jumps)
    Vecd x_at(double t) const;
    /// max over samples of the violation depth against a domain
    double max_excursion(const DomainSpec& dom) const;
};

/// out_dt > 0 adds a uniform physical-time grid on top of the tau
/// breakpoints; out_dt <= 0 keeps breakpoints only.
ConstrainedPath time_change(const ControlledPath& path, double out_dt = 0.0);

struct NaturalityReport {
    double max_atom_distance = 0.0;  // max |atom.x - X(atom.t)|
    double max_lambda_jump = 0.0;    // largest single-time boundary mass
};

NaturalityReport check_natural(const ConstrainedPath& cp);

}  // namespace refldiff
