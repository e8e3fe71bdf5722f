#include "refldiff/timechange.hpp"

#include <algorithm>
#include <cmath>

#include "refldiff/errors.hpp"

namespace refldiff {

TimeChange::TimeChange(const ControlledPath& path) {
    if (path.records.empty() || path.terminal_lam0() <= 0.0)
        throw ZeroLambda0("interior clock never increases");
    s_.reserve(path.records.size());
    l0_.reserve(path.records.size());
    for (const auto& r : path.records) {
        s_.push_back(r.s);
        l0_.push_back(r.lam0);
    }
    horizon_ = l0_.back();

    // plateaus of lam0 (maximal runs with equal value) become tau jumps
    size_t k = 0;
    while (k + 1 < l0_.size()) {
        if (l0_[k + 1] == l0_[k]) {
            size_t j = k;
            while (j + 1 < l0_.size() && l0_[j + 1] == l0_[j]) ++j;
            jumps_.push_back(TauJump{l0_[k], s_[k], s_[j]});
            k = j;
        } else {
            ++k;
        }
    }
    tau0_ = tau(0.0);
}

double TimeChange::tau(double t) const {
    if (t < 0.0) return s_.front();
    // first index with l0 > t
    auto it = std::upper_bound(l0_.begin(), l0_.end(), t);
    if (it == l0_.end()) return s_.back();
    size_t k = static_cast<size_t>(it - l0_.begin());
    if (k == 0) return s_.front();
    double dl = l0_[k] - l0_[k - 1];
    return s_[k - 1] + (t - l0_[k - 1]) * (s_[k] - s_[k - 1]) / dl;
}

double TimeChange::max_jump() const {
    double m = 0.0;
    for (const auto& j : jumps_) m = std::max(m, j.s_hi - j.s_lo);
    return m;
}

TimeChange invert_clock(const ControlledPath& path) { return TimeChange(path); }

double ConstrainedPath::lambda_total() const {
    double s = 0;
    for (const auto& a : atoms) s += a.mass;
    return s;
}

double ConstrainedPath::lambda_at(double t) const {
    double s = 0;
    for (const auto& a : atoms) {
        if (a.t <= t) s += a.mass;
    }
    return s;
}

Vecd ConstrainedPath::x_at(double t) const {
    if (samples.empty()) return Vecd();
    if (t <= samples.front().t) return samples.front().x;
    if (t >= samples.back().t) return samples.back().x;
    // last sample with t_k <= t; samples at equal t keep the latest entry
    size_t lo = 0, hi = samples.size() - 1;
    while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (samples[mid].t <= t)
            lo = mid;
        else
            hi = mid;
    }
    const auto& a = samples[lo];
    const auto& b = samples[hi];
    if (a.t == t || b.t <= a.t) return a.x;
    double f = (t - a.t) / (b.t - a.t);
    return a.x + f * (b.x - a.x);
}

double ConstrainedPath::max_excursion(const DomainSpec& dom) const {
    double worst = 0.0;
    for (const auto& smp : samples) worst = std::max(worst, dom.violation_depth(smp.x));
    return worst;
}

ConstrainedPath time_change(const ControlledPath& path, double out_dt) {
    TimeChange tc(path);

    ConstrainedPath cp;
    cp.dim = path.dim;
    cp.tau_jumps = tc.jumps();
    cp.tau0 = tc.tau0();
    cp.horizon = tc.horizon();
    cp.dt = path.dt;
    cp.delta = path.delta;

    // breakpoint samples: one per distinct lam0 value, keeping the last
    // record of each plateau (right-continuity of X)
    for (const auto& r : path.records) {
        if (!cp.samples.empty() && cp.samples.back().t == r.lam0) {
            cp.samples.back().x = r.y;
        } else {
            cp.samples.push_back(ConstrainedSample{r.lam0, r.y});
        }
    }

    if (out_dt > 0.0) {
        std::vector<ConstrainedSample> merged;
        merged.reserve(cp.samples.size() + static_cast<size_t>(cp.horizon / out_dt) + 2);
        size_t bi = 0;
        long grid_k = 0;
        double tg = 0.0;
        while (bi < cp.samples.size() || tg < cp.horizon) {
            double tb = bi < cp.samples.size() ? cp.samples[bi].t : 1e300;
            if (tg < tb && tg <= cp.horizon) {
                // interpolate grid point between breakpoints
                if (!merged.empty() && merged.back().t < tg && bi < cp.samples.size()) {
                    const auto& a = merged.back();
                    const auto& b = cp.samples[bi];
                    double f = (tg - a.t) / (b.t - a.t);
                    merged.push_back(ConstrainedSample{tg, a.x + f * (b.x - a.x)});
                }
                ++grid_k;
                tg = grid_k * out_dt;
            } else {
                if (merged.empty() || merged.back().t < tb)
                    merged.push_back(cp.samples[bi]);
                else
                    merged.back().x = cp.samples[bi].x;
                ++bi;
            }
        }
        cp.samples = std::move(merged);
    }

    // atoms: physical time = lam0 at the atom's controlled time (flat over
    // the block, so this is the left endpoint of the collapsed interval)
    size_t rec = 0;
    for (const auto& a : path.atoms) {
        while (rec + 1 < path.records.size() && path.records[rec + 1].s <= a.s) ++rec;
        cp.atoms.push_back(ConstrainedAtom{path.records[rec].lam0, a.x, a.u, a.mass, a.face});
    }
    return cp;
}

NaturalityReport check_natural(const ConstrainedPath& cp) {
    NaturalityReport rep;
    size_t i = 0;
    while (i < cp.atoms.size()) {
        size_t j = i;
        double mass = 0.0;
        while (j < cp.atoms.size() && cp.atoms[j].t == cp.atoms[i].t) {
            mass += cp.atoms[j].mass;
            ++j;
        }
        rep.max_lambda_jump = std::max(rep.max_lambda_jump, mass);
        Vecd xt = cp.x_at(cp.atoms[i].t);
        for (size_t k = i; k < j; ++k)
            rep.max_atom_distance = std::max(rep.max_atom_distance, dist(cp.atoms[k].x, xt));
        i = j;
    }
    return rep;
}

}  // namespace refldiff
