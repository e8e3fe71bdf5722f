#include "refldiff/sder.hpp"

#include <algorithm>
#include <cmath>

#include "refldiff/cones.hpp"
#include "refldiff/errors.hpp"

namespace refldiff {

Vecd SderPath::x_at(double t) const {
    if (samples.empty()) return Vecd();
    if (t <= samples.front().t) return samples.front().x;
    if (t >= samples.back().t) return samples.back().x;
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

SderPath controlled_to_sder(const ControlledPath& path) {
    for (const auto& a : path.atoms)
        if (a.face < 0)
            throw ScenarioError("sder conversion requires reflecting boundary behavior");

    ConstrainedPath cp = time_change(path, 0.0);

    SderPath out;
    out.dim = path.dim;
    out.samples = cp.samples;
    out.dt = path.dt;
    out.delta = path.delta;

    // merge same-physical-time atom blocks into a single (gamma, dlam)
    size_t i = 0;
    while (i < cp.atoms.size()) {
        size_t j = i;
        Vecd v = Vecd::zeros(path.dim);
        double mass = 0.0;
        while (j < cp.atoms.size() && cp.atoms[j].t == cp.atoms[i].t) {
            v += cp.atoms[j].mass * cp.atoms[j].u;
            mass += cp.atoms[j].mass;
            ++j;
        }
        double vn = norm2(v);
        if (mass > 0.0 && vn <= 1e-14 * mass)
            throw DegenerateDirection("atom block has zero resultant direction");
        out.atoms.push_back(SderAtom{cp.atoms[i].t, (1.0 / vn) * v, vn});
        out.lambda_total += vn;
        i = j;
    }

    // Brownian increments with their pre-step states and physical times
    if (path.has_increments) {
        size_t idx = 0;
        for (size_t k = 1; k < path.records.size(); ++k) {
            const auto& r = path.records[k];
            if (r.kind != StepKind::Diffusion) continue;
            const auto& prev = path.records[k - 1];
            out.increments.push_back(
                SderIncrement{prev.lam0, r.dt, prev.y, path.increments[idx]});
            ++idx;
        }
    }
    return out;
}

SderPath simulate_sder(const DomainSpec& dom, const DiffusionCoefficients& coeffs,
                       const Vecd& x0, double horizon, const Numerics& num,
                       std::uint64_t seed, std::uint64_t path_index) {
    Classification cl = classify(dom, x0);
    if (cl.region != Region::Interior && cl.region != Region::Boundary)
        throw ScenarioError("sder start must lie in the closed domain");
    ControlledPath path =
        simulate_controlled(dom, coeffs, BoundaryBehavior::oblique(), x0,
                            StopRule::lambda0(horizon), num, seed, path_index,
                            /*keep_increments=*/true);
    return controlled_to_sder(path);
}

double PatchworkLocalTimes::total_mass() const {
    double s = 0;
    for (double v : totals) s += v;
    return s;
}

PatchworkLocalTimes controlled_to_patchwork(const ControlledPath& path,
                                            const DomainSpec& dom) {
    PatchworkLocalTimes out;
    out.num_faces = dom.num_faces();
    out.totals.assign(out.num_faces, 0.0);
    out.l.assign(out.num_faces, {});

    std::vector<double> cum(out.num_faces, 0.0);
    for (const auto& a : path.atoms) {
        if (a.face >= 0) {
            cum[a.face] += a.mass;  // single-face fast path
        } else {
            // attribute through the cone decomposition at the atom point
            Vecd z = a.x;
            Classification cl = classify(dom, z);
            if (cl.region != Region::Boundary) {
                int best = 0;
                double bestv = 1e300;
                for (int i = 0; i < dom.num_faces(); ++i) {
                    double v = std::abs(dom.faces[i].evaluate(z).value);
                    if (v < bestv) {
                        bestv = v;
                        best = i;
                    }
                }
                project_to_face(dom, best, z);
                cl = classify(dom, z);
                if (cl.region != Region::Boundary)
                    throw NotInCone("atom is not attributable to a boundary point");
            }
            LocalBoundaryData local = local_boundary_data(dom, z, false);
            std::vector<double> eta = decompose_direction(local, a.u, dom.num_faces());
            for (int i = 0; i < dom.num_faces(); ++i) cum[i] += a.mass * eta[i];
        }
        out.s.push_back(a.s);
        for (int i = 0; i < out.num_faces; ++i) out.l[i].push_back(cum[i]);
    }
    out.totals = cum;
    return out;
}

}  // namespace refldiff
