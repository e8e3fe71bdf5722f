#include "refldiff/controlled.hpp"

#include <cmath>

#include "refldiff/errors.hpp"

namespace refldiff {

void Numerics::validate() const {
    if (!(dt > 0)) throw ScenarioError("dt must be > 0");
    double d = effective_delta();
    if (!(d > 0)) throw ScenarioError("delta must be > 0");
    if (d > std::sqrt(dt) * (1.0 + 1e-12))
        throw ScenarioError("delta must satisfy delta <= sqrt(dt)");
    if (!(t_trunc > 0)) throw ScenarioError("t_trunc must be > 0");
}

double ControlledPath::clock_residual() const {
    double worst = 0.0;
    for (const auto& r : records) {
        double res = std::abs(r.lam0 + r.lam1 - r.s) / std::max(1.0, std::abs(r.s));
        worst = std::max(worst, res);
    }
    return worst;
}

namespace {

// quintic smoothstep derivative: 30 r^2 (1-r)^2 on (0,1), 0 outside
inline double chi_prime(double r) {
    if (r <= 0.0 || r >= 1.0) return 0.0;
    double q = r * (1.0 - r);
    return 30.0 * q * q;
}

}  // namespace

int select_reflection_face(const DomainSpec& dom, const Vecd& y, double eps_phi,
                           bool steepest) {
    const int m = dom.num_faces();
    std::array<double, 16> val;
    std::array<bool, 16> viol;
    bool any = false;
    Vecd phi_grad = Vecd::zeros(dom.dim);
    for (int i = 0; i < m; ++i) {
        FaceEval fe = dom.faces[i].evaluate(y);
        val[i] = fe.value;
        viol[i] = fe.value <= 0.0;
        any = any || viol[i];
        double cp = chi_prime(-fe.value / eps_phi);
        if (cp > 0.0) phi_grad += (-cp / eps_phi) * fe.gradient;
    }
    if (!any) throw NoViolatedFace("select_reflection_face: no violated face");

    double pg = norm2(phi_grad);
    if (pg > 0.0) {
        if (!steepest) {
            for (int j = 0; j < m; ++j) {
                if (!viol[j]) continue;
                Vecd g = dom.faces[j].reflection_dir(y);
                if (dot(phi_grad, g) <= 0.0) return j;
            }
        }
        // no index qualifies numerically: steepest descent of phi
        int best = -1;
        double bestv = 1e300;
        for (int j = 0; j < m; ++j) {
            if (!viol[j]) continue;
            double v = dot(phi_grad, dom.faces[j].reflection_dir(y));
            if (v < bestv) {
                bestv = v;
                best = j;
            }
        }
        return best;
    }
    // grad(phi) vanished (violations deeper than the chi window): deepest face
    int best = -1;
    double bestv = 1e300;
    for (int j = 0; j < m; ++j) {
        if (!viol[j]) continue;
        if (val[j] < bestv) {
            bestv = val[j];
            best = j;
        }
    }
    return best;
}

Stepper::Stepper(const DomainSpec& dom, const DiffusionCoefficients& coeffs,
                 const BoundaryBehavior& behavior, const Numerics& num, Vecd y0,
                 CounterRng rng)
    : dom_(dom),
      coeffs_(coeffs),
      behavior_(behavior),
      num_(num),
      rng_(rng),
      y_(std::move(y0)) {
    delta_ = behavior_.delta > 0 ? behavior_.delta : num_.effective_delta();
    eps_phi_ = 10.0 * delta_;
    last_dw_ = Vecd::zeros(dom_.dim);
}

StepKind Stepper::step(double max_dt) {
    if (!all_finite(y_)) throw NonFiniteState("controlled state is non-finite");

    // single face pass: violation check, the per-face step cap, and the
    // shell guard for the previous move all come from these evaluations
    const int m = dom_.num_faces();
    std::array<double, 16> vals;
    std::array<double, 16> gnorm;
    bool violated = false;
    for (int i = 0; i < m; ++i) {
        dom_.faces[static_cast<size_t>(i)].value_and_gradnorm(
            y_, vals[static_cast<size_t>(i)], gnorm[static_cast<size_t>(i)]);
        if (vals[static_cast<size_t>(i)] <= 0.0) {
            violated = true;
            if (-vals[static_cast<size_t>(i)] >
                dom_.working_margin * dom_.grad_face_min[static_cast<size_t>(i)])
                throw EscapedWorkingRegion("state left the working shell");
        }
    }

    if (violated) {
        if (++block_len_ > num_.max_reflections_per_block)
            throw EscapedWorkingRegion("reflection block did not terminate");
        if (behavior_.kind == BehaviorKind::NonlocalJump) {
            double e = rng_.exponential();
            last_atom_ = BoundaryAtom{s_.value() + e, y_, Vecd::zeros(dom_.dim), e, -1};
            if (behavior_.kernel == NonlocalKernelKind::FixedPoint) {
                y_ = behavior_.target;
            } else {
                y_ = behavior_.points[rng_.uniform_index(behavior_.points.size())];
            }
            s_.add(e);
            lam1_.add(e);
            last_dt_ = e;
            last_face_ = -1;
            block_len_ = 0;
            return StepKind::Nonlocal;
        }
        int j = select_reflection_face(dom_, y_, eps_phi_, num_.steepest_descent_faces);
        Vecd u = dom_.faces[static_cast<size_t>(j)].reflection_dir(y_);
        last_atom_ = BoundaryAtom{s_.value() + delta_, y_, u, delta_, j};
        y_ += delta_ * u;
        s_.add(delta_);
        lam1_.add(delta_);
        last_dt_ = delta_;
        last_face_ = j;
        return StepKind::Reflection;
    }
    block_len_ = 0;

    // interior: adaptive Euler-Maruyama increment. The displacement cap
    // keeps any exterior excursion depth at ~kappa*delta per face: a step
    // of length c lowers psi_i by at most c|grad psi_i(y)| + H_i c^2 / 2,
    // so cap_i solves c g + H c^2/2 = psi + kappa delta g.
    const int d = dom_.dim;
    double cap = 0.5 * dom_.working_margin;
    for (int i = 0; i < m; ++i) {
        double g = gnorm[static_cast<size_t>(i)];
        double H = dom_.hess_sup[static_cast<size_t>(i)];
        double budget = vals[static_cast<size_t>(i)] +
                        num_.kappa * delta_ *
                            std::max(g, 0.25 * dom_.grad_face_min[static_cast<size_t>(i)]);
        double allowed;
        if (H > 0.0) {
            allowed = (std::sqrt(g * g + 2.0 * H * budget) - g) / H;
        } else {
            allowed = budget / std::max(g, 1e-30);
        }
        cap = std::min(cap, allowed);
    }

    Vecd b = coeffs_.drift(y_);
    double bn = norm2(b);
    double sb = coeffs_.sigma_bound(y_);
    double cs = num_.clamp * std::sqrt(static_cast<double>(d)) * sb;

    double dt_eff = std::min(num_.dt, max_dt);
    if (bn > 0 || cs > 0) {
        double root;
        if (bn > 0) {
            root = (-cs + std::sqrt(cs * cs + 4.0 * bn * cap)) / (2.0 * bn);
        } else {
            root = cap / cs;
        }
        dt_eff = std::min(dt_eff, root * root);
    }
    dt_eff = std::max(dt_eff, 1e-14 * num_.dt);

    double sq = std::sqrt(dt_eff);
    Vecd dw = rng_.normal_vec(d, num_.clamp);
    for (int i = 0; i < d; ++i) dw[i] *= sq;
    Vecd dy = coeffs_.apply_sigma(y_, dw);
    for (int i = 0; i < d; ++i) dy[i] += b[i] * dt_eff;

    y_ += dy;
    s_.add(dt_eff);
    lam0_.add(dt_eff);
    last_dt_ = dt_eff;
    last_face_ = -1;
    last_dw_ = dw;
    return StepKind::Diffusion;
}

ControlledPath simulate_controlled(const DomainSpec& dom,
                                   const DiffusionCoefficients& coeffs,
                                   const BoundaryBehavior& behavior, const Vecd& y0,
                                   StopRule stop, const Numerics& num,
                                   std::uint64_t seed, std::uint64_t path_index,
                                   bool keep_increments) {
    num.validate();
    if (y0.n != dom.dim) throw ScenarioError("initial point dimension mismatch");
    {
        Classification cl = classify(dom, y0);
        if (cl.region == Region::OutsideWorkingRegion)
            throw ScenarioError("initial point outside the working region");
    }

    ControlledPath path;
    path.dim = dom.dim;
    path.seed = seed;
    path.path_index = path_index;
    path.dt = num.dt;
    path.delta = behavior.delta > 0 ? behavior.delta : num.effective_delta();
    path.has_increments = keep_increments;

    Stepper st(dom, coeffs, behavior, num, y0, CounterRng(seed, path_index));
    path.records.push_back(PathRecord{0.0, 0.0, 0.0, y0, StepKind::Diffusion, -1, 0.0});

    const double target = stop.value;
    const std::uint64_t hard_cap = 500'000'000ULL;
    std::uint64_t steps = 0;
    while (true) {
        if (stop.kind == StopRule::Lambda0Target) {
            if (st.lam0() >= target) break;
        } else {
            if (st.s() >= target) break;
        }
        if (++steps > hard_cap) throw EscapedWorkingRegion("step budget exhausted");

        double max_dt = num.dt;
        if (stop.kind == StopRule::Lambda0Target)
            max_dt = std::min(max_dt, target - st.lam0());
        else
            max_dt = std::min(max_dt, target - st.s());

        StepKind kind = st.step(max_dt);
        path.records.push_back(PathRecord{st.s(), st.lam0(), st.lam1(), st.y(), kind,
                                          st.last_face(), st.last_dt()});
        if (kind == StepKind::Reflection || kind == StepKind::Nonlocal) {
            path.atoms.push_back(st.last_atom());
        } else if (keep_increments) {
            path.increment_dt.push_back(st.last_dt());
            path.increments.push_back(st.last_dw());
        }
    }
    return path;
}

ControlledPath restart_path(const ControlledPath& path, double tau) {
    const double send = path.terminal_s();
    if (tau < -1e-12 || tau > send * (1.0 + 1e-12) + 1e-12)
        throw OutOfRange("restart time outside the path span");
    tau = std::min(std::max(tau, 0.0), send);

    // locate the first record with s >= tau
    size_t k = 0;
    while (k < path.records.size() && path.records[k].s < tau) ++k;

    ControlledPath out;
    out.dim = path.dim;
    out.seed = path.seed;
    out.path_index = path.path_index;
    out.dt = path.dt;
    out.delta = path.delta;

    PathRecord base;
    if (k < path.records.size() && path.records[k].s <= tau) {
        base = path.records[k];
        ++k;
    } else {
        // interpolate inside (k-1, k)
        const PathRecord& a = path.records[k - 1];
        const PathRecord& b = path.records[k];
        double f = (tau - a.s) / (b.s - a.s);
        base.s = tau;
        base.lam0 = a.lam0 + f * (b.lam0 - a.lam0);
        base.lam1 = a.lam1 + f * (b.lam1 - a.lam1);
        base.y = a.y + f * (b.y - a.y);
    }

    out.records.push_back(
        PathRecord{0.0, 0.0, 0.0, base.y, StepKind::Diffusion, -1, 0.0});
    for (; k < path.records.size(); ++k) {
        const PathRecord& r = path.records[k];
        out.records.push_back(PathRecord{r.s - base.s, r.lam0 - base.lam0,
                                         r.lam1 - base.lam1, r.y, r.kind, r.face, r.dt});
    }
    for (const auto& a : path.atoms) {
        if (a.s > base.s + 1e-15)
            out.atoms.push_back(BoundaryAtom{a.s - base.s, a.x, a.u, a.mass, a.face});
    }
    return out;
}

}  // namespace refldiff
