#include "refldiff/resolvent.hpp"

#include <algorithm>
#include <cmath>

#include "refldiff/errors.hpp"
#include "refldiff/parallel.hpp"
#include "refldiff/stats.hpp"
#include "refldiff/timechange.hpp"

namespace refldiff {

double discount_segment(double a, double b, double ha, double hb) {
    double d = b - a;
    if (d <= 0.0) return 0.0;
    double eb = std::exp(-b);
    double w0 = eb * std::expm1(d);            // e^{-a} - e^{-b}
    double w1 = eb * (std::expm1(d) - d) / d;  // (e^{-a} - e^{-b} - d e^{-b}) / d
    return ha * w0 + (hb - ha) * w1;
}

namespace {

ResolventEstimate run_estimator(const DomainSpec& dom, const DiffusionCoefficients& coeffs,
                                const BoundaryBehavior& behavior, const TestFunction& h,
                                const Vecd& x0, int n_paths, const Numerics& num,
                                std::uint64_t seed, int workers,
                                std::uint64_t scenario_hash, EstimatorKind kind) {
    if (n_paths < 2) throw ScenarioError("estimator needs at least 2 paths");
    num.validate();
    if (workers <= 0) workers = default_workers();

    std::vector<double> values(static_cast<size_t>(n_paths), 0.0);
    parallel_for(n_paths, workers, [&](int p) {
        if (kind == EstimatorKind::ControlledClock) {
            Stepper st(dom, coeffs, behavior, num, x0,
                       CounterRng(seed, static_cast<std::uint64_t>(p)));
            KahanSum acc;
            double prev_l0 = 0.0;
            double prev_h = h.value(x0);
            while (st.lam0() < num.t_trunc) {
                StepKind k = st.step(num.t_trunc - st.lam0());
                double cur_h = h.value(st.y());
                if (k == StepKind::Diffusion)
                    acc.add(discount_segment(prev_l0, st.lam0(), prev_h, cur_h));
                prev_l0 = st.lam0();
                prev_h = cur_h;
            }
            values[static_cast<size_t>(p)] = acc.value();
        } else {
            // streamed time change: t = lam0 with plateau collapse, so the
            // quadrature nodes are exactly the tau breakpoints, the node
            // value at a plateau being the block-end state X(t)
            Stepper st(dom, coeffs, behavior, num, x0,
                       CounterRng(seed, static_cast<std::uint64_t>(p)));
            KahanSum acc;
            double t_a = 0.0;
            double h_a = h.value(x0);
            bool pending = false;
            double t_b = 0.0, h_b = 0.0;
            while (st.lam0() < num.t_trunc) {
                StepKind k = st.step(num.t_trunc - st.lam0());
                if (k == StepKind::Diffusion) {
                    if (pending) {
                        acc.add(discount_segment(t_a, t_b, h_a, h_b));
                        t_a = t_b;
                        h_a = h_b;
                    }
                    t_b = st.lam0();
                    h_b = h.value(st.y());
                    pending = true;
                } else if (pending) {
                    h_b = h.value(st.y());  // X(t_b) is the block end
                } else {
                    h_a = h.value(st.y());  // initial exterior block: X(0)
                }
            }
            if (pending) acc.add(discount_segment(t_a, t_b, h_a, h_b));
            values[static_cast<size_t>(p)] = acc.value();
        }
    });

    Summary s = summarize(values);
    ResolventEstimate est;
    est.mean = s.mean;
    est.stderr_mean = s.stderr_mean;
    est.truncation_bound = std::exp(-num.t_trunc) * h.sup_abs(dom.box);
    est.n_paths = n_paths;
    est.estimator = kind;
    est.scenario_hash = scenario_hash;
    est.seed = seed;
    est.workers = workers;
    est.per_path = std::move(values);
    return est;
}

}  // namespace

ResolventEstimate estimate_vh_controlled(const DomainSpec& dom,
                                         const DiffusionCoefficients& coeffs,
                                         const BoundaryBehavior& behavior,
                                         const TestFunction& h, const Vecd& x0, int n_paths,
                                         const Numerics& num, std::uint64_t seed, int workers,
                                         std::uint64_t scenario_hash) {
    return run_estimator(dom, coeffs, behavior, h, x0, n_paths, num, seed, workers,
                         scenario_hash, EstimatorKind::ControlledClock);
}

ResolventEstimate estimate_vh_constrained(const DomainSpec& dom,
                                          const DiffusionCoefficients& coeffs,
                                          const BoundaryBehavior& behavior,
                                          const TestFunction& h, const Vecd& x0, int n_paths,
                                          const Numerics& num, std::uint64_t seed, int workers,
                                          std::uint64_t scenario_hash) {
    return run_estimator(dom, coeffs, behavior, h, x0, n_paths, num, seed, workers,
                         scenario_hash, EstimatorKind::ConstrainedClock);
}

std::vector<Vecd> domain_grid(const DomainSpec& dom, double spacing) {
    if (!(spacing > 0)) throw ScenarioError("grid spacing must be > 0");
    std::vector<Vecd> pts;
    std::array<int, kMaxDim> steps{};
    for (int d = 0; d < dom.dim; ++d)
        steps[d] = std::max(1, static_cast<int>(std::floor((dom.box.hi[d] - dom.box.lo[d]) / spacing)));
    std::array<int, kMaxDim> idx{};
    while (true) {
        Vecd p(dom.dim);
        for (int d = 0; d < dom.dim; ++d) p[d] = dom.box.lo[d] + idx[d] * spacing;
        Classification cl = classify(dom, p);
        if (cl.region == Region::Interior || cl.region == Region::Boundary) pts.push_back(p);
        int d = 0;
        while (d < dom.dim) {
            if (++idx[d] <= steps[d]) break;
            idx[d] = 0;
            ++d;
        }
        if (d == dom.dim) break;
    }
    return pts;
}

ViscosityReport viscosity_supersolution_check(const VGrid& grid, const TestFunction& f,
                                              const DomainSpec& dom,
                                              const DiffusionCoefficients& coeffs,
                                              double tolerance) {
    VGrid flipped;
    flipped.points = grid.points;
    flipped.values.reserve(grid.values.size());
    for (double v : grid.values) flipped.values.push_back(-v);
    flipped.h = grid.h.negated();
    return viscosity_subsolution_check(flipped, f.negated(), dom, coeffs, tolerance);
}

ViscosityReport viscosity_subsolution_check(const VGrid& grid, const TestFunction& f,
                                            const DomainSpec& dom,
                                            const DiffusionCoefficients& coeffs,
                                            double tolerance) {
    if (grid.points.empty() || grid.points.size() != grid.values.size())
        throw ScenarioError("viscosity check needs a nonempty aligned grid");

    size_t best = 0;
    double best_gap = -1e300;
    for (size_t i = 0; i < grid.points.size(); ++i) {
        double gap = grid.values[i] - f.value(grid.points[i]);
        if (gap > best_gap + 1e-15) {  // ties keep the lowest index
            best_gap = gap;
            best = i;
        }
    }

    ViscosityReport rep;
    rep.argmax = grid.points[best];
    rep.value = grid.values[best];
    rep.gap = best_gap;

    double af = f.generator(coeffs, rep.argmax);
    rep.interior_slack = rep.value - af - grid.h.value(rep.argmax);

    Classification cl = classify(dom, rep.argmax);
    rep.on_boundary = cl.region == Region::Boundary;
    if (!rep.on_boundary) {
        rep.holds = rep.interior_slack <= tolerance;
        rep.branch = "interior";
    } else {
        Vecd gf = f.gradient(rep.argmax);
        double cone_max = -1e300;
        for (const auto& [face, g] : reflection_cone(dom, rep.argmax))
            cone_max = std::max(cone_max, dot(gf, g));
        rep.boundary_cone_max = cone_max;
        bool interior_ok = rep.interior_slack <= tolerance;
        bool cone_ok = cone_max >= -tolerance;
        rep.holds = interior_ok || cone_ok;
        rep.branch = interior_ok ? "boundary-pde" : (cone_ok ? "boundary-cone" : "failed");
    }
    return rep;
}

}  // namespace refldiff
