#include <doctest.h>

#include <cmath>

#include "refldiff/errors.hpp"
#include "refldiff/resolvent.hpp"
#include "refldiff/scenario.hpp"
#include "refldiff/timechange.hpp"

using namespace refldiff;

namespace {

const double kPi4 = 0.7853981633974483;

ControlledPath five_record_path() {
    // one diffusion step, a three-push reflection block, one diffusion step
    ControlledPath p;
    p.dim = 1;
    p.dt = 0.1;
    p.delta = 0.01;
    auto rec = [&](double s, double l0, double l1, double y, StepKind k, int face) {
        PathRecord r;
        r.s = s;
        r.lam0 = l0;
        r.lam1 = l1;
        r.y = Vecd{y};
        r.kind = k;
        r.face = face;
        p.records.push_back(r);
    };
    rec(0.00, 0.00, 0.00, 0.20, StepKind::Diffusion, -1);
    rec(0.10, 0.10, 0.00, -0.03, StepKind::Diffusion, -1);
    rec(0.11, 0.10, 0.01, -0.02, StepKind::Reflection, 0);
    rec(0.12, 0.10, 0.02, -0.01, StepKind::Reflection, 0);
    rec(0.13, 0.10, 0.03, 0.005, StepKind::Reflection, 0);
    rec(0.23, 0.20, 0.03, 0.05, StepKind::Diffusion, -1);
    auto atom = [&](double s, double x) {
        p.atoms.push_back(BoundaryAtom{s, Vecd{x}, Vecd{1.0}, 0.01, 0});
    };
    atom(0.11, -0.03);
    atom(0.12, -0.02);
    atom(0.13, -0.01);
    return p;
}

}  // namespace

TEST_CASE("pure interior path inverts to the identity") {
    ScenarioConfig sc = make_halfline();
    DiffusionCoefficients frozen = DiffusionCoefficients::constant(Vecd{0.0}, Matd(1, 1));
    Numerics num;
    num.dt = 1e-2;
    ControlledPath p = simulate_controlled(sc.domain, frozen, sc.behavior, Vecd{1.0},
                                           StopRule::lambda0(1.0), num, 3);
    TimeChange tc = invert_clock(p);
    CHECK(tc.jumps().empty());
    for (double t : {0.0, 0.25, 0.5, 0.99}) CHECK(tc.tau(t) == doctest::Approx(t));

    ConstrainedPath cp = time_change(p);
    CHECK(cp.atoms.empty());
    CHECK(cp.samples.size() == p.records.size());
    for (size_t k = 0; k < cp.samples.size(); ++k)
        CHECK(cp.samples[k].x[0] == p.records[k].y[0]);
}

TEST_CASE("a reflection block becomes a tau jump of its length") {
    ControlledPath p = five_record_path();
    TimeChange tc = invert_clock(p);
    REQUIRE(tc.jumps().size() == 1);
    CHECK(tc.jumps()[0].t == doctest::Approx(0.10));
    CHECK(tc.jumps()[0].s_hi - tc.jumps()[0].s_lo == doctest::Approx(0.03));
    CHECK(tc.max_jump() == doctest::Approx(0.03));
    // right continuity: tau(0.1) lands at the block end
    CHECK(tc.tau(0.10) == doctest::Approx(0.13));
    CHECK(tc.tau(0.10 - 1e-9) == doctest::Approx(0.10).epsilon(1e-6));
}

TEST_CASE("generalized inverse inequality tau(lam0(s)) >= s") {
    ControlledPath p = five_record_path();
    TimeChange tc = invert_clock(p);
    for (const auto& r : p.records) {
        CHECK(tc.tau(r.lam0) >= r.s - 1e-12);
    }
    // equality off the plateau
    CHECK(tc.tau(0.05) == doctest::Approx(0.05));
    CHECK(tc.tau(0.15) == doctest::Approx(0.18));  // 0.13 + (0.15-0.10)
}

TEST_CASE("time change collapses the exterior segment onto the boundary") {
    ControlledPath p = five_record_path();
    ConstrainedPath cp = time_change(p);
    // X(0.1) is the block-end point, the exterior samples are gone
    CHECK(cp.x_at(0.10)[0] == doctest::Approx(0.005));
    for (const auto& s : cp.samples) CHECK(s.x[0] >= -1e-12);
    // boundary mass jumps by the block's length at t = 0.1
    CHECK(cp.lambda_at(0.10) == doctest::Approx(0.03));
    CHECK(cp.lambda_at(0.09) == doctest::Approx(0.0));
    CHECK(cp.lambda_total() == doctest::Approx(0.03));
    // atoms carry the physical time of the collapsed block
    for (const auto& a : cp.atoms) CHECK(a.t == doctest::Approx(0.10));
}

TEST_CASE("interior clock that never moves cannot be inverted") {
    ControlledPath p;
    p.dim = 1;
    PathRecord r;
    r.y = Vecd{-0.5};
    p.records.push_back(r);
    PathRecord r2 = r;
    r2.s = 0.2;
    r2.lam1 = 0.2;
    p.records.push_back(r2);
    CHECK_THROWS_AS(invert_clock(p), ZeroLambda0);
}

TEST_CASE("check_natural flags a displaced atom and passes clean output") {
    ControlledPath p = five_record_path();
    ConstrainedPath cp = time_change(p);
    NaturalityReport rep = check_natural(cp);
    CHECK(rep.max_atom_distance == doctest::Approx(0.035));  // -0.03 vs 0.005
    CHECK(rep.max_lambda_jump == doctest::Approx(0.03));

    ConstrainedPath displaced = cp;
    displaced.atoms[0].x = Vecd{1.0};
    NaturalityReport bad = check_natural(displaced);
    CHECK(bad.max_atom_distance >= 0.99);

    ConstrainedPath empty = cp;
    empty.atoms.clear();
    NaturalityReport zero = check_natural(empty);
    CHECK(zero.max_atom_distance == 0.0);
    CHECK(zero.max_lambda_jump == 0.0);
}

TEST_CASE("simulated paths stay natural within the scheme tolerance") {
    ScenarioConfig sc = make_disk_halfplane(kPi4);
    Numerics num;
    num.dt = 1e-3;
    const double delta = num.effective_delta();
    for (std::uint64_t p = 0; p < 50; ++p) {
        ControlledPath path = simulate_controlled(sc.domain, sc.coeffs, sc.behavior, sc.x0,
                                                  StopRule::budget(0.05), num, 210, p);
        ConstrainedPath cp = time_change(path);
        NaturalityReport rep = check_natural(cp);
        CHECK(rep.max_atom_distance <= 2.0 * delta);
        CHECK(cp.max_excursion(sc.domain) <= 2.0 * delta);
    }
}

TEST_CASE("round trip: lam0(tau(t)) equals t where tau is continuous") {
    ScenarioConfig sc = make_halfline();
    Numerics num;
    num.dt = 1e-3;
    ControlledPath path = simulate_controlled(sc.domain, sc.coeffs, sc.behavior, Vecd{0.2},
                                              StopRule::lambda0(0.3), num, 17);
    TimeChange tc = invert_clock(path);
    // evaluate lam0 at tau(t) by scanning records
    auto lam0_at = [&](double s) {
        for (size_t k = 1; k < path.records.size(); ++k) {
            if (path.records[k].s >= s) {
                const auto& a = path.records[k - 1];
                const auto& b = path.records[k];
                if (b.s == a.s) return b.lam0;
                double f = (s - a.s) / (b.s - a.s);
                return a.lam0 + f * (b.lam0 - a.lam0);
            }
        }
        return path.records.back().lam0;
    };
    for (double t : {0.01, 0.05, 0.1, 0.25}) {
        CHECK(lam0_at(tc.tau(t)) == doctest::Approx(t).epsilon(1e-12));
    }
}

TEST_CASE("tau jumps shrink when delta does") {
    ScenarioConfig sc = make_disk_halfplane(kPi4);
    Numerics coarse;
    coarse.dt = 1e-3;
    coarse.delta = 3e-2;
    Numerics fine = coarse;
    fine.delta = 3e-3;
    auto max_jump = [&](const Numerics& num) {
        double worst = 0.0;
        for (std::uint64_t p = 0; p < 20; ++p) {
            ControlledPath path = simulate_controlled(sc.domain, sc.coeffs, sc.behavior,
                                                      sc.x0, StopRule::budget(0.1), num,
                                                      55, p);
            if (path.terminal_lam0() <= 0) continue;
            worst = std::max(worst, invert_clock(path).max_jump());
        }
        return worst;
    };
    double jc = max_jump(coarse);
    double jf = max_jump(fine);
    CHECK(jf <= jc);
    CHECK(jf <= 10.0 * fine.delta);
}

TEST_CASE("per-path discounted integrals agree across the two clocks") {
    ScenarioConfig sc = make_halfline();
    Numerics num;
    num.dt = 1e-3;
    num.delta = 3e-3;
    TestFunction h = TestFunction::exponential(Vecd{-1.0});
    for (std::uint64_t p = 0; p < 10; ++p) {
        ControlledPath path = simulate_controlled(sc.domain, sc.coeffs, sc.behavior,
                                                  Vecd{0.0}, StopRule::lambda0(2.0), num,
                                                  400, p);
        // controlled-clock quadrature over records
        KahanSum ctrl;
        for (size_t k = 1; k < path.records.size(); ++k) {
            const auto& a = path.records[k - 1];
            const auto& b = path.records[k];
            ctrl.add(discount_segment(a.lam0, b.lam0, h.value(a.y), h.value(b.y)));
        }
        // physical-clock quadrature over the time-changed samples
        ConstrainedPath cp = time_change(path);
        KahanSum phys;
        for (size_t k = 1; k < cp.samples.size(); ++k) {
            const auto& a = cp.samples[k - 1];
            const auto& b = cp.samples[k];
            phys.add(discount_segment(a.t, b.t, h.value(a.x), h.value(b.x)));
        }
        // the clocks disagree only through the collapsed-node values, an
        // O(delta * dt) quadrature difference per boundary visit
        CHECK(std::abs(ctrl.value() - phys.value()) <= 1e-5);
    }
}

TEST_CASE("exterior start reports its entry through tau0") {
    ScenarioConfig sc = make_halfline();
    DiffusionCoefficients frozen = DiffusionCoefficients::constant(Vecd{0.0}, Matd(1, 1));
    Numerics num;
    num.dt = 1e-2;
    num.delta = 1e-2;
    ControlledPath p = simulate_controlled(sc.domain, frozen, sc.behavior, Vecd{-0.05},
                                           StopRule::lambda0(0.1), num, 2);
    ConstrainedPath cp = time_change(p);
    CHECK(cp.tau0 == doctest::Approx(0.05).epsilon(0.25));  // entry after ~5 pushes
    CHECK(cp.samples.front().t == 0.0);
    CHECK(cp.samples.front().x[0] >= 0.0);  // X(0) = Y(tau(0)), not Y(0)
}
