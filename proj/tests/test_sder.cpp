#include <doctest.h>

#include <cmath>

#include "refldiff/errors.hpp"
#include "refldiff/scenario.hpp"
#include "refldiff/sder.hpp"

using namespace refldiff;

namespace {

const double kR2 = 0.7071067811865476;

ControlledPath block_path(std::vector<Vecd> dirs, std::vector<double> masses) {
    // a single reflection block at controlled time 0.1 after one diffusion step
    ControlledPath p;
    p.dim = 2;
    p.dt = 0.1;
    p.delta = 0.01;
    auto rec = [&](double s, double l0, double l1, Vecd y, StepKind k, int face) {
        PathRecord r;
        r.s = s;
        r.lam0 = l0;
        r.lam1 = l1;
        r.y = y;
        r.kind = k;
        r.face = face;
        p.records.push_back(r);
    };
    rec(0.0, 0.0, 0.0, Vecd{0.5, 0.5}, StepKind::Diffusion, -1);
    rec(0.1, 0.1, 0.0, Vecd{-0.01, 0.0}, StepKind::Diffusion, -1);
    double s = 0.1, l1 = 0.0;
    Vecd y{-0.01, 0.0};
    for (size_t i = 0; i < dirs.size(); ++i) {
        s += masses[i];
        l1 += masses[i];
        p.atoms.push_back(BoundaryAtom{s, y, dirs[i], masses[i], static_cast<int>(i)});
        y += masses[i] * dirs[i];
        rec(s, 0.1, l1, y, StepKind::Reflection, static_cast<int>(i));
    }
    rec(s + 0.1, 0.2, l1, y, StepKind::Diffusion, -1);
    return p;
}

}  // namespace

TEST_CASE("half-line sder path respects the 2 delta excursion bound") {
    ScenarioConfig sc = make_halfline();
    Numerics num;
    num.dt = 1e-3;
    const double delta = num.effective_delta();
    SderPath p = simulate_sder(sc.domain, sc.coeffs, Vecd{1.0}, 1.0, num, 21);
    for (const auto& s : p.samples) CHECK(s.x[0] >= -2.0 * delta);
    CHECK(p.lambda_total >= 0.0);
    for (const auto& a : p.atoms) {
        CHECK(a.dlam > 0.0);
        CHECK(std::abs(norm2(a.gamma) - 1.0) <= 1e-12);
    }
}

TEST_CASE("sder matches the explicit discrete reflection map on shared noise") {
    ScenarioConfig sc = make_halfline();
    Numerics num;
    num.dt = 1e-3;
    num.delta = 1e-3;
    for (std::uint64_t seed : {100ULL, 101ULL, 102ULL, 103ULL, 104ULL}) {
        SderPath p = simulate_sder(sc.domain, sc.coeffs, Vecd{1.0}, 1.0, num, seed);
        REQUIRE(p.samples.size() == p.increments.size() + 1);
        double x = 1.0;
        double sup = 0.0;
        for (size_t k = 0; k < p.increments.size(); ++k) {
            x = std::max(x + p.increments[k].dw[0], 0.0);
            sup = std::max(sup, std::abs(x - p.samples[k + 1].x[0]));
        }
        CHECK(sup <= 10.0 * num.delta);
    }
}

TEST_CASE("outward drift slides along the face with the normal-rate local time") {
    ScenarioConfig sc = make_halfline();
    DiffusionCoefficients out = DiffusionCoefficients::constant(Vecd{-1.0}, Matd(1, 1));
    Numerics num;
    num.dt = 1e-3;
    num.delta = 1e-3;
    SderPath p = simulate_sder(sc.domain, out, Vecd{0.2}, 1.0, num, 5);
    // the state slides at the boundary after the 0.2 approach time and the
    // local time then grows at rate |<b, n>| = 1
    CHECK(p.lambda_total == doctest::Approx(0.8).epsilon(0.08));
    for (const auto& s : p.samples) CHECK(std::abs(s.x[0]) <= 0.21);
}

TEST_CASE("controlled_to_sder merges blocks by resultant") {
    // single atom
    SderPath one = controlled_to_sder(block_path({Vecd{0.0, 1.0}}, {0.01}));
    REQUIRE(one.atoms.size() == 1);
    CHECK(one.atoms[0].gamma[1] == doctest::Approx(1.0));
    CHECK(one.atoms[0].dlam == doctest::Approx(0.01));

    // orthogonal pair with equal mass
    SderPath two = controlled_to_sder(
        block_path({Vecd{1.0, 0.0}, Vecd{0.0, 1.0}}, {0.01, 0.01}));
    REQUIRE(two.atoms.size() == 1);
    CHECK(two.atoms[0].gamma[0] == doctest::Approx(kR2));
    CHECK(two.atoms[0].gamma[1] == doctest::Approx(kR2));
    CHECK(two.atoms[0].dlam == doctest::Approx(0.01 * std::sqrt(2.0)));

    // opposite pushes cancel
    CHECK_THROWS_AS(controlled_to_sder(
                        block_path({Vecd{0.0, 1.0}, Vecd{0.0, -1.0}}, {0.01, 0.01})),
                    DegenerateDirection);
}

TEST_CASE("sder equals the controlled pipeline bitwise on a shared stream") {
    ScenarioConfig sc = make_disk_halfplane(0.7853981633974483);
    Numerics num;
    num.dt = 1e-3;
    for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
        SderPath direct = simulate_sder(sc.domain, sc.coeffs, sc.x0, 0.05, num, seed);
        ControlledPath ctrl = simulate_controlled(sc.domain, sc.coeffs, sc.behavior,
                                                  sc.x0, StopRule::lambda0(0.05), num,
                                                  seed, 0, true);
        SderPath via = controlled_to_sder(ctrl);
        REQUIRE(direct.samples.size() == via.samples.size());
        for (size_t k = 0; k < direct.samples.size(); ++k) {
            CHECK(direct.samples[k].t == via.samples[k].t);
            CHECK(direct.samples[k].x == via.samples[k].x);
        }
        REQUIRE(direct.atoms.size() == via.atoms.size());
        for (size_t k = 0; k < direct.atoms.size(); ++k)
            CHECK(direct.atoms[k].dlam == via.atoms[k].dlam);
    }
}

TEST_CASE("direction atoms stay in the reflection cone at their face") {
    ScenarioConfig sc = make_disk_halfplane(0.7853981633974483);
    Numerics num;
    num.dt = 1e-3;
    const double delta = num.effective_delta();
    SderPath p = simulate_sder(sc.domain, sc.coeffs, Vecd{1.0, 0.05}, 0.2, num, 77);
    REQUIRE(!p.atoms.empty());
    int checked = 0;
    for (const auto& a : p.atoms) {
        CHECK(std::abs(norm2(a.gamma) - 1.0) <= 1e-12);
        Vecd x = p.x_at(a.t);
        // nearest face in scaled level-set distance; skip corner regions
        // where blocks legitimately mix generators
        double d0 = 1e300, d1 = 1e300;
        int near = -1;
        for (int i = 0; i < sc.domain.num_faces(); ++i) {
            double di = std::abs(sc.domain.faces[static_cast<size_t>(i)].value(x)) /
                        sc.domain.grad_face_min[static_cast<size_t>(i)];
            if (di < d0) {
                d1 = d0;
                d0 = di;
                near = i;
            } else {
                d1 = std::min(d1, di);
            }
        }
        if (d1 < 5.0 * delta) continue;
        Vecd proj = x;
        REQUIRE(project_to_face(sc.domain, near, proj));
        Vecd g = sc.domain.faces[static_cast<size_t>(near)].reflection_dir(proj);
        CHECK(dot(a.gamma, g) >= 1.0 - (1e-6 + 10.0 * delta));
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("semimartingale decomposition closes to rounding") {
    ScenarioConfig sc = make_disk_halfplane(0.7853981633974483);
    Numerics num;
    num.dt = 1e-3;
    SderPath p = simulate_sder(sc.domain, sc.coeffs, sc.x0, 0.2, num, 33);
    Vecd acc = p.samples.front().x;
    for (const auto& inc : p.increments) {
        Vecd b = sc.coeffs.drift(inc.x_pre);
        Matd sg = sc.coeffs.sigma(inc.x_pre);
        acc += inc.dt * b;
        acc += sg.apply(inc.dw);
    }
    for (const auto& a : p.atoms) acc += a.dlam * a.gamma;
    CHECK(dist(acc, p.samples.back().x) <= 1e-8 * std::max(1.0, norm2(acc)));
}

TEST_CASE("patchwork totals equal the boundary clock for single-face atoms") {
    ScenarioConfig sc = make_halfline();
    Numerics num;
    num.dt = 1e-3;
    ControlledPath path = simulate_controlled(sc.domain, sc.coeffs, sc.behavior, Vecd{0.1},
                                              StopRule::lambda0(0.5), num, 14);
    PatchworkLocalTimes pw = controlled_to_patchwork(path, sc.domain);
    REQUIRE(pw.num_faces == 1);
    CHECK(pw.totals[0] == doctest::Approx(path.terminal_lam1()).epsilon(1e-12));
    CHECK(pw.total_mass() == doctest::Approx(path.terminal_lam1()).epsilon(1e-12));
    // each l_i is nondecreasing
    for (size_t k = 1; k < pw.l[0].size(); ++k) CHECK(pw.l[0][k] >= pw.l[0][k - 1]);
}

TEST_CASE("patchwork splits a corner atom by the cone decomposition") {
    ScenarioConfig sc = make_box2d();
    ControlledPath path;
    path.dim = 2;
    path.delta = 0.01;
    PathRecord r;
    r.y = Vecd{0.0, 0.0};
    path.records.push_back(r);
    // direction between the two corner generators (1,0) and (0,1), no face tag
    path.atoms.push_back(BoundaryAtom{0.01, Vecd{0.0, 0.0}, Vecd{kR2, kR2}, 0.01, -1});
    PatchworkLocalTimes pw = controlled_to_patchwork(path, sc.domain);
    CHECK(pw.totals[0] == doctest::Approx(0.01 * kR2).epsilon(1e-9));
    CHECK(pw.totals[2] == doctest::Approx(0.01 * kR2).epsilon(1e-9));
    CHECK(pw.totals[1] == doctest::Approx(0.0));
    CHECK(pw.totals[3] == doctest::Approx(0.0));

    ControlledPath empty;
    empty.dim = 2;
    empty.records.push_back(r);
    PatchworkLocalTimes none = controlled_to_patchwork(empty, sc.domain);
    for (double v : none.totals) CHECK(v == 0.0);
}

TEST_CASE("sder start must lie in the closed domain") {
    ScenarioConfig sc = make_halfline();
    Numerics num;
    num.dt = 1e-3;
    CHECK_THROWS_AS(simulate_sder(sc.domain, sc.coeffs, Vecd{-0.05}, 0.1, num, 1),
                    ScenarioError);
}
