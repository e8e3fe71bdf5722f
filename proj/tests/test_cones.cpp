#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "refldiff/cones.hpp"
#include "refldiff/errors.hpp"
#include "refldiff/rng.hpp"
#include "refldiff/scenario.hpp"

using namespace refldiff;

namespace {

const double kPi4 = 0.7853981633974483;
const double kR2 = 0.7071067811865476;

LocalBoundaryData handmade(std::vector<Vecd> normals, std::vector<Vecd> dirs) {
    LocalBoundaryData l;
    l.x = Vecd::zeros(normals[0].n);
    for (size_t i = 0; i < normals.size(); ++i) {
        l.active.push_back(static_cast<int>(i));
        l.normals.push_back(normals[i]);
        l.dirs.push_back(dirs[i]);
    }
    return l;
}

const GameSubsetValue* find_subset(const GameVerdict& v, std::vector<int> subset) {
    std::sort(subset.begin(), subset.end());
    for (const auto& s : v.per_subset)
        if (s.subset == subset) return &s;
    return nullptr;
}

}  // namespace

TEST_CASE("common direction holds at the disk/halfplane corner") {
    ScenarioConfig sc = make_disk_halfplane(kPi4);
    LocalBoundaryData local = local_boundary_data(sc.domain, Vecd{0.0, 0.0});
    CommonDirectionVerdict v = check_condition_b(local);
    REQUIRE(v.holds);
    REQUIRE(v.witness.has_value());
    // witness e = (1,0): both generators see sqrt(2)/2
    CHECK((*v.witness)[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs((*v.witness)[1]) <= 1e-9);
    CHECK(v.margin == doctest::Approx(kR2).epsilon(1e-9));
}

TEST_CASE("common direction: identity case and antipodal failure") {
    auto single = handmade({Vecd{0.0, 1.0}}, {Vecd{0.0, 1.0}});
    CommonDirectionVerdict v = check_condition_b(single);
    REQUIRE(v.holds);
    CHECK(v.margin == doctest::Approx(1.0));
    CHECK((*v.witness)[1] == doctest::Approx(1.0));

    auto anti = handmade({Vecd{1.0, 0.0}, Vecd{0.0, 1.0}},
                         {Vecd{0.0, 1.0}, Vecd{0.0, -1.0}});
    CHECK(!check_condition_b(anti).holds);
}

TEST_CASE("common direction verdict survives relabeling and rotation") {
    ScenarioConfig sc = make_disk_halfplane(kPi4);
    LocalBoundaryData local = local_boundary_data(sc.domain, Vecd{0.0, 0.0});
    CommonDirectionVerdict base = check_condition_b(local);

    LocalBoundaryData swapped = local;
    std::swap(swapped.normals[0], swapped.normals[1]);
    std::swap(swapped.dirs[0], swapped.dirs[1]);
    CommonDirectionVerdict relabeled = check_condition_b(swapped);
    CHECK(relabeled.holds == base.holds);
    CHECK(relabeled.margin == doctest::Approx(base.margin).epsilon(1e-9));

    double c = std::cos(0.9), s = std::sin(0.9);
    auto rot = [&](const Vecd& v) { return Vecd{c * v[0] - s * v[1], s * v[0] + c * v[1]}; };
    LocalBoundaryData rotated = local;
    for (auto& n : rotated.normals) n = rot(n);
    for (auto& g : rotated.dirs) g = rot(g);
    CommonDirectionVerdict turned = check_condition_b(rotated);
    CHECK(turned.holds == base.holds);
    CHECK(turned.margin == doctest::Approx(base.margin).epsilon(1e-9));
}

TEST_CASE("exterior games at the cusp tip") {
    ScenarioConfig sc = make_cusp();
    LocalBoundaryData local = local_boundary_data(sc.domain, Vecd{0.0, 0.0});
    GameVerdict v = check_condition_c(local);
    REQUIRE(v.holds);
    CHECK(v.beta == doctest::Approx(0.3660254037844386).epsilon(1e-8));

    const GameSubsetValue* s4 = find_subset(v, {3});
    REQUIRE(s4);
    CHECK(s4->value == doctest::Approx(1.0));
    const GameSubsetValue* s24 = find_subset(v, {1, 3});
    REQUIRE(s24);
    CHECK(s24->value >= kR2 - 1e-9);
    const GameSubsetValue* s14 = find_subset(v, {0, 3});
    REQUIRE(s14);
    CHECK(s14->value == doctest::Approx(0.3660254037844386).epsilon(1e-8));
}

TEST_CASE("exterior games fail at the odd-cusp tip with equal weights") {
    ScenarioConfig sc = make_cusp_odd();
    LocalBoundaryData local = local_boundary_data(sc.domain, Vecd{0.0, 0.0});
    GameVerdict v = check_condition_c(local);
    CHECK(!v.holds);
    CHECK(std::abs(v.beta) <= 1e-10);
    CHECK(v.worst_subset == std::vector<int>{0, 1});
    REQUIRE(v.worst_weights.size() == 2);
    CHECK(v.worst_weights[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(v.worst_weights[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("single-face game value is the plain pairing") {
    ScenarioConfig sc = make_disk_halfplane(kPi4);
    Vecd p{1.0, 1.0};  // top of the disk, single face
    LocalBoundaryData local = local_boundary_data(sc.domain, p);
    REQUIRE(local.active.size() == 1);
    GameVerdict v = check_condition_c(local);
    REQUIRE(v.holds);
    double pairing = dot(local.normals[0], local.dirs[0]);
    CHECK(v.beta == doctest::Approx(pairing));  // exactly cos(theta)
    CHECK(v.beta == doctest::Approx(std::cos(kPi4)).epsilon(1e-12));
}

TEST_CASE("decompose_direction on the canonical triples") {
    auto single = handmade({Vecd{0.0, 1.0}}, {Vecd{0.0, 1.0}});
    auto eta = decompose_direction(single, Vecd{0.0, 1.0}, 4);
    CHECK(eta[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(eta[1] == 0.0);

    auto ortho = handmade({Vecd{1.0, 0.0}, Vecd{0.0, 1.0}},
                          {Vecd{1.0, 0.0}, Vecd{0.0, 1.0}});
    eta = decompose_direction(ortho, Vecd{kR2, kR2}, 2);
    CHECK(eta[0] == doctest::Approx(kR2).epsilon(1e-10));
    CHECK(eta[1] == doctest::Approx(kR2).epsilon(1e-10));

    auto lone = handmade({Vecd{1.0, 0.0}}, {Vecd{1.0, 0.0}});
    CHECK_THROWS_AS(decompose_direction(lone, Vecd{0.0, 1.0}, 1), NotInCone);
}

TEST_CASE("decompose then recombine over random cone points") {
    for (const char* name : {"disk_halfplane", "cusp"}) {
        ScenarioConfig sc = builtin_scenario(name);
        LocalBoundaryData local = local_boundary_data(sc.domain, Vecd{0.0, 0.0});
        CounterRng rng(17, 23);
        for (int t = 0; t < 1000; ++t) {
            Vecd u = Vecd::zeros(2);
            for (size_t j = 0; j < local.dirs.size(); ++j)
                u += rng.uniform() * local.dirs[j];
            double m = norm2(u);
            if (m < 1e-6) continue;
            u = (1.0 / m) * u;
            auto eta = decompose_direction(local, u, sc.domain.num_faces());
            Vecd back = Vecd::zeros(2);
            for (size_t j = 0; j < local.dirs.size(); ++j)
                back += eta[static_cast<size_t>(local.active[j])] * local.dirs[j];
            CHECK(dist(back, u) <= 1e-10);
            for (double e : eta) CHECK(e >= 0.0);
        }
    }
}

TEST_CASE("boundary sweep: disk/halfplane all hold") {
    ScenarioConfig sc = make_disk_halfplane(kPi4);
    SweepSummary sweep = boundary_sweep(sc.domain, 200, 11);
    CHECK(sweep.all_hold);
    CHECK(sweep.min_beta > 0.0);
    CHECK(sweep.min_margin > 0.0);
}

TEST_CASE("boundary sweep: odd cusp has a failing report at the tip") {
    ScenarioConfig sc = make_cusp_odd();
    SweepSummary sweep = boundary_sweep(sc.domain, 120, 11);
    CHECK(!sweep.all_hold);
    bool tip_fails = false;
    for (const auto& rep : sweep.reports)
        if (dist(rep.x, Vecd{0.0, 0.0}) < 1e-3 && !rep.holds()) tip_fails = true;
    CHECK(tip_fails);
}

TEST_CASE("boundary sweep: box smooth points have unit margin and beta") {
    ScenarioConfig sc = make_box2d();
    SweepSummary sweep = boundary_sweep(sc.domain, 160, 11);
    CHECK(sweep.all_hold);
    for (const auto& rep : sweep.reports) {
        if (rep.active.size() != 1) continue;
        CHECK(rep.direction.margin == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.game.beta == doctest::Approx(1.0).epsilon(1e-9));
    }
}
