#pragma once

#include <cstdint>
#include <string>

#include "refldiff/coefficients.hpp"
#include "refldiff/controlled.hpp"
#include "refldiff/geometry.hpp"

namespace refldiff {

/// Everything a run needs: domain, dynamics, boundary behavior, numerics,
/// start point and seed. Loaded from a declarative JSON file or built in.
struct ScenarioConfig {
    std::string name;
    DomainSpec domain;
    DiffusionCoefficients coeffs;
    BoundaryBehavior behavior;
    Numerics numerics;
    Vecd x0;
    std::uint64_t seed = 1;

    /// FNV-1a over the canonical JSON serialization.
    std::uint64_t hash() const;
    std::string to_json_string(int indent = 2) const;

    void validate();
};

ScenarioConfig load_scenario_file(const std::string& path);
ScenarioConfig load_scenario_json(const std::string& json_text);

TestFunction parse_test_function(const std::string& json_text, int dim);

/// Built-in fixtures (the shipped scenario files mirror these).
/// disk_halfplane: unit disk centered at (1,0) cut by the upper half
/// plane, reflection fields rotated from the normals by theta.
ScenarioConfig make_disk_halfplane(double theta);
/// cusp: quartic/parabolic cusp wedge at the origin inside the unit disk,
/// with the extra x1 >= 0 face.
ScenarioConfig make_cusp();
/// cusp_odd: odd-power description of a cusp whose opposite normals at the
/// origin defeat the game condition there.
ScenarioConfig make_cusp_odd();
/// halfline: reflecting Brownian motion on [0, inf).
ScenarioConfig make_halfline();
/// box2d: unit square with inward-normal reflection.
ScenarioConfig make_box2d();

ScenarioConfig builtin_scenario(const std::string& name);

}  // namespace refldiff
