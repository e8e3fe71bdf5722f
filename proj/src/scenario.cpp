#include "refldiff/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "refldiff/errors.hpp"

namespace refldiff {

using nlohmann::json;

namespace {

json vec_to_json(const Vecd& v) {
    json a = json::array();
    for (int i = 0; i < v.n; ++i) a.push_back(v[i]);
    return a;
}

Vecd vec_from_json(const json& a, int expect_dim = -1) {
    Vecd v(static_cast<int>(a.size()));
    for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
    if (expect_dim >= 0 && v.n != expect_dim)
        throw ScenarioError("vector has wrong dimension in scenario file");
    return v;
}

json poly_to_json(const Polynomial& p) {
    json terms = json::array();
    for (const auto& t : p.terms) {
        json pw = json::array();
        for (int d = 0; d < p.dim; ++d) pw.push_back(t.pow[d]);
        terms.push_back(json{{"c", t.coef}, {"p", pw}});
    }
    return terms;
}

Polynomial poly_from_json(const json& terms, int dim) {
    Polynomial p;
    p.dim = dim;
    for (const auto& t : terms) {
        PolyTerm pt;
        pt.coef = t.at("c").get<double>();
        const auto& pw = t.at("p");
        if (static_cast<int>(pw.size()) != dim)
            throw ScenarioError("polynomial term power list has wrong dimension");
        for (int d = 0; d < dim; ++d) pt.pow[d] = pw[d].get<int>();
        p.terms.push_back(pt);
    }
    return p;
}

json reflection_to_json(const ReflectionField& r, int dim) {
    json o;
    switch (r.kind) {
        case ReflectionKind::Constant:
            o["kind"] = "constant";
            o["vector"] = vec_to_json(r.constant);
            break;
        case ReflectionKind::RotatedNormal:
            o["kind"] = "rotated-normal";
            o["theta"] = r.theta;
            break;
        case ReflectionKind::PolynomialField: {
            o["kind"] = "polynomial";
            json comps = json::array();
            for (const auto& c : r.components) comps.push_back(poly_to_json(c));
            o["components"] = comps;
            break;
        }
    }
    (void)dim;
    return o;
}

ReflectionField reflection_from_json(const json& o, int dim) {
    ReflectionField r;
    std::string kind = o.at("kind").get<std::string>();
    if (kind == "constant") {
        r.kind = ReflectionKind::Constant;
        r.constant = vec_from_json(o.at("vector"), dim);
    } else if (kind == "rotated-normal") {
        r.kind = ReflectionKind::RotatedNormal;
        r.theta = o.at("theta").get<double>();
    } else if (kind == "polynomial") {
        r.kind = ReflectionKind::PolynomialField;
        for (const auto& c : o.at("components")) r.components.push_back(poly_from_json(c, dim));
        if (static_cast<int>(r.components.size()) != dim)
            throw ScenarioError("polynomial reflection needs one component per dimension");
    } else {
        throw ScenarioError("unknown reflection kind: " + kind);
    }
    return r;
}

json face_to_json(const FaceSpec& f, int dim) {
    json o;
    switch (f.kind) {
        case FaceKind::Halfspace:
            o["kind"] = "halfspace";
            o["normal"] = vec_to_json(f.normal);
            o["offset"] = f.offset;
            break;
        case FaceKind::Ball:
            o["kind"] = "ball";
            o["center"] = vec_to_json(f.center);
            o["radius"] = f.radius;
            o["orientation"] = f.outside ? "outside" : "inside";
            break;
        case FaceKind::Polynomial:
            o["kind"] = "polynomial";
            o["terms"] = poly_to_json(f.poly);
            break;
    }
    o["reflection"] = reflection_to_json(f.reflection, dim);
    return o;
}

FaceSpec face_from_json(const json& o, int dim) {
    FaceSpec f;
    std::string kind = o.at("kind").get<std::string>();
    if (kind == "halfspace") {
        f.kind = FaceKind::Halfspace;
        f.normal = normalized(vec_from_json(o.at("normal"), dim));
        f.offset = o.at("offset").get<double>();
    } else if (kind == "ball") {
        f.kind = FaceKind::Ball;
        f.center = vec_from_json(o.at("center"), dim);
        f.radius = o.at("radius").get<double>();
        if (!(f.radius > 0)) throw ScenarioError("ball radius must be > 0");
        f.outside = o.value("orientation", std::string("inside")) == "outside";
    } else if (kind == "polynomial") {
        f.kind = FaceKind::Polynomial;
        f.poly = poly_from_json(o.at("terms"), dim);
    } else {
        throw ScenarioError("unknown face kind: " + kind);
    }
    f.reflection = reflection_from_json(o.at("reflection"), dim);
    return f;
}

json coeffs_to_json(const DiffusionCoefficients& c) {
    json o;
    switch (c.drift_kind) {
        case CoeffKind::Constant:
            o["drift"] = {{"kind", "constant"}, {"value", vec_to_json(c.drift_const)}};
            break;
        case CoeffKind::Affine: {
            json rows = json::array();
            for (int i = 0; i < c.dim; ++i) {
                json row = json::array();
                for (int j = 0; j < c.dim; ++j) row.push_back(c.drift_linear(i, j));
                rows.push_back(row);
            }
            o["drift"] = {{"kind", "affine"},
                          {"b0", vec_to_json(c.drift_const)},
                          {"B", rows}};
            break;
        }
        case CoeffKind::Builtin:
            o["drift"] = {{"kind", "builtin"}, {"name", c.builtin}};
            break;
    }
    switch (c.sigma_kind) {
        case CoeffKind::Constant: {
            json rows = json::array();
            for (int i = 0; i < c.dim; ++i) {
                json row = json::array();
                for (int j = 0; j < c.dim; ++j) row.push_back(c.sigma_const(i, j));
                rows.push_back(row);
            }
            o["diffusion"] = {{"kind", "constant"}, {"matrix", rows}};
            break;
        }
        case CoeffKind::Affine: {
            json rows = json::array();
            for (int i = 0; i < c.dim; ++i) {
                json row = json::array();
                for (int j = 0; j < c.dim; ++j) row.push_back(c.sigma_diag_lin(i, j));
                rows.push_back(row);
            }
            o["diffusion"] = {{"kind", "affine-diagonal"},
                              {"a", vec_to_json(c.sigma_diag0)},
                              {"D", rows}};
            break;
        }
        case CoeffKind::Builtin:
            o["diffusion"] = {{"kind", "builtin"}, {"name", c.builtin}};
            break;
    }
    return o;
}

DiffusionCoefficients coeffs_from_json(const json& o, int dim) {
    DiffusionCoefficients c;
    c.dim = dim;
    const json& dr = o.at("drift");
    std::string dk = dr.at("kind").get<std::string>();
    if (dk == "constant") {
        c.drift_kind = CoeffKind::Constant;
        c.drift_const = vec_from_json(dr.at("value"), dim);
    } else if (dk == "affine") {
        c.drift_kind = CoeffKind::Affine;
        c.drift_const = vec_from_json(dr.at("b0"), dim);
        c.drift_linear = Matd(dim, dim);
        const auto& rows = dr.at("B");
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) c.drift_linear(i, j) = rows[i][j].get<double>();
    } else if (dk == "builtin") {
        c.drift_kind = CoeffKind::Builtin;
        c.builtin = dr.value("name", std::string("bm"));
        c.drift_const = Vecd::zeros(dim);
    } else {
        throw ScenarioError("unknown drift kind: " + dk);
    }
    const json& df = o.at("diffusion");
    std::string sk = df.at("kind").get<std::string>();
    if (sk == "constant") {
        c.sigma_kind = CoeffKind::Constant;
        c.sigma_const = Matd(dim, dim);
        const auto& rows = df.at("matrix");
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) c.sigma_const(i, j) = rows[i][j].get<double>();
    } else if (sk == "affine-diagonal") {
        c.sigma_kind = CoeffKind::Affine;
        c.sigma_diag0 = vec_from_json(df.at("a"), dim);
        c.sigma_diag_lin = Matd(dim, dim);
        const auto& rows = df.at("D");
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) c.sigma_diag_lin(i, j) = rows[i][j].get<double>();
    } else if (sk == "builtin") {
        c.sigma_kind = CoeffKind::Builtin;
        c.builtin = df.value("name", std::string("bm"));
    } else {
        throw ScenarioError("unknown diffusion kind: " + sk);
    }
    return c;
}

json behavior_to_json(const BoundaryBehavior& b) {
    json o;
    if (b.kind == BehaviorKind::ObliqueReflection) {
        o["kind"] = "oblique-reflection";
        o["delta"] = b.delta;
    } else {
        o["kind"] = "nonlocal-jump";
        if (b.kernel == NonlocalKernelKind::FixedPoint) {
            o["kernel"] = "fixed-point";
            o["target"] = vec_to_json(b.target);
        } else {
            o["kernel"] = "uniform-set";
            json pts = json::array();
            for (const auto& p : b.points) pts.push_back(vec_to_json(p));
            o["points"] = pts;
        }
    }
    return o;
}

BoundaryBehavior behavior_from_json(const json& o, int dim) {
    BoundaryBehavior b;
    std::string kind = o.at("kind").get<std::string>();
    if (kind == "oblique-reflection") {
        b.kind = BehaviorKind::ObliqueReflection;
        b.delta = o.value("delta", 0.0);
    } else if (kind == "nonlocal-jump") {
        b.kind = BehaviorKind::NonlocalJump;
        std::string kernel = o.value("kernel", std::string("fixed-point"));
        if (kernel == "fixed-point") {
            b.kernel = NonlocalKernelKind::FixedPoint;
            b.target = vec_from_json(o.at("target"), dim);
        } else if (kernel == "uniform-set") {
            b.kernel = NonlocalKernelKind::UniformSet;
            for (const auto& p : o.at("points")) b.points.push_back(vec_from_json(p, dim));
            if (b.points.empty()) throw ScenarioError("uniform-set kernel needs points");
        } else {
            throw ScenarioError("unknown nonlocal kernel: " + kernel);
        }
    } else {
        throw ScenarioError("unknown behavior kind: " + kind);
    }
    return b;
}

json scenario_to_json(const ScenarioConfig& sc) {
    json o;
    o["name"] = sc.name;
    o["dimension"] = sc.domain.dim;
    o["working_margin"] = sc.domain.working_margin;
    o["boundary_tol"] = sc.domain.boundary_tol;
    o["probe_radius"] = sc.domain.probe_radius;
    o["bounding_box"] = {{"lo", vec_to_json(sc.domain.box.lo)},
                         {"hi", vec_to_json(sc.domain.box.hi)}};
    json faces = json::array();
    for (const auto& f : sc.domain.faces) faces.push_back(face_to_json(f, sc.domain.dim));
    o["faces"] = faces;
    o["coefficients"] = coeffs_to_json(sc.coeffs);
    o["behavior"] = behavior_to_json(sc.behavior);
    o["numerics"] = {{"dt", sc.numerics.dt},
                     {"delta", sc.numerics.delta},
                     {"t_trunc", sc.numerics.t_trunc},
                     {"out_dt", sc.numerics.out_dt},
                     {"face_rule", sc.numerics.steepest_descent_faces ? "steepest-descent"
                                                                      : "first-index"}};
    o["x0"] = vec_to_json(sc.x0);
    o["seed"] = sc.seed;
    return o;
}

ScenarioConfig scenario_from_json(const json& o) {
    ScenarioConfig sc;
    sc.name = o.value("name", std::string("unnamed"));
    int dim = o.at("dimension").get<int>();
    sc.domain.dim = dim;
    sc.domain.working_margin = o.value("working_margin", 0.1);
    sc.domain.boundary_tol = o.value("boundary_tol", 0.0);
    sc.domain.probe_radius = o.value("probe_radius", 0.0);
    sc.domain.box.lo = vec_from_json(o.at("bounding_box").at("lo"), dim);
    sc.domain.box.hi = vec_from_json(o.at("bounding_box").at("hi"), dim);
    for (const auto& f : o.at("faces")) sc.domain.faces.push_back(face_from_json(f, dim));
    sc.coeffs = coeffs_from_json(o.at("coefficients"), dim);
    sc.behavior = o.contains("behavior") ? behavior_from_json(o.at("behavior"), dim)
                                         : BoundaryBehavior::oblique();
    if (o.contains("numerics")) {
        const auto& n = o.at("numerics");
        sc.numerics.dt = n.value("dt", 1e-3);
        sc.numerics.delta = n.value("delta", 0.0);
        sc.numerics.t_trunc = n.value("t_trunc", 20.0);
        sc.numerics.out_dt = n.value("out_dt", 0.0);
        sc.numerics.steepest_descent_faces =
            n.value("face_rule", std::string("first-index")) == "steepest-descent";
    }
    sc.x0 = vec_from_json(o.at("x0"), dim);
    sc.seed = o.value("seed", 1ULL);
    sc.validate();
    return sc;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

void ScenarioConfig::validate() {
    domain.finalize();
    numerics.validate();
    coeffs.validate(domain.box);
    if (x0.n != domain.dim) throw ScenarioError("x0 dimension mismatch");
    if (behavior.kind == BehaviorKind::NonlocalJump &&
        behavior.kernel == NonlocalKernelKind::FixedPoint) {
        if (classify(domain, behavior.target).region != Region::Interior)
            throw ScenarioError("nonlocal target must be interior");
    }
}

std::string ScenarioConfig::to_json_string(int indent) const {
    return scenario_to_json(*this).dump(indent);
}

std::uint64_t ScenarioConfig::hash() const {
    return fnv1a64(scenario_to_json(*this).dump());
}

ScenarioConfig load_scenario_json(const std::string& text) {
    json o;
    try {
        o = json::parse(text);
    } catch (const std::exception& e) {
        throw ScenarioError(std::string("scenario JSON parse failed: ") + e.what());
    }
    try {
        return scenario_from_json(o);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario JSON schema error: ") + e.what());
    }
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scenario_json(ss.str());
}

TestFunction parse_test_function(const std::string& text, int dim) {
    json o;
    try {
        o = json::parse(text);
    } catch (const std::exception& e) {
        throw ScenarioError(std::string("test function parse failed: ") + e.what());
    }
    TestFunction f;
    f.dim = dim;
    std::string kind = o.at("kind").get<std::string>();
    if (kind == "constant") {
        f.kind = TestFnKind::Constant;
        f.c = o.at("c").get<double>();
    } else if (kind == "exponential") {
        f.kind = TestFnKind::Exponential;
        f.a = vec_from_json(o.at("a"), dim);
    } else if (kind == "polynomial") {
        f.kind = TestFnKind::Polynomial;
        f.poly = poly_from_json(o.at("terms"), dim);
    } else if (kind == "bump") {
        f.kind = TestFnKind::Bump;
        f.center = vec_from_json(o.at("center"), dim);
        f.width = o.at("width").get<double>();
        if (!(f.width > 0)) throw ScenarioError("bump width must be > 0");
    } else if (kind == "expsum") {
        f.kind = TestFnKind::ExpSum;
        for (const auto& t : o.at("components"))
            f.exp_terms.emplace_back(t.at("c").get<double>(),
                                     vec_from_json(t.at("a"), dim));
    } else {
        throw ScenarioError("unknown test function kind: " + kind);
    }
    return f;
}

namespace {

ReflectionField rotated(double theta) {
    ReflectionField r;
    r.kind = ReflectionKind::RotatedNormal;
    r.theta = theta;
    return r;
}

ReflectionField const_field(std::initializer_list<double> v) {
    ReflectionField r;
    r.kind = ReflectionKind::Constant;
    r.constant = Vecd(v);
    return r;
}

Polynomial poly2(std::initializer_list<std::pair<double, std::array<int, 2>>> terms) {
    Polynomial p;
    p.dim = 2;
    for (const auto& [c, pw] : terms) {
        PolyTerm t;
        t.coef = c;
        t.pow[0] = pw[0];
        t.pow[1] = pw[1];
        p.terms.push_back(t);
    }
    return p;
}

}  // namespace

ScenarioConfig make_disk_halfplane(double theta) {
    ScenarioConfig sc;
    sc.name = "disk_halfplane";
    sc.domain.dim = 2;
    sc.domain.working_margin = 0.5;
    sc.domain.box.lo = Vecd{-0.2, -0.2};
    sc.domain.box.hi = Vecd{2.2, 1.2};

    FaceSpec disk;
    disk.kind = FaceKind::Ball;
    disk.center = Vecd{1.0, 0.0};
    disk.radius = 1.0;
    disk.reflection = rotated(theta);
    sc.domain.faces.push_back(disk);

    FaceSpec half;
    half.kind = FaceKind::Halfspace;
    half.normal = Vecd{0.0, 1.0};
    half.offset = 0.0;
    half.reflection = rotated(theta);
    sc.domain.faces.push_back(half);

    sc.coeffs = DiffusionCoefficients::brownian(2);
    sc.behavior = BoundaryBehavior::oblique();
    sc.x0 = Vecd{1.0, 0.5};
    sc.seed = 1;
    sc.validate();
    return sc;
}

ScenarioConfig make_cusp() {
    ScenarioConfig sc;
    sc.name = "cusp";
    sc.domain.dim = 2;
    sc.domain.working_margin = 0.35;
    sc.domain.box.lo = Vecd{-0.25, -0.5};
    sc.domain.box.hi = Vecd{1.2, 1.1};

    // x2 + x1^4 > 0
    FaceSpec f1;
    f1.kind = FaceKind::Polynomial;
    f1.poly = poly2({{1.0, {0, 1}}, {1.0, {4, 0}}});
    f1.reflection.kind = ReflectionKind::PolynomialField;
    // (-1/2 + 2 x1^3, sqrt(3)/2): matches (-1/2, sqrt(3)/2) at the origin and
    // keeps a positive normal component along the whole face
    f1.reflection.components.push_back(poly2({{-0.5, {0, 0}}, {2.0, {3, 0}}}));
    f1.reflection.components.push_back(poly2({{0.8660254037844386, {0, 0}}}));
    sc.domain.faces.push_back(f1);

    // x1^2 - x2 > 0
    FaceSpec f2;
    f2.kind = FaceKind::Polynomial;
    f2.poly = poly2({{1.0, {2, 0}}, {-1.0, {0, 1}}});
    f2.reflection = const_field({0.7071067811865476, -0.7071067811865476});
    sc.domain.faces.push_back(f2);

    // unit disk
    FaceSpec f3;
    f3.kind = FaceKind::Ball;
    f3.center = Vecd{0.0, 0.0};
    f3.radius = 1.0;
    f3.reflection = rotated(0.0);
    sc.domain.faces.push_back(f3);

    // x1 > 0
    FaceSpec f4;
    f4.kind = FaceKind::Halfspace;
    f4.normal = Vecd{1.0, 0.0};
    f4.offset = 0.0;
    f4.reflection = const_field({1.0, 0.0});
    sc.domain.faces.push_back(f4);

    sc.coeffs = DiffusionCoefficients::brownian(2);
    sc.behavior = BoundaryBehavior::oblique();
    sc.x0 = Vecd{0.6, 0.1};
    sc.seed = 1;
    sc.validate();
    return sc;
}

ScenarioConfig make_cusp_odd() {
    ScenarioConfig sc;
    sc.name = "cusp_odd";
    sc.domain.dim = 2;
    sc.domain.working_margin = 0.35;
    sc.domain.box.lo = Vecd{-0.25, -1.1};
    sc.domain.box.hi = Vecd{1.2, 1.1};

    // x2 + x1^3 > 0
    FaceSpec f1;
    f1.kind = FaceKind::Polynomial;
    f1.poly = poly2({{1.0, {0, 1}}, {1.0, {3, 0}}});
    f1.reflection.kind = ReflectionKind::PolynomialField;
    f1.reflection.components.push_back(poly2({{-0.5, {0, 0}}, {2.0, {2, 0}}}));
    f1.reflection.components.push_back(poly2({{0.8660254037844386, {0, 0}}}));
    sc.domain.faces.push_back(f1);

    // x1^3 - x2 > 0
    FaceSpec f2;
    f2.kind = FaceKind::Polynomial;
    f2.poly = poly2({{1.0, {3, 0}}, {-1.0, {0, 1}}});
    f2.reflection = const_field({0.7071067811865476, -0.7071067811865476});
    sc.domain.faces.push_back(f2);

    FaceSpec f3;
    f3.kind = FaceKind::Ball;
    f3.center = Vecd{0.0, 0.0};
    f3.radius = 1.0;
    f3.reflection = rotated(0.0);
    sc.domain.faces.push_back(f3);

    sc.coeffs = DiffusionCoefficients::brownian(2);
    sc.behavior = BoundaryBehavior::oblique();
    sc.x0 = Vecd{0.7, 0.1};
    sc.seed = 1;
    sc.validate();
    return sc;
}

ScenarioConfig make_halfline() {
    ScenarioConfig sc;
    sc.name = "halfline";
    sc.domain.dim = 1;
    sc.domain.working_margin = 0.5;
    sc.domain.box.lo = Vecd{-0.05};
    sc.domain.box.hi = Vecd{8.0};

    FaceSpec f;
    f.kind = FaceKind::Halfspace;
    f.normal = Vecd{1.0};
    f.offset = 0.0;
    f.reflection = const_field({1.0});
    sc.domain.faces.push_back(f);

    sc.coeffs = DiffusionCoefficients::brownian(1);
    sc.behavior = BoundaryBehavior::oblique();
    sc.x0 = Vecd{0.0};
    sc.seed = 1;
    sc.validate();
    return sc;
}

ScenarioConfig make_box2d() {
    ScenarioConfig sc;
    sc.name = "box2d";
    sc.domain.dim = 2;
    sc.domain.working_margin = 0.4;
    sc.domain.box.lo = Vecd{-0.1, -0.1};
    sc.domain.box.hi = Vecd{1.1, 1.1};

    auto half = [&](std::initializer_list<double> n, double off) {
        FaceSpec f;
        f.kind = FaceKind::Halfspace;
        f.normal = Vecd(n);
        f.offset = off;
        f.reflection = rotated(0.0);
        sc.domain.faces.push_back(f);
    };
    half({1.0, 0.0}, 0.0);
    half({-1.0, 0.0}, -1.0);
    half({0.0, 1.0}, 0.0);
    half({0.0, -1.0}, -1.0);

    sc.coeffs = DiffusionCoefficients::brownian(2);
    sc.behavior = BoundaryBehavior::oblique();
    sc.x0 = Vecd{0.5, 0.5};
    sc.seed = 1;
    sc.validate();
    return sc;
}

ScenarioConfig builtin_scenario(const std::string& name) {
    if (name == "disk_halfplane") return make_disk_halfplane(0.7853981633974483);
    if (name == "cusp") return make_cusp();
    if (name == "cusp_odd") return make_cusp_odd();
    if (name == "halfline") return make_halfline();
    if (name == "box2d") return make_box2d();
    throw ScenarioError("unknown builtin scenario: " + name);
}

}  // namespace refldiff
