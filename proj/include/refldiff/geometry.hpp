#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "refldiff/common.hpp"

namespace refldiff {

/// Multivariate polynomial in up to kMaxDim variables.
struct PolyTerm {
    double coef = 0.0;
    std::array<int, kMaxDim> pow{};
};

struct Polynomial {
    int dim = 0;
    std::vector<PolyTerm> terms;

    double eval(const Vecd& x) const;
    Vecd grad(const Vecd& x) const;
};

enum class FaceKind { Halfspace, Ball, Polynomial };
enum class ReflectionKind { Constant, RotatedNormal, PolynomialField };

/// Reflection direction field g on a face; evaluated directions are
/// normalized to unit length.
struct ReflectionField {
    ReflectionKind kind = ReflectionKind::RotatedNormal;
    Vecd constant;                        // Constant
    double theta = 0.0;                   // RotatedNormal (2D only)
    std::vector<Polynomial> components;   // PolynomialField

    Vecd direction(const Vecd& x, const Vecd& psi_grad) const;
};

struct FaceEval {
    double value = 0.0;
    Vecd gradient;
};

/// One constraint E0^i = {psi_i > 0} with its reflection field.
struct FaceSpec {
    FaceKind kind = FaceKind::Halfspace;
    // halfspace: psi = <normal, x> - offset
    Vecd normal;
    double offset = 0.0;
    // ball: psi = r^2 - |x-c|^2 (inside) or |x-c|^2 - r^2 (outside)
    Vecd center;
    double radius = 1.0;
    bool outside = false;
    // polynomial
    Polynomial poly;

    ReflectionField reflection;

    FaceEval evaluate(const Vecd& x) const;
    /// psi(x) without the gradient (hot paths).
    double value(const Vecd& x) const;
    /// psi(x) and |grad psi(x)| together; closed forms for halfspace/ball.
    void value_and_gradnorm(const Vecd& x, double& value, double& gradnorm) const;
    /// Unit inward normal grad(psi)/|grad(psi)|.
    Vecd unit_normal(const Vecd& x) const;
    /// Unit reflection direction g(x).
    Vecd reflection_dir(const Vecd& x) const;
};

FaceEval evaluate_face(const FaceSpec& face, const Vecd& x);

struct BoundingBox {
    Vecd lo, hi;
    double diameter() const { return dist(lo, hi); }
    Vecd lerp(const Vecd& u) const {  // u in [0,1]^d
        Vecd p(lo.n);
        for (int i = 0; i < lo.n; ++i) p[i] = lo[i] + u[i] * (hi[i] - lo[i]);
        return p;
    }
};

struct DomainSpec {
    int dim = 0;
    std::vector<FaceSpec> faces;
    double working_margin = 0.1;
    double boundary_tol = 0.0;  // 0 -> default 1e-9 * diameter at finalize()
    double probe_radius = 0.0;  // 0 -> default 1e-3 * diameter at finalize()
    BoundingBox box;

    // derived at finalize()
    double diameter = 0.0;
    std::vector<double> grad_sup;       // per-face sup |grad psi| on box (padded)
    std::vector<double> grad_face_min;  // per-face min |grad psi| at sampled face points
    std::vector<double> hess_sup;       // per-face sup Frobenius |grad^2 psi| on box

    int num_faces() const { return static_cast<int>(faces.size()); }

    /// Computes tolerances and Lipschitz data and runs the sampled
    /// invariant checks (gradient nonzero on faces, unit reflection
    /// fields with positive normal component). Throws ScenarioError on
    /// violation.
    void finalize();
    bool finalized() const { return diameter > 0.0; }

    /// Conservative lower bound on the distance from x to any face zero
    /// set, from psi values and the Lipschitz bounds (0 if violated).
    double distance_lower_bound(const Vecd& x) const;
    /// Signed violation depth estimate: max over violated faces of
    /// -psi_i(x)/|grad psi_i| scale (0 if inside).
    double violation_depth(const Vecd& x) const;
};

enum class Region { Interior, Boundary, Exterior, OutsideWorkingRegion };

struct Classification {
    Region region = Region::Interior;
    std::vector<int> active;  // I(x) = {i : psi_i(x) <= tol}
};

Classification classify(const DomainSpec& dom, const Vecd& x);

/// Per-point boundary data: active faces, normals, reflection directions,
/// realizable exterior index subsets.
struct LocalBoundaryData {
    Vecd x;
    std::vector<int> active;
    std::vector<Vecd> normals;
    std::vector<Vecd> dirs;
    std::vector<std::vector<int>> exterior_subsets;
};

/// Realizable exterior subsets of I(x): deterministic probes along sums of
/// inward normals at a small ladder of radii, plus quasi-random samples of
/// the punctured probe ball. Throws EmptyScriptI if nothing succeeds.
std::vector<std::vector<int>> realizable_exterior_subsets(const DomainSpec& dom,
                                                          const Vecd& x);

/// Generators {(i, g_i(x))} of the reflection cone at a boundary point.
/// Throws NotOnBoundary if classify(x) != boundary.
std::vector<std::pair<int, Vecd>> reflection_cone(const DomainSpec& dom, const Vecd& x);

/// Assembles active set, normals, directions, and exterior subsets.
LocalBoundaryData local_boundary_data(const DomainSpec& dom, const Vecd& x,
                                      bool with_subsets = true);

/// Stratified boundary sampling: per-face Newton projection of box points
/// plus pairwise face intersections. Throws BoundarySamplingFailed when no
/// point is found.
std::vector<Vecd> sample_boundary(const DomainSpec& dom, int n_samples,
                                  std::uint64_t seed);

/// Newton-projects x onto the zero set of face i; returns false if it did
/// not converge.
bool project_to_face(const DomainSpec& dom, int face, Vecd& x, int iters = 24);

}  // namespace refldiff
