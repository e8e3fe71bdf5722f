#include "refldiff/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "refldiff/errors.hpp"
#include "refldiff/rng.hpp"

namespace refldiff {

double Polynomial::eval(const Vecd& x) const {
    double s = 0.0;
    for (const auto& t : terms) {
        double v = t.coef;
        for (int d = 0; d < dim; ++d) {
            for (int k = 0; k < t.pow[d]; ++k) v *= x[d];
        }
        s += v;
    }
    return s;
}

Vecd Polynomial::grad(const Vecd& x) const {
    Vecd g(dim);
    for (const auto& t : terms) {
        for (int d = 0; d < dim; ++d) {
            if (t.pow[d] == 0) continue;
            double v = t.coef * t.pow[d];
            for (int e = 0; e < dim; ++e) {
                int p = t.pow[e] - (e == d ? 1 : 0);
                for (int k = 0; k < p; ++k) v *= x[e];
            }
            g[d] += v;
        }
    }
    return g;
}

Vecd ReflectionField::direction(const Vecd& x, const Vecd& psi_grad) const {
    Vecd g;
    switch (kind) {
        case ReflectionKind::Constant:
            g = constant;
            break;
        case ReflectionKind::RotatedNormal: {
            if (x.n != 2)
                throw ScenarioError("rotated-normal reflection requires dimension 2");
            Vecd n = normalized(psi_grad);
            double c = std::cos(theta), s = std::sin(theta);
            g = Vecd(2);
            g[0] = c * n[0] + s * n[1];
            g[1] = -s * n[0] + c * n[1];
            break;
        }
        case ReflectionKind::PolynomialField: {
            g = Vecd(x.n);
            for (int d = 0; d < x.n; ++d) g[d] = components[d].eval(x);
            break;
        }
    }
    double m = norm2(g);
    if (!(m > 0.0) || !std::isfinite(m))
        throw NonFiniteGeometry("reflection field vanishes or is non-finite");
    return (1.0 / m) * g;
}

FaceEval FaceSpec::evaluate(const Vecd& x) const {
    FaceEval out;
    switch (kind) {
        case FaceKind::Halfspace: {
            out.value = dot(normal, x) - offset;
            out.gradient = normal;
            break;
        }
        case FaceKind::Ball: {
            Vecd d = x - center;
            double q = dot(d, d);
            if (!outside) {
                out.value = radius * radius - q;
                out.gradient = -2.0 * d;
            } else {
                out.value = q - radius * radius;
                out.gradient = 2.0 * d;
            }
            break;
        }
        case FaceKind::Polynomial: {
            out.value = poly.eval(x);
            out.gradient = poly.grad(x);
            break;
        }
    }
    if (!std::isfinite(out.value) || !all_finite(out.gradient))
        throw NonFiniteGeometry("face evaluation overflowed");
    return out;
}

double FaceSpec::value(const Vecd& x) const {
    switch (kind) {
        case FaceKind::Halfspace:
            return dot(normal, x) - offset;
        case FaceKind::Ball: {
            Vecd d = x - center;
            double q = dot(d, d);
            return outside ? q - radius * radius : radius * radius - q;
        }
        case FaceKind::Polynomial:
            return poly.eval(x);
    }
    return 0.0;
}

void FaceSpec::value_and_gradnorm(const Vecd& x, double& v, double& g) const {
    switch (kind) {
        case FaceKind::Halfspace:
            v = dot(normal, x) - offset;
            g = 1.0;  // normals are stored unit length
            return;
        case FaceKind::Ball: {
            Vecd d = x - center;
            double q = dot(d, d);
            v = outside ? q - radius * radius : radius * radius - q;
            g = 2.0 * std::sqrt(q);
            return;
        }
        case FaceKind::Polynomial: {
            v = poly.eval(x);
            g = norm2(poly.grad(x));
            return;
        }
    }
    v = 0.0;
    g = 0.0;
}

Vecd FaceSpec::unit_normal(const Vecd& x) const {
    return normalized(evaluate(x).gradient);
}

Vecd FaceSpec::reflection_dir(const Vecd& x) const {
    return reflection.direction(x, evaluate(x).gradient);
}

FaceEval evaluate_face(const FaceSpec& face, const Vecd& x) {
    if (!all_finite(x)) throw NonFiniteGeometry("evaluate_face: non-finite point");
    return face.evaluate(x);
}

void DomainSpec::finalize() {
    if (dim < 1 || dim > kMaxDim) throw ScenarioError("dimension out of range");
    if (faces.empty() || faces.size() > 16) throw ScenarioError("need 1..16 faces");
    if (box.lo.n != dim || box.hi.n != dim) throw ScenarioError("bounding box dimension mismatch");
    diameter = box.diameter();
    if (!(diameter > 0)) throw ScenarioError("degenerate bounding box");
    if (boundary_tol <= 0) boundary_tol = 1e-9 * diameter;
    if (probe_radius <= 0) probe_radius = 1e-3 * diameter;
    if (!(working_margin > 0)) throw ScenarioError("working margin must be > 0");
    if (!(boundary_tol < working_margin)) throw ScenarioError("boundary tol must be < working margin");

    const int m = num_faces();
    grad_sup.assign(m, 0.0);
    grad_face_min.assign(m, 0.0);

    // sample gradient magnitudes over a slightly padded box
    const int kBoxSamples = 512;
    for (int i = 0; i < m; ++i) {
        double sup = 0.0;
        for (int k = 0; k < kBoxSamples; ++k) {
            Vecd u = halton_point(static_cast<std::uint64_t>(k), dim);
            for (int d = 0; d < dim; ++d) u[d] = -0.1 + 1.2 * u[d];
            Vecd p = box.lerp(u);
            sup = std::max(sup, norm2(faces[i].evaluate(p).gradient));
        }
        grad_sup[i] = 1.25 * sup;
        if (!(grad_sup[i] > 0)) throw ScenarioError("face gradient vanishes on the box");
    }

    // curvature bounds: exact for halfspace/ball, sampled second
    // differences of the gradient for polynomial faces
    hess_sup.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        if (faces[i].kind == FaceKind::Halfspace) {
            hess_sup[i] = 0.0;
        } else if (faces[i].kind == FaceKind::Ball) {
            hess_sup[i] = 2.0 * std::sqrt(static_cast<double>(dim));
        } else {
            double sup = 0.0;
            const double h = 1e-5 * diameter;
            for (int k = 0; k < 256; ++k) {
                Vecd u = halton_point(static_cast<std::uint64_t>(3000 + k), dim);
                for (int d = 0; d < dim; ++d) u[d] = -0.1 + 1.2 * u[d];
                Vecd p = box.lerp(u);
                double fro2 = 0.0;
                for (int d = 0; d < dim; ++d) {
                    Vecd pp = p, pm = p;
                    pp[d] += h;
                    pm[d] -= h;
                    Vecd row = (1.0 / (2.0 * h)) *
                               (faces[i].evaluate(pp).gradient - faces[i].evaluate(pm).gradient);
                    fro2 += dot(row, row);
                }
                sup = std::max(sup, std::sqrt(fro2));
            }
            hess_sup[i] = 1.5 * sup;
        }
    }

    // sampled face points: gradient nonzero, unit reflection, positive
    // normal component
    const int kFaceSamples = 96;
    for (int i = 0; i < m; ++i) {
        double gmin = grad_sup[i];
        int hits = 0;
        for (int k = 0; k < 8 * kFaceSamples && hits < kFaceSamples; ++k) {
            Vecd u = halton_point(static_cast<std::uint64_t>(1000 + k), dim);
            Vecd p = box.lerp(u);
            if (!project_to_face(*this, i, p)) continue;
            bool in_box = true;
            for (int d = 0; d < dim; ++d)
                if (p[d] < box.lo[d] - 0.05 * diameter || p[d] > box.hi[d] + 0.05 * diameter)
                    in_box = false;
            if (!in_box) continue;
            // keep only points on the retained boundary (other faces hold)
            bool on_domain = true;
            for (int j = 0; j < m && on_domain; ++j) {
                if (j == i) continue;
                if (faces[j].evaluate(p).value < -boundary_tol) on_domain = false;
            }
            if (!on_domain) continue;
            ++hits;
            FaceEval fe = faces[i].evaluate(p);
            double gn = norm2(fe.gradient);
            if (!(gn > 0)) throw ScenarioError("zero face gradient at sampled face point");
            gmin = std::min(gmin, gn);
            Vecd g = faces[i].reflection_dir(p);
            if (std::abs(norm2(g) - 1.0) > 1e-12)
                throw ScenarioError("reflection field not unit at face point");
            if (!(dot(g, normalized(fe.gradient)) > 0))
                throw ScenarioError("reflection field lacks positive normal component");
        }
        grad_face_min[i] = hits > 0 ? 0.9 * gmin : 0.5 * grad_sup[i] / 1.25;
    }
}

double DomainSpec::distance_lower_bound(const Vecd& x) const {
    double d = working_margin;
    for (int i = 0; i < num_faces(); ++i) {
        double v = faces[i].value(x);
        if (v <= 0) return 0.0;
        d = std::min(d, v / grad_sup[i]);
    }
    return d;
}

double DomainSpec::violation_depth(const Vecd& x) const {
    double depth = 0.0;
    for (int i = 0; i < num_faces(); ++i) {
        double v = faces[i].value(x);
        if (v < 0) depth = std::max(depth, -v / grad_face_min[i]);
    }
    return depth;
}

Classification classify(const DomainSpec& dom, const Vecd& x) {
    Classification out;
    const double tol = dom.boundary_tol;
    bool any_violated = false;
    double worst_scaled = 0.0;
    for (int i = 0; i < dom.num_faces(); ++i) {
        double v = dom.faces[i].value(x);
        if (v <= tol) out.active.push_back(i);
        if (v < -tol) {
            any_violated = true;
            worst_scaled = std::max(worst_scaled, -v / dom.grad_face_min[i]);
        }
    }
    if (out.active.empty()) {
        out.region = Region::Interior;
    } else if (!any_violated) {
        out.region = Region::Boundary;
    } else if (worst_scaled <= dom.working_margin) {
        out.region = Region::Exterior;
    } else {
        out.region = Region::OutsideWorkingRegion;
    }
    return out;
}

namespace {

// I(z) with zero tolerance, restricted to candidate faces.
std::vector<int> zero_tol_index_set(const DomainSpec& dom, const Vecd& z) {
    std::vector<int> idx;
    for (int i = 0; i < dom.num_faces(); ++i)
        if (dom.faces[i].value(z) <= 0.0) idx.push_back(i);
    return idx;
}

bool strictly_outside(const DomainSpec& dom, const Vecd& z) {
    for (int i = 0; i < dom.num_faces(); ++i)
        if (dom.faces[i].value(z) < 0.0) return true;
    return false;
}

}  // namespace

std::vector<std::vector<int>> realizable_exterior_subsets(const DomainSpec& dom,
                                                          const Vecd& x) {
    Classification cl = classify(dom, x);
    if (cl.region != Region::Boundary)
        throw NotOnBoundary("realizable_exterior_subsets: point is not on the boundary");
    const auto& I = cl.active;
    const int k = static_cast<int>(I.size());

    std::vector<Vecd> normals;
    normals.reserve(k);
    for (int i : I) normals.push_back(dom.faces[i].unit_normal(x));

    std::vector<std::vector<int>> found;
    auto record = [&](const Vecd& z) {
        if (!strictly_outside(dom, z)) return;
        std::vector<int> iz = zero_tol_index_set(dom, z);
        if (iz.empty()) return;
        // must be a subset of I(x)
        for (int j : iz)
            if (std::find(I.begin(), I.end(), j) == I.end()) return;
        if (std::find(found.begin(), found.end(), iz) == found.end()) found.push_back(iz);
    };

    // deterministic probes: z = x - t * sum_{i in S} n_i over all nonempty S
    const double r0 = dom.probe_radius;
    std::vector<Vecd> probe_dirs;
    auto add_dir = [&](Vecd d) {
        double m = norm2(d);
        if (m <= 1e-12) return;
        d = (1.0 / m) * d;
        for (const auto& e : probe_dirs)
            if (dist(e, d) < 1e-12) return;
        probe_dirs.push_back(d);
    };
    for (int mask = 1; mask < (1 << k); ++mask) {
        Vecd dir = Vecd::zeros(dom.dim);
        for (int j = 0; j < k; ++j)
            if (mask & (1 << j)) dir += normals[j];
        add_dir(-1.0 * dir);
    }
    // tangential probes: cancelling normals (cusps) hide exterior slivers
    // that are reachable only along the faces, so probe the orthogonal
    // complement of each active normal as well
    for (int j = 0; j < k; ++j) {
        for (int d = 0; d < dom.dim; ++d) {
            Vecd t = Vecd::zeros(dom.dim);
            t[d] = 1.0;
            t = t - dot(t, normals[j]) * normals[j];
            add_dir(t);
            add_dir(-1.0 * t);
        }
    }
    for (const auto& dir : probe_dirs)
        for (double t = r0; t > r0 * 1e-3; t *= 0.5) record(x + t * dir);

    // quasi-random fallback over the punctured probe ball
    const int kFallback = 256;
    for (int s = 0; s < kFallback; ++s) {
        Vecd u = halton_point(static_cast<std::uint64_t>(s), dom.dim);
        Vecd z = x;
        double norm = 0.0;
        Vecd dirv(dom.dim);
        for (int d = 0; d < dom.dim; ++d) {
            dirv[d] = 2.0 * u[d] - 1.0;
            norm += dirv[d] * dirv[d];
        }
        if (norm <= 1e-12) continue;
        for (double t : {1.0, 0.5, 0.25, 0.1}) {
            Vecd p = z + (t * r0 / std::sqrt(norm)) * dirv;
            record(p);
        }
    }

    if (found.empty())
        throw EmptyScriptI("no exterior probe succeeded near the boundary point");
    for (auto& s : found) std::sort(s.begin(), s.end());
    std::sort(found.begin(), found.end());
    return found;
}

std::vector<std::pair<int, Vecd>> reflection_cone(const DomainSpec& dom, const Vecd& x) {
    Classification cl = classify(dom, x);
    if (cl.region != Region::Boundary)
        throw NotOnBoundary("reflection_cone: point is not on the boundary");
    std::vector<std::pair<int, Vecd>> gens;
    gens.reserve(cl.active.size());
    for (int i : cl.active) gens.emplace_back(i, dom.faces[i].reflection_dir(x));
    return gens;
}

LocalBoundaryData local_boundary_data(const DomainSpec& dom, const Vecd& x,
                                      bool with_subsets) {
    Classification cl = classify(dom, x);
    if (cl.region != Region::Boundary)
        throw NotOnBoundary("local_boundary_data: point is not on the boundary");
    LocalBoundaryData out;
    out.x = x;
    out.active = cl.active;
    for (int i : cl.active) {
        out.normals.push_back(dom.faces[i].unit_normal(x));
        out.dirs.push_back(dom.faces[i].reflection_dir(x));
    }
    if (with_subsets) out.exterior_subsets = realizable_exterior_subsets(dom, x);
    return out;
}

bool project_to_face(const DomainSpec& dom, int face, Vecd& x, int iters) {
    const FaceSpec& f = dom.faces[face];
    for (int it = 0; it < iters; ++it) {
        FaceEval fe = f.evaluate(x);
        double g2 = dot(fe.gradient, fe.gradient);
        if (g2 <= 1e-20) return false;
        double step = fe.value / g2;
        x = x - step * fe.gradient;
        if (std::abs(fe.value) <= 1e-14 * std::max(1.0, dom.diameter)) break;
    }
    return std::abs(f.evaluate(x).value) <= 1e-10 * std::max(1.0, dom.diameter);
}

namespace {

// Pairwise intersection points psi_i = psi_j = 0 by Gauss-Newton.
std::vector<Vecd> face_pair_points(const DomainSpec& dom, std::uint64_t seed) {
    std::vector<Vecd> pts;
    const int m = dom.num_faces();
    CounterRng rng(seed, 0xface);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            for (int attempt = 0; attempt < 40; ++attempt) {
                Vecd u(dom.dim);
                for (int d = 0; d < dom.dim; ++d) u[d] = rng.uniform();
                Vecd x = dom.box.lerp(u);
                bool ok = true;
                for (int it = 0; it < 96 && ok; ++it) {
                    FaceEval a = dom.faces[i].evaluate(x);
                    FaceEval b = dom.faces[j].evaluate(x);
                    if (std::abs(a.value) <= 1e-30 && std::abs(b.value) <= 1e-30) break;
                    Vecd dx(dom.dim);
                    if (dom.dim == 2) {
                        // direct 2x2 solve; the Gram-matrix route cancels
                        // catastrophically for tangential pairs
                        double det = a.gradient[0] * b.gradient[1] -
                                     a.gradient[1] * b.gradient[0];
                        if (std::abs(det) < 1e-300) break;
                        dx[0] = (-a.value * b.gradient[1] + b.value * a.gradient[1]) / det;
                        dx[1] = (-b.value * a.gradient[0] + a.value * b.gradient[0]) / det;
                    } else {
                        // least-squares step through the 2x2 Gram system
                        double g11 = dot(a.gradient, a.gradient);
                        double g12 = dot(a.gradient, b.gradient);
                        double g22 = dot(b.gradient, b.gradient);
                        double det = g11 * g22 - g12 * g12;
                        if (std::abs(det) < 1e-30) break;
                        double c1 = (-a.value * g22 + b.value * g12) / det;
                        double c2 = (-b.value * g11 + a.value * g12) / det;
                        dx = c1 * a.gradient + c2 * b.gradient;
                    }
                    // a runaway step means the intersection is spurious
                    if (norm2(dx) > dom.diameter) {
                        ok = false;
                        break;
                    }
                    x += dx;
                    if (!all_finite(x)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                if (std::abs(dom.faces[i].evaluate(x).value) > dom.boundary_tol) continue;
                if (std::abs(dom.faces[j].evaluate(x).value) > dom.boundary_tol) continue;
                bool on_domain = true;
                for (int l = 0; l < m; ++l)
                    if (dom.faces[l].evaluate(x).value < -dom.boundary_tol) on_domain = false;
                if (!on_domain) continue;
                bool dup = false;
                for (const auto& p : pts)
                    if (dist(p, x) < 1e-7 * dom.diameter) dup = true;
                if (!dup) pts.push_back(x);
            }
        }
    }
    return pts;
}

}  // namespace

std::vector<Vecd> sample_boundary(const DomainSpec& dom, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ScenarioError("sample_boundary: n_samples >= 1 required");
    std::vector<Vecd> out;
    out.reserve(static_cast<size_t>(n_samples));

    // corners / multi-face points first
    for (const auto& p : face_pair_points(dom, seed)) {
        out.push_back(p);
        if (static_cast<int>(out.size()) >= n_samples) return out;
    }

    const int m = dom.num_faces();
    CounterRng rng(seed, 0xb0d1);
    int budget = 400 * n_samples;
    int face = 0;
    while (static_cast<int>(out.size()) < n_samples && budget-- > 0) {
        Vecd u(dom.dim);
        for (int d = 0; d < dom.dim; ++d) u[d] = rng.uniform();
        Vecd x = dom.box.lerp(u);
        int i = face;
        face = (face + 1) % m;
        if (!project_to_face(dom, i, x)) continue;
        bool in_box = true;
        for (int d = 0; d < dom.dim; ++d)
            if (x[d] < dom.box.lo[d] || x[d] > dom.box.hi[d]) in_box = false;
        if (!in_box) continue;
        bool on_domain = true;
        for (int j = 0; j < m; ++j)
            if (dom.faces[j].evaluate(x).value < -dom.boundary_tol) on_domain = false;
        if (!on_domain) continue;
        out.push_back(x);
    }
    if (out.empty()) throw BoundarySamplingFailed("rejection sampling found no boundary points");
    return out;
}

}  // namespace refldiff
