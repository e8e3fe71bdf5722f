#include "refldiff/coefficients.hpp"

#include <cmath>

#include "refldiff/errors.hpp"
#include "refldiff/rng.hpp"

namespace refldiff {

Vecd DiffusionCoefficients::drift(const Vecd& x) const {
    switch (drift_kind) {
        case CoeffKind::Constant:
            return drift_const;
        case CoeffKind::Affine: {
            Vecd r = drift_linear.apply(x);
            return drift_const + r;
        }
        case CoeffKind::Builtin:
            return Vecd::zeros(dim);
    }
    return Vecd::zeros(dim);
}

Matd DiffusionCoefficients::sigma(const Vecd& x) const {
    switch (sigma_kind) {
        case CoeffKind::Constant:
            return sigma_const;
        case CoeffKind::Affine: {
            Matd s(dim, dim);
            for (int i = 0; i < dim; ++i) {
                double v = sigma_diag0[i];
                for (int j = 0; j < dim; ++j) v += sigma_diag_lin(i, j) * x[j];
                s(i, i) = v;
            }
            return s;
        }
        case CoeffKind::Builtin:
            return Matd::identity(dim);
    }
    return Matd::identity(dim);
}

double DiffusionCoefficients::sigma_bound(const Vecd& x) const {
    if (sigma_kind == CoeffKind::Builtin) return std::sqrt(static_cast<double>(dim));
    return sigma(x).frob();
}

Vecd DiffusionCoefficients::apply_sigma(const Vecd& x, const Vecd& w) const {
    switch (sigma_kind) {
        case CoeffKind::Builtin:
            return w;
        case CoeffKind::Constant: {
            Vecd r(dim);
            for (int i = 0; i < dim; ++i) {
                double s = 0;
                for (int j = 0; j < dim; ++j) s += sigma_const(i, j) * w[j];
                r[i] = s;
            }
            return r;
        }
        case CoeffKind::Affine: {
            Vecd r(dim);
            for (int i = 0; i < dim; ++i) {
                double v = sigma_diag0[i];
                for (int j = 0; j < dim; ++j) v += sigma_diag_lin(i, j) * x[j];
                r[i] = v * w[i];
            }
            return r;
        }
    }
    return w;
}

DiffusionCoefficients DiffusionCoefficients::brownian(int d) {
    DiffusionCoefficients c;
    c.dim = d;
    c.drift_kind = CoeffKind::Builtin;
    c.sigma_kind = CoeffKind::Builtin;
    c.builtin = "bm";
    c.drift_const = Vecd::zeros(d);
    return c;
}

DiffusionCoefficients DiffusionCoefficients::constant(const Vecd& b, const Matd& s) {
    DiffusionCoefficients c;
    c.dim = b.n;
    c.drift_kind = CoeffKind::Constant;
    c.drift_const = b;
    c.sigma_kind = CoeffKind::Constant;
    c.sigma_const = s;
    return c;
}

void DiffusionCoefficients::validate(const BoundingBox& box) const {
    for (int k = 0; k < 256; ++k) {
        Vecd u = halton_point(static_cast<std::uint64_t>(k), dim);
        Vecd x = box.lerp(u);
        Vecd b = drift(x);
        double sb = sigma_bound(x);
        if (!all_finite(b) || !std::isfinite(sb) || norm2(b) > 1e8 || sb > 1e8)
            throw ScenarioError("coefficients unbounded or non-finite on the working region");
    }
}

double TestFunction::value(const Vecd& x) const {
    return prefactor * raw_value(x);
}

double TestFunction::raw_value(const Vecd& x) const {
    switch (kind) {
        case TestFnKind::Constant:
            return c;
        case TestFnKind::Exponential:
            return std::exp(dot(a, x));
        case TestFnKind::Polynomial:
            return poly.eval(x);
        case TestFnKind::Bump: {
            Vecd d = x - center;
            return std::exp(-dot(d, d) / (width * width));
        }
        case TestFnKind::ExpSum: {
            double s = 0.0;
            for (const auto& [ck, ak] : exp_terms) s += ck * std::exp(dot(ak, x));
            return s;
        }
    }
    return 0.0;
}

Vecd TestFunction::gradient(const Vecd& x) const {
    return prefactor * raw_gradient(x);
}

Vecd TestFunction::raw_gradient(const Vecd& x) const {
    switch (kind) {
        case TestFnKind::Constant:
            return Vecd::zeros(x.n);
        case TestFnKind::Exponential:
            return raw_value(x) * a;
        case TestFnKind::Polynomial:
            return poly.grad(x);
        case TestFnKind::Bump: {
            Vecd d = x - center;
            return (-2.0 / (width * width) * raw_value(x)) * d;
        }
        case TestFnKind::ExpSum: {
            Vecd g = Vecd::zeros(x.n);
            for (const auto& [ck, ak] : exp_terms) g += (ck * std::exp(dot(ak, x))) * ak;
            return g;
        }
    }
    return Vecd::zeros(x.n);
}

Matd TestFunction::hessian(const Vecd& x) const {
    const int d = x.n;
    Matd h(d, d);
    switch (kind) {
        case TestFnKind::Constant:
            break;
        case TestFnKind::Exponential: {
            double v = raw_value(x);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) h(i, j) = v * a[i] * a[j];
            break;
        }
        case TestFnKind::Polynomial: {
            // differentiate grad terms once more
            for (int i = 0; i < d; ++i) {
                Polynomial gi;
                gi.dim = poly.dim;
                for (const auto& t : poly.terms) {
                    if (t.pow[i] == 0) continue;
                    PolyTerm dt = t;
                    dt.coef *= t.pow[i];
                    dt.pow[i] -= 1;
                    gi.terms.push_back(dt);
                }
                Vecd row = gi.grad(x);
                for (int j = 0; j < d; ++j) h(i, j) = row[j];
            }
            break;
        }
        case TestFnKind::Bump: {
            double v = raw_value(x);
            double w2 = width * width;
            Vecd dd = x - center;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    h(i, j) = v * (4.0 * dd[i] * dd[j] / (w2 * w2) -
                                   (i == j ? 2.0 / w2 : 0.0));
            break;
        }
        case TestFnKind::ExpSum: {
            for (const auto& [ck, ak] : exp_terms) {
                double v = ck * std::exp(dot(ak, x));
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) h(i, j) += v * ak[i] * ak[j];
            }
            break;
        }
    }
    if (prefactor != 1.0) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) h(i, j) *= prefactor;
    }
    return h;
}

double TestFunction::generator(const DiffusionCoefficients& coeffs, const Vecd& x) const {
    double s = dot(gradient(x), coeffs.drift(x));
    Matd sg = coeffs.sigma(x);
    Matd hs = hessian(x);
    // 1/2 tr(sigma sigma^T H) = 1/2 sum_{k} (sigma^T H sigma)_{kk}
    const int d = x.n;
    double tr = 0.0;
    for (int k = 0; k < d; ++k) {
        // column k of sigma
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) tr += sg(i, k) * hs(i, j) * sg(j, k);
    }
    return s + 0.5 * tr;
}

double TestFunction::sup_abs(const BoundingBox& box, int samples) const {
    double sup = 0.0;
    for (int k = 0; k < samples; ++k) {
        Vecd u = halton_point(static_cast<std::uint64_t>(k), box.lo.n);
        sup = std::max(sup, std::abs(value(box.lerp(u))));
    }
    // include corners (exact for exponential/affine-dominated shapes)
    const int d = box.lo.n;
    for (int mask = 0; mask < (1 << d); ++mask) {
        Vecd p(d);
        for (int i = 0; i < d; ++i) p[i] = (mask & (1 << i)) ? box.hi[i] : box.lo[i];
        sup = std::max(sup, std::abs(value(p)));
    }
    return sup;
}

}  // namespace refldiff
