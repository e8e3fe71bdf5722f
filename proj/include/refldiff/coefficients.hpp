#pragma once

#include <string>
#include <vector>

#include "refldiff/common.hpp"
#include "refldiff/geometry.hpp"

namespace refldiff {

enum class CoeffKind { Constant, Affine, Builtin };

/// Drift b(x) and diffusion sigma(x); bounded on the working region.
struct DiffusionCoefficients {
    int dim = 0;

    CoeffKind drift_kind = CoeffKind::Constant;
    Vecd drift_const;       // Constant / Affine offset
    Matd drift_linear;      // Affine: b(x) = b0 + B x
    std::string builtin;    // Builtin: "bm" (b = 0, sigma = I)

    CoeffKind sigma_kind = CoeffKind::Constant;
    Matd sigma_const;       // Constant
    Vecd sigma_diag0;       // Affine (diagonal): sigma_ii = a_i + <d_i, x>
    Matd sigma_diag_lin;

    Vecd drift(const Vecd& x) const;
    Matd sigma(const Vecd& x) const;
    /// Upper bound for |sigma(x) xi| per unit |xi| (Frobenius norm).
    double sigma_bound(const Vecd& x) const;
    /// sigma(x) * w without building the matrix (stepper hot path).
    Vecd apply_sigma(const Vecd& x, const Vecd& w) const;

    static DiffusionCoefficients brownian(int dim);
    static DiffusionCoefficients constant(const Vecd& b, const Matd& s);

    /// Sampled boundedness/finiteness check over the box.
    void validate(const BoundingBox& box) const;
};

enum class TestFnKind { Constant, Exponential, Polynomial, Bump, ExpSum };

/// Scalar test function with gradient and Hessian evaluators.
/// kinds: constant c; exponential exp(<a,x>); polynomial; bump
/// exp(-|x-c|^2 / w^2); expsum sum_k c_k exp(<a_k, x>).
struct TestFunction {
    TestFnKind kind = TestFnKind::Constant;
    int dim = 1;
    double prefactor = 1.0;
    double c = 0.0;           // Constant
    Vecd a;                   // Exponential
    Polynomial poly;          // Polynomial
    Vecd center;              // Bump
    double width = 1.0;       // Bump
    std::vector<std::pair<double, Vecd>> exp_terms;  // ExpSum

    double value(const Vecd& x) const;
    Vecd gradient(const Vecd& x) const;
    Matd hessian(const Vecd& x) const;
    TestFunction negated() const {
        TestFunction f = *this;
        f.prefactor = -f.prefactor;
        return f;
    }
    double raw_value(const Vecd& x) const;
    Vecd raw_gradient(const Vecd& x) const;

    /// A f = <grad f, b> + 1/2 tr(sigma sigma^T D^2 f).
    double generator(const DiffusionCoefficients& coeffs, const Vecd& x) const;

    /// Sampled sup |f| over the box (truncation-bound reporting).
    double sup_abs(const BoundingBox& box, int samples = 2048) const;

    static TestFunction one() {
        TestFunction f;
        f.kind = TestFnKind::Constant;
        f.c = 1.0;
        return f;
    }
    static TestFunction constant_fn(double value) {
        TestFunction f;
        f.kind = TestFnKind::Constant;
        f.c = value;
        return f;
    }
    static TestFunction exponential(const Vecd& a_) {
        TestFunction f;
        f.kind = TestFnKind::Exponential;
        f.dim = a_.n;
        f.a = a_;
        return f;
    }
};

}  // namespace refldiff
