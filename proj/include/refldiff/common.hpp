#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace refldiff {

// Hard cap on space dimension and face count; everything downstream sizes
// against this so path records stay allocation-free.
inline constexpr int kMaxDim = 16;

/// Fixed-capacity vector with runtime dimension. Value semantics, no heap.
/// Entries past n are not initialized; every loop is bounded by n.
struct Vecd {
    int n = 0;
    std::array<double, kMaxDim> a;

    Vecd() : n(0) {}
    explicit Vecd(int dim) : n(dim) {
        for (int i = 0; i < n; ++i) a[i] = 0.0;
    }
    Vecd(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
        int i = 0;
        for (double x : xs) a[i++] = x;
    }
    static Vecd zeros(int dim) { return Vecd(dim); }

    double& operator[](int i) { return a[i]; }
    double operator[](int i) const { return a[i]; }
    int size() const { return n; }

    bool operator==(const Vecd& o) const {
        if (n != o.n) return false;
        for (int i = 0; i < n; ++i)
            if (a[i] != o.a[i]) return false;
        return true;
    }
};

inline double dot(const Vecd& x, const Vecd& y) {
    double s = 0;
    for (int i = 0; i < x.n; ++i) s += x.a[i] * y.a[i];
    return s;
}

inline double norm2(const Vecd& x) { return std::sqrt(dot(x, x)); }

inline Vecd operator+(const Vecd& x, const Vecd& y) {
    Vecd r(x.n);
    for (int i = 0; i < x.n; ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

inline Vecd operator-(const Vecd& x, const Vecd& y) {
    Vecd r(x.n);
    for (int i = 0; i < x.n; ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

inline Vecd operator*(double c, const Vecd& x) {
    Vecd r(x.n);
    for (int i = 0; i < x.n; ++i) r.a[i] = c * x.a[i];
    return r;
}

inline Vecd& operator+=(Vecd& x, const Vecd& y) {
    for (int i = 0; i < x.n; ++i) x.a[i] += y.a[i];
    return x;
}

inline Vecd normalized(const Vecd& x) {
    double m = norm2(x);
    if (m <= 0) return x;
    return (1.0 / m) * x;
}

inline bool all_finite(const Vecd& x) {
    for (int i = 0; i < x.n; ++i)
        if (!std::isfinite(x.a[i])) return false;
    return true;
}

inline double dist(const Vecd& x, const Vecd& y) { return norm2(x - y); }

/// Small dense matrix, row-major, heap-backed (cold paths only).
struct Matd {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matd() = default;
    Matd(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Matd identity(int d) {
        Matd m(d, d);
        for (int i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }

    Vecd col(int j) const {
        Vecd v(rows);
        for (int i = 0; i < rows; ++i) v[i] = (*this)(i, j);
        return v;
    }

    Vecd apply(const Vecd& x) const {
        Vecd r(rows);
        for (int i = 0; i < rows; ++i) {
            double s = 0;
            for (int j = 0; j < cols; ++j) s += (*this)(i, j) * x[j];
            r[i] = s;
        }
        return r;
    }

    double frob() const {
        double s = 0;
        for (double v : a) s += v * v;
        return std::sqrt(s);
    }
};

/// Compensated accumulator; clock bookkeeping relies on it so the
/// λ0 + λ1 = s identity survives ~1e6-step paths at 1e-9 relative.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
    void reset(double v = 0.0) { s = v; c = 0.0; }
};

/// Order-stable pairwise sum (reduction used by estimators; reproducible
/// bitwise for a fixed chunking).
inline double pairwise_sum(const double* x, size_t n) {
    if (n <= 8) {
        double s = 0;
        for (size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(x.data(), x.size());
}

}  // namespace refldiff
