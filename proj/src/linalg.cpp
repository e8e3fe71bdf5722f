#include "refldiff/linalg.hpp"

#include <cmath>
#include <numeric>

#include "refldiff/errors.hpp"

namespace refldiff {

std::vector<double> lstsq(const Matd& A, const std::vector<double>& b, double rank_tol) {
    int m = A.rows, n = A.cols;
    Matd R = A;
    std::vector<double> y = b;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    auto col_norm2_below = [&](int j, int row0) {
        double s = 0;
        for (int i = row0; i < m; ++i) s += R(i, j) * R(i, j);
        return s;
    };

    int rank = 0;
    double max_diag = 0.0;
    for (int k = 0; k < std::min(m, n); ++k) {
        // column pivot: largest remaining norm
        int best = k;
        double bestn = col_norm2_below(k, k);
        for (int j = k + 1; j < n; ++j) {
            double nj = col_norm2_below(j, k);
            if (nj > bestn * (1.0 + 1e-14)) {
                bestn = nj;
                best = j;
            }
        }
        if (best != k) {
            for (int i = 0; i < m; ++i) std::swap(R(i, k), R(i, best));
            std::swap(perm[k], perm[best]);
        }
        double alpha = std::sqrt(bestn);
        if (k == 0) max_diag = alpha;
        if (alpha <= rank_tol * std::max(1.0, max_diag)) break;

        // Householder vector for column k
        if (R(k, k) > 0) alpha = -alpha;
        std::vector<double> v(m - k, 0.0);
        v[0] = R(k, k) - alpha;
        for (int i = k + 1; i < m; ++i) v[i - k] = R(i, k);
        double vnorm2 = 0;
        for (double t : v) vnorm2 += t * t;
        if (vnorm2 > 0) {
            for (int j = k; j < n; ++j) {
                double s = 0;
                for (int i = k; i < m; ++i) s += v[i - k] * R(i, j);
                s *= 2.0 / vnorm2;
                for (int i = k; i < m; ++i) R(i, j) -= s * v[i - k];
            }
            double s = 0;
            for (int i = k; i < m; ++i) s += v[i - k] * y[i];
            s *= 2.0 / vnorm2;
            for (int i = k; i < m; ++i) y[i] -= s * v[i - k];
        }
        R(k, k) = alpha;
        ++rank;
    }

    std::vector<double> xp(n, 0.0);
    for (int i = rank - 1; i >= 0; --i) {
        double s = y[i];
        for (int j = i + 1; j < rank; ++j) s -= R(i, j) * xp[j];
        xp[i] = s / R(i, i);
    }
    std::vector<double> x(n, 0.0);
    for (int j = 0; j < rank; ++j) x[perm[j]] = xp[j];
    return x;
}

Svd svd(const Matd& A, int max_sweeps) {
    int m = A.rows, n = A.cols;
    Matd U = A;
    Matd V = Matd::identity(n);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool converged = true;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (int i = 0; i < m; ++i) {
                    app += U(i, p) * U(i, p);
                    aqq += U(i, q) * U(i, q);
                    apq += U(i, p) * U(i, q);
                }
                if (std::abs(apq) <= 1e-30 ||
                    std::abs(apq) <= 1e-16 * std::sqrt(app * aqq))
                    continue;
                converged = false;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0 ? 1.0 : -1.0) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (int i = 0; i < m; ++i) {
                    double up = U(i, p), uq = U(i, q);
                    U(i, p) = c * up - s * uq;
                    U(i, q) = s * up + c * uq;
                }
                for (int i = 0; i < n; ++i) {
                    double vp = V(i, p), vq = V(i, q);
                    V(i, p) = c * vp - s * vq;
                    V(i, q) = s * vp + c * vq;
                }
            }
        }
        if (converged) break;
    }

    std::vector<double> sig(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += U(i, j) * U(i, j);
        sig[j] = std::sqrt(s);
    }
    // sort descending
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return sig[a] > sig[b]; });

    Svd out;
    out.u = Matd(m, n);
    out.v = Matd(n, n);
    out.sig.resize(n);
    for (int k = 0; k < n; ++k) {
        int j = order[k];
        out.sig[k] = sig[j];
        double inv = sig[j] > 0 ? 1.0 / sig[j] : 0.0;
        for (int i = 0; i < m; ++i) out.u(i, k) = U(i, j) * inv;
        for (int i = 0; i < n; ++i) out.v(i, k) = V(i, j);
    }
    return out;
}

Matd pinv(const Matd& A, double rel_tol) {
    Svd d = svd(A);
    double smax = d.sig.empty() ? 0.0 : d.sig[0];
    Matd P(A.cols, A.rows);
    for (size_t k = 0; k < d.sig.size(); ++k) {
        if (d.sig[k] <= rel_tol * std::max(1.0, smax)) continue;
        double inv = 1.0 / d.sig[k];
        for (int i = 0; i < A.cols; ++i)
            for (int j = 0; j < A.rows; ++j)
                P(i, j) += d.v(i, static_cast<int>(k)) * inv * d.u(j, static_cast<int>(k));
    }
    return P;
}

NnlsResult nnls(const Matd& A, const std::vector<double>& b, int max_iter) {
    int m = A.rows, n = A.cols;
    if (max_iter <= 0) max_iter = 6 * n + 30;

    std::vector<char> passive(n, 0);
    std::vector<double> x(n, 0.0);

    auto resid = [&](const std::vector<double>& xx) {
        std::vector<double> r(m);
        for (int i = 0; i < m; ++i) {
            double s = b[i];
            for (int j = 0; j < n; ++j) s -= A(i, j) * xx[j];
            r[i] = s;
        }
        return r;
    };
    auto solve_passive = [&]() {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j)
            if (passive[j]) idx.push_back(j);
        Matd Ap(m, static_cast<int>(idx.size()));
        for (int i = 0; i < m; ++i)
            for (size_t k = 0; k < idx.size(); ++k) Ap(i, static_cast<int>(k)) = A(i, idx[k]);
        std::vector<double> z = lstsq(Ap, b);
        std::vector<double> zfull(n, 0.0);
        for (size_t k = 0; k < idx.size(); ++k) zfull[idx[k]] = z[k];
        return zfull;
    };

    NnlsResult out;
    double bnorm = 0;
    for (double v : b) bnorm += v * v;
    double grad_tol = 1e-12 * std::max(1.0, std::sqrt(bnorm)) * std::max(1.0, A.frob());

    for (int iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter;
        std::vector<double> r = resid(x);
        // gradient of 1/2|Ax-b|^2 is -A^T r; candidates want positive A^T r
        int best = -1;
        double bestw = grad_tol;
        for (int j = 0; j < n; ++j) {
            if (passive[j]) continue;
            double w = 0;
            for (int i = 0; i < m; ++i) w += A(i, j) * r[i];
            if (w > bestw * (1.0 + 1e-12)) {
                bestw = w;
                best = j;
            }
        }
        if (best < 0) break;
        passive[best] = 1;

        std::vector<double> z = solve_passive();
        int guard = 0;
        while (true) {
            double worst = 0.0;
            for (int j = 0; j < n; ++j)
                if (passive[j] && z[j] <= 0.0 && z[j] < worst) worst = z[j];
            if (worst >= 0.0) break;
            // step from x toward z stopping at the first zero crossing
            double alpha = 1.0;
            for (int j = 0; j < n; ++j) {
                if (!passive[j] || z[j] > 0.0) continue;
                double denom = x[j] - z[j];
                if (denom > 0) alpha = std::min(alpha, x[j] / denom);
            }
            for (int j = 0; j < n; ++j)
                if (passive[j]) x[j] += alpha * (z[j] - x[j]);
            for (int j = 0; j < n; ++j)
                if (passive[j] && x[j] <= 1e-14) {
                    x[j] = 0.0;
                    passive[j] = 0;
                }
            z = solve_passive();
            if (++guard > n + 2) break;
        }
        x = z;
        for (int j = 0; j < n; ++j)
            if (x[j] < 0) x[j] = 0;
    }

    std::vector<double> r = resid(x);
    double rn = 0;
    for (double v : r) rn += v * v;
    out.residual = std::sqrt(rn);
    out.x = std::move(x);
    return out;
}

}  // namespace refldiff
