#include "refldiff/lp.hpp"

#include <cmath>
#include <limits>

namespace refldiff {

namespace {

constexpr double kEps = 1e-11;

struct Tableau {
    int m, ncols;  // ncols excludes rhs
    std::vector<std::vector<double>> t;  // m rows + cost row, each ncols+1
    std::vector<int> basis;

    Tableau(int m_, int ncols_) : m(m_), ncols(ncols_), basis(m_, -1) {
        t.assign(m + 1, std::vector<double>(ncols + 1, 0.0));
    }

    void pivot(int row, int col) {
        double piv = t[row][col];
        for (int j = 0; j <= ncols; ++j) t[row][j] /= piv;
        for (int i = 0; i <= m; ++i) {
            if (i == row) continue;
            double f = t[i][col];
            if (f == 0.0) continue;
            for (int j = 0; j <= ncols; ++j) t[i][j] -= f * t[row][j];
        }
        basis[row] = col;
    }

    // Bland: entering = lowest-index eligible column (reduced cost < -eps),
    // leaving = min-ratio row, ties on lowest basis index.
    LpStatus iterate(const std::vector<char>& allowed) {
        for (int guard = 0; guard < 20000; ++guard) {
            int enter = -1;
            for (int j = 0; j < ncols; ++j) {
                if (!allowed[j]) continue;
                if (t[m][j] < -kEps) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                if (t[i][enter] > kEps) {
                    double ratio = t[i][ncols] / t[i][enter];
                    if (ratio < best - kEps ||
                        (ratio < best + kEps && (leave < 0 || basis[i] < basis[leave]))) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            pivot(leave, enter);
        }
        return LpStatus::Unbounded;  // cycling guard; unreachable with Bland
    }

    // cost row for maximizing obj with coefficients cfull (length ncols):
    // row_j = (z_j - c_j); rhs cell = current objective value.
    void set_cost(const std::vector<double>& cfull) {
        for (int j = 0; j <= ncols; ++j) t[m][j] = 0.0;
        for (int j = 0; j < ncols; ++j) t[m][j] = -cfull[j];
        for (int i = 0; i < m; ++i) {
            double cb = cfull[basis[i]];
            if (cb == 0.0) continue;
            for (int j = 0; j <= ncols; ++j) t[m][j] += cb * t[i][j];
        }
        // keep basic columns exactly zero in the cost row
        for (int i = 0; i < m; ++i) t[m][basis[i]] = 0.0;
    }
};

}  // namespace

LpResult solve_lp(const Matd& A, const std::vector<double>& b,
                  const std::vector<double>& c) {
    int m = A.rows, n = A.cols;
    int n_art = 0;
    for (int i = 0; i < m; ++i)
        if (b[i] < 0) ++n_art;

    int ncols = n + m + n_art;
    Tableau tb(m, ncols);

    int art = n + m;
    for (int i = 0; i < m; ++i) {
        double sgn = b[i] < 0 ? -1.0 : 1.0;
        for (int j = 0; j < n; ++j) tb.t[i][j] = sgn * A(i, j);
        tb.t[i][n + i] = sgn;  // slack
        tb.t[i][ncols] = sgn * b[i];
        if (b[i] < 0) {
            tb.t[i][art] = 1.0;
            tb.basis[i] = art;
            ++art;
        } else {
            tb.basis[i] = n + i;
        }
    }

    std::vector<char> allowed(ncols, 1);

    if (n_art > 0) {
        std::vector<double> phase1(ncols, 0.0);
        for (int j = n + m; j < ncols; ++j) phase1[j] = -1.0;
        tb.set_cost(phase1);
        tb.iterate(allowed);
        if (tb.t[m][ncols] < -1e-8) return {LpStatus::Infeasible, 0.0, {}};
        // drive artificials out of the basis where possible
        for (int i = 0; i < m; ++i) {
            if (tb.basis[i] < n + m) continue;
            int col = -1;
            for (int j = 0; j < n + m; ++j)
                if (std::abs(tb.t[i][j]) > kEps) {
                    col = j;
                    break;
                }
            if (col >= 0) tb.pivot(i, col);
        }
        for (int j = n + m; j < ncols; ++j) allowed[j] = 0;
    }

    std::vector<double> cfull(ncols, 0.0);
    for (int j = 0; j < n; ++j) cfull[j] = c[j];
    tb.set_cost(cfull);
    LpStatus st = tb.iterate(allowed);
    if (st == LpStatus::Unbounded) return {st, 0.0, {}};

    LpResult out;
    out.status = LpStatus::Optimal;
    out.objective = tb.t[m][ncols];
    out.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i)
        if (tb.basis[i] < n) out.x[tb.basis[i]] = tb.t[i][ncols];
    return out;
}

GameResult matrix_game(const Matd& M) {
    int k = M.rows, l = M.cols;
    // variables: eta (k), tplus, tminus
    int n = k + 2;
    Matd A(l + 2, n);
    std::vector<double> b(l + 2, 0.0);
    for (int j = 0; j < l; ++j) {
        for (int i = 0; i < k; ++i) A(j, i) = M(i, j);
        A(j, k) = -1.0;      // -t+
        A(j, k + 1) = 1.0;   // +t-
        b[j] = 0.0;
    }
    for (int i = 0; i < k; ++i) {
        A(l, i) = 1.0;
        A(l + 1, i) = -1.0;
    }
    b[l] = 1.0;
    b[l + 1] = -1.0;

    std::vector<double> c(n, 0.0);
    c[k] = -1.0;  // maximize -t+ + t-  == minimize t
    c[k + 1] = 1.0;

    LpResult r = solve_lp(A, b, c);
    GameResult g;
    g.value = -r.objective;
    g.weights.assign(k, 0.0);
    if (r.status == LpStatus::Optimal)
        for (int i = 0; i < k; ++i) g.weights[i] = r.x[i];
    return g;
}

GameResult matrix_game_maximin(const Matd& M) {
    Matd neg(M.rows, M.cols);
    for (int i = 0; i < M.rows; ++i)
        for (int j = 0; j < M.cols; ++j) neg(i, j) = -M(i, j);
    GameResult g = matrix_game(neg);
    g.value = -g.value;
    return g;
}

}  // namespace refldiff
