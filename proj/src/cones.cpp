#include "refldiff/cones.hpp"

#include <algorithm>
#include <cmath>

#include "refldiff/errors.hpp"
#include "refldiff/linalg.hpp"
#include "refldiff/lp.hpp"

namespace refldiff {

namespace {

constexpr double kGameTol = 1e-10;

Matd pairing_matrix(const LocalBoundaryData& local, const std::vector<int>& rows,
                    const std::vector<int>& cols) {
    // M_ab = <n_{rows[a]}, g_{cols[b]}> with indices into local.active
    Matd M(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (size_t a = 0; a < rows.size(); ++a)
        for (size_t b = 0; b < cols.size(); ++b)
            M(static_cast<int>(a), static_cast<int>(b)) =
                dot(local.normals[rows[a]], local.dirs[cols[b]]);
    return M;
}

int active_position(const LocalBoundaryData& local, int face) {
    for (size_t k = 0; k < local.active.size(); ++k)
        if (local.active[k] == face) return static_cast<int>(k);
    return -1;
}

}  // namespace

CommonDirectionVerdict check_condition_b(const LocalBoundaryData& local) {
    CommonDirectionVerdict out;
    const int k = static_cast<int>(local.active.size());
    if (k == 0) return out;

    // maximize over alpha in the simplex the worst pairing
    // min_j <sum alpha_i n_i, g_j>; positivity is scale-invariant so the
    // simplex normalization decides the verdict, and the witness is
    // renormalized to |e| = 1 afterwards.
    std::vector<int> all(k);
    for (int i = 0; i < k; ++i) all[i] = i;
    Matd M = pairing_matrix(local, all, all);
    GameResult g = matrix_game_maximin(M);

    Vecd e = Vecd::zeros(local.x.n);
    for (int i = 0; i < k; ++i) e += g.weights[i] * local.normals[i];
    double en = norm2(e);
    if (g.value > kGameTol && en > 1e-14) {
        Vecd eh = (1.0 / en) * e;
        double margin = 1e300;
        for (int j = 0; j < k; ++j) margin = std::min(margin, dot(local.dirs[j], eh));
        out.holds = margin > kGameTol;
        out.witness = eh;
        out.margin = margin;
    } else {
        out.holds = false;
        out.margin = g.value;
    }
    return out;
}

GameVerdict check_condition_c(const LocalBoundaryData& local) {
    GameVerdict out;
    if (local.exterior_subsets.empty()) return out;

    out.beta = 1e300;
    for (const auto& subset : local.exterior_subsets) {
        std::vector<int> pos;
        pos.reserve(subset.size());
        for (int face : subset) {
            int p = active_position(local, face);
            if (p < 0) continue;
            pos.push_back(p);
        }
        if (pos.empty()) continue;
        Matd M = pairing_matrix(local, pos, pos);
        GameResult g = (pos.size() == 1) ? GameResult{M(0, 0), {1.0}} : matrix_game(M);
        GameSubsetValue v;
        v.subset = subset;
        v.value = g.value;
        v.weights = g.weights;
        out.per_subset.push_back(v);
        if (g.value < out.beta) {
            out.beta = g.value;
            out.worst_subset = subset;
            out.worst_weights = g.weights;
        }
    }
    out.holds = !out.per_subset.empty() && out.beta > kGameTol;
    return out;
}

ConeReport cone_report(const DomainSpec& dom, const Vecd& x) {
    LocalBoundaryData local = local_boundary_data(dom, x, true);
    ConeReport rep;
    rep.x = x;
    rep.active = local.active;
    rep.direction = check_condition_b(local);
    rep.game = check_condition_c(local);
    return rep;
}

std::vector<double> decompose_direction(const LocalBoundaryData& local, const Vecd& u,
                                        int num_faces) {
    const int k = static_cast<int>(local.active.size());
    const int d = u.n;
    Matd G(d, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < d; ++i) G(i, j) = local.dirs[j][i];
    std::vector<double> b(d);
    for (int i = 0; i < d; ++i) b[i] = u[i];

    NnlsResult nn = nnls(G, b);
    if (nn.residual > 1e-8)
        throw NotInCone("direction is not in the reflection cone (NNLS residual " +
                        std::to_string(nn.residual) + ")");

    std::vector<double> eta = nn.x;

    // Pseudo-inverse refinement to the minimal-norm nonnegative solution.
    // At the optimum, the coefficients restricted to their support are the
    // minimal-norm solution of the support-restricted system, i.e. the
    // pseudo-inverse applied to u. For the small face counts here the
    // support can be enumerated outright; NNLS alone stops at a vertex
    // (at most d positive coefficients), which is generally not the
    // minimal-norm point when the generators are linearly dependent.
    if (k <= 8) {
        double best_norm2 = 1e300;
        std::vector<double> best;
        std::vector<double> etas;
        for (int mask = 1; mask < (1 << k); ++mask) {
            int ks = 0;
            for (int j = 0; j < k; ++j)
                if (mask & (1 << j)) ++ks;
            Matd Gs(d, ks);
            int col = 0;
            for (int j = 0; j < k; ++j) {
                if (!(mask & (1 << j))) continue;
                for (int i = 0; i < d; ++i) Gs(i, col) = G(i, j);
                ++col;
            }
            Matd P = pinv(Gs);
            etas.assign(static_cast<size_t>(ks), 0.0);
            bool nonneg = true;
            double n2 = 0.0;
            for (int a = 0; a < ks; ++a) {
                double s = 0;
                for (int i = 0; i < d; ++i) s += P(a, i) * b[i];
                if (s < -1e-12) nonneg = false;
                etas[static_cast<size_t>(a)] = std::max(0.0, s);
                n2 += s * s;
            }
            if (!nonneg || n2 >= best_norm2) continue;
            std::vector<double> cand(static_cast<size_t>(k), 0.0);
            Vecd r = u;
            col = 0;
            for (int j = 0; j < k; ++j) {
                if (!(mask & (1 << j))) continue;
                cand[static_cast<size_t>(j)] = etas[static_cast<size_t>(col)];
                r = r - cand[static_cast<size_t>(j)] * local.dirs[static_cast<size_t>(j)];
                ++col;
            }
            if (norm2(r) > nn.residual + 1e-10) continue;
            best_norm2 = n2;
            best = std::move(cand);
        }
        if (!best.empty()) eta = best;
    }

    std::vector<double> full(static_cast<size_t>(num_faces), 0.0);
    for (int j = 0; j < k; ++j) full[static_cast<size_t>(local.active[j])] = eta[j];
    return full;
}

SweepSummary boundary_sweep(const DomainSpec& dom, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ScenarioError("boundary_sweep: n_samples >= 1 required");
    std::vector<Vecd> pts = sample_boundary(dom, n_samples, seed);
    SweepSummary out;
    out.min_margin = 1e300;
    out.min_beta = 1e300;
    out.all_hold = true;
    out.reports.reserve(pts.size());
    for (const auto& p : pts) {
        ConeReport rep = cone_report(dom, p);
        out.min_margin = std::min(out.min_margin, rep.direction.margin);
        if (rep.game.holds || !rep.game.per_subset.empty())
            out.min_beta = std::min(out.min_beta, rep.game.beta);
        out.all_hold = out.all_hold && rep.holds();
        out.reports.push_back(std::move(rep));
    }
    return out;
}

}  // namespace refldiff
