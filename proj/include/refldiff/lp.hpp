#pragma once

#include <vector>

#include "refldiff/common.hpp"

namespace refldiff {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    double objective = 0.0;
    std::vector<double> x;
};

/// maximize c.x subject to A x <= b, x >= 0.
/// Dense two-phase simplex, Bland's rule throughout (deterministic,
/// cycle-free); intended for the tiny problems here (<= ~40 columns).
LpResult solve_lp(const Matd& A, const std::vector<double>& b,
                  const std::vector<double>& c);

struct GameResult {
    double value = 0.0;
    std::vector<double> weights;  // minimizing mixed strategy over rows
};

/// Value of min over the row simplex of max over columns of (eta^T M).
GameResult matrix_game(const Matd& M);

/// max over the row simplex of min over columns of (alpha^T M).
GameResult matrix_game_maximin(const Matd& M);

}  // namespace refldiff
