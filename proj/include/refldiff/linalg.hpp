#pragma once

#include <vector>

#include "refldiff/common.hpp"

namespace refldiff {

/// Least squares min |A x - b| via Householder QR with column pivoting.
/// Rank-deficient columns are dropped (coefficients set to 0).
std::vector<double> lstsq(const Matd& A, const std::vector<double>& b,
                          double rank_tol = 1e-12);

struct Svd {
    Matd u;                   // m x r
    std::vector<double> sig;  // r singular values, descending
    Matd v;                   // n x r
};

/// One-sided Jacobi SVD; fine for the <=16x16 blocks used here.
Svd svd(const Matd& A, int max_sweeps = 60);

/// Moore-Penrose pseudo-inverse (n x m for an m x n input).
Matd pinv(const Matd& A, double rel_tol = 1e-12);

struct NnlsResult {
    std::vector<double> x;
    double residual = 0.0;  // |A x - b|
    int iterations = 0;
};

/// Lawson-Hanson nonnegative least squares: min |A x - b|, x >= 0.
/// Deterministic: gradient ties resolve to the lowest index.
NnlsResult nnls(const Matd& A, const std::vector<double>& b, int max_iter = 0);

}  // namespace refldiff
