#pragma once

#include <vector>

#include "refldiff/common.hpp"

namespace refldiff {

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_mean = 0.0;
    size_t n = 0;
};

Summary summarize(const std::vector<double>& xs);

struct KsResult {
    double statistic = 0.0;  // sup |F1 - F2|
    double p_value = 1.0;    // asymptotic two-sided
    size_t n1 = 0, n2 = 0;
};

/// Two-sample Kolmogorov-Smirnov test (asymptotic p-value with the small-n
/// correction lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace refldiff
