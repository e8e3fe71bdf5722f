#include "refldiff/stats.hpp"

#include <algorithm>
#include <cmath>

#include "refldiff/errors.hpp"

namespace refldiff {

Summary summarize(const std::vector<double>& xs) {
    Summary s;
    s.n = xs.size();
    if (s.n == 0) return s;
    s.mean = pairwise_sum(xs) / static_cast<double>(s.n);
    if (s.n < 2) return s;
    std::vector<double> dev(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        double d = xs[i] - s.mean;
        dev[i] = d * d;
    }
    double var = pairwise_sum(dev) / static_cast<double>(s.n - 1);
    s.stddev = std::sqrt(var);
    s.stderr_mean = s.stddev / std::sqrt(static_cast<double>(s.n));
    return s;
}

namespace {

double ks_q(double lambda) {
    // Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2)
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12 * std::abs(sum)) break;
        sign = -sign;
    }
    double q = 2.0 * sum;
    return std::min(1.0, std::max(0.0, q));
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw Error("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult r;
    r.statistic = d;
    r.n1 = a.size();
    r.n2 = b.size();
    double ne = na * nb / (na + nb);
    double sq = std::sqrt(ne);
    r.p_value = ks_q((sq + 0.12 + 0.11 / sq) * d);
    return r;
}

}  // namespace refldiff
