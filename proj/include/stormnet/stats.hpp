#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "stormnet/error.hpp"

namespace stormnet {

// Two-pass product-moment correlation. Throws on mismatch or zero variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw error(errc::validation, "pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2)
        throw error(errc::validation, "pearson: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dx = x[k] - mx;
        const double dy = y[k] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw error(errc::validation, "pearson: zero variance");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

// Regularized incomplete beta I_x(a,b) by Lentz continued fraction,
// convergence tolerance 1e-12.
namespace detail {

inline double betacf(double a, double b, double x) {
    constexpr double kFpMin = 1e-300;
    constexpr double kEps = 1e-12;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw error(errc::validation, "incomplete_beta: continued fraction did not converge");
}

} // namespace detail

inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw error(errc::validation, "incomplete_beta: a and b must be positive");
    if (x < 0.0 || x > 1.0)
        throw error(errc::validation, "incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double lnbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double front = std::exp(lnbeta + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a Pearson r at sample size n, via the t statistic with
// n-2 dof: p = I_{nu/(nu+t^2)}(nu/2, 1/2). The argument reduces to 1 - r^2.
inline double pearson_pvalue(double r, std::int64_t n) {
    if (n < 3)
        throw error(errc::validation, "pearson_pvalue: need n >= 3");
    if (std::fabs(r) > 1.0 + 1e-12)
        throw error(errc::validation, "pearson_pvalue: |r| > 1");
    r = std::clamp(r, -1.0, 1.0);
    if (std::fabs(r) == 1.0) return 0.0;
    const double nu = static_cast<double>(n - 2);
    return incomplete_beta(nu / 2.0, 0.5, 1.0 - r * r);
}

// Standard normal upper tail.
inline double normal_sf(double z) { return 0.5 * std::erfc(z / 1.4142135623730951); }

enum class MWMethod { automatic, exact, normal_approx };

struct MWResult {
    double u = 0.0;      // U statistic of the "greater" candidate sample (b)
    double p = 1.0;      // one-sided, alternative: b stochastically greater
    bool exact = false;
    int n1 = 0;
    int n2 = 0;

    const char* method_name() const { return exact ? "exact" : "normal-approx"; }
};

namespace detail {

inline std::vector<double> midranks(std::vector<double> pooled, bool& has_ties) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(n);
    has_ties = false;
    std::size_t k = 0;
    while (k < n) {
        std::size_t k2 = k;
        while (k2 + 1 < n && pooled[order[k2 + 1]] == pooled[order[k]]) ++k2;
        if (k2 > k) has_ties = true;
        const double rank = 0.5 * static_cast<double>(k + k2) + 1.0;
        for (std::size_t m = k; m <= k2; ++m) ranks[order[m]] = rank;
        k = k2 + 1;
    }
    return ranks;
}

// P(U >= u_obs) under the null, by enumerating every n2-subset of ranks 1..n.
// Tie-free data only; exact rational count divided once at the end.
inline double exact_mw_pvalue(int n1, int n2, double u_obs) {
    const int n = n1 + n2;
    std::vector<int> comb(n2);
    std::iota(comb.begin(), comb.end(), 0);
    std::uint64_t total = 0, ge = 0;
    while (true) {
        ++total;
        std::int64_t ranksum = 0;
        for (int v : comb) ranksum += v + 1;
        const double u = static_cast<double>(ranksum) -
                         static_cast<double>(n2) * (n2 + 1) / 2.0;
        if (u >= u_obs) ++ge;
        // next combination in lexicographic order
        int k = n2 - 1;
        while (k >= 0 && comb[k] == n - n2 + k) --k;
        if (k < 0) break;
        ++comb[k];
        for (int m = k + 1; m < n2; ++m) comb[m] = comb[m - 1] + 1;
    }
    return static_cast<double>(ge) / static_cast<double>(total);
}

} // namespace detail

// One-sided Mann-Whitney U, alternative "b stochastically greater than a".
// Exact enumeration when n1+n2 <= 12 and tie-free (or forced); otherwise
// normal approximation with tie-corrected variance and 0.5 continuity
// correction.
inline MWResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                               MWMethod method = MWMethod::automatic) {
    if (a.empty() || b.empty())
        throw error(errc::validation, "mann_whitney_u: empty sample");
    const int n1 = static_cast<int>(a.size());
    const int n2 = static_cast<int>(b.size());
    const int n = n1 + n2;

    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    bool has_ties = false;
    const std::vector<double> ranks = detail::midranks(std::move(pooled), has_ties);

    double rank_sum_b = 0.0;
    for (int k = 0; k < n2; ++k) rank_sum_b += ranks[n1 + k];
    const double u_b = rank_sum_b - static_cast<double>(n2) * (n2 + 1) / 2.0;

    MWResult res;
    res.u = u_b;
    res.n1 = n1;
    res.n2 = n2;

    const bool want_exact = method == MWMethod::exact ||
                            (method == MWMethod::automatic && n <= 12 && !has_ties);
    if (want_exact) {
        if (has_ties)
            throw error(errc::validation, "mann_whitney_u: exact method requires tie-free data");
        res.exact = true;
        res.p = detail::exact_mw_pvalue(n1, n2, u_b);
        return res;
    }

    // tie-corrected variance
    double tie_term = 0.0;
    {
        std::vector<double> sorted(ranks.begin(), ranks.end());
        std::sort(sorted.begin(), sorted.end());
        std::size_t k = 0;
        while (k < sorted.size()) {
            std::size_t k2 = k;
            while (k2 + 1 < sorted.size() && sorted[k2 + 1] == sorted[k]) ++k2;
            const double t = static_cast<double>(k2 - k + 1);
            tie_term += t * t * t - t;
            k = k2 + 1;
        }
    }
    const double mu = static_cast<double>(n1) * n2 / 2.0;
    const double var = static_cast<double>(n1) * n2 / 12.0 *
                       ((n + 1) - tie_term / (static_cast<double>(n) * (n - 1)));
    res.exact = false;
    if (var <= 0.0) {
        res.p = 1.0; // fully degenerate pooled sample carries no evidence
        return res;
    }
    const double z = (u_b - mu - 0.5) / std::sqrt(var);
    res.p = normal_sf(z);
    return res;
}

} // namespace stormnet
