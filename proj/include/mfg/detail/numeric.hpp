#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfg/errors.hpp"

namespace mfg::detail {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double sup_dist(const Vec& a, const Vec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline double l1_dist(const Vec& a, const Vec& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct PowerResult {
    Vec mu;
    double residual = 0.0;
    int iterations = 0;
};

// Left power iteration mu <- mu P until ||mu P - mu||_1 <= tol. Geometric at
// rate 1 - lambda(X) whenever every row of P dominates a common lambda.
inline PowerResult power_invariant(const Mat& P, double tol, int max_iter, const Vec* start = nullptr) {
    const std::size_t n = P.size();
    Vec mu = start != nullptr ? *start : Vec(n, 1.0 / static_cast<double>(n));
    Vec next(n);
    PowerResult out;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t y = 0; y < n; ++y) next[y] = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            const double mx = mu[x];
            if (mx == 0.0) continue;
            const Vec& row = P[x];
            for (std::size_t y = 0; y < n; ++y) next[y] += mx * row[y];
        }
        const double res = l1_dist(next, mu);
        mu.swap(next);
        out.iterations = it + 1;
        if (res <= tol) {
            out.mu = std::move(mu);
            out.residual = res;
            return out;
        }
        out.residual = res;
    }
    throw MaxIterExceededError(
        "power iteration did not reach tol; contraction modulus is numerically ~1",
        out.residual, out.iterations);
}

}  // namespace mfg::detail
