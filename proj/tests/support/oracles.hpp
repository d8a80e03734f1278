#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/nash.hpp"
#include "mfg/rng.hpp"

// Independent reference computations for the tests. Nothing here shares an
// algorithm with the library: invariant measures come from a dense linear
// solve, optima from policy enumeration, expectations from closed forms.
namespace oracles {

using mfg::Mat;
using mfg::MFGModel;
using mfg::ProbVector;
using mfg::Vec;

// Invariant measure of a row-stochastic P by Gaussian elimination with
// partial pivoting on (P^T - I) with the last equation replaced by sum = 1.
inline Vec gauss_invariant(const Mat& P) {
    const int n = static_cast<int>(P.size());
    Mat A(n, Vec(n + 1, 0.0));
    for (int y = 0; y + 1 < n; ++y) {
        for (int x = 0; x < n; ++x) A[y][x] = P[x][y] - (x == y ? 1.0 : 0.0);
        A[y][n] = 0.0;
    }
    for (int x = 0; x < n; ++x) A[n - 1][x] = 1.0;
    A[n - 1][n] = 1.0;

    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(A[row][col]) > std::abs(A[piv][col])) piv = row;
        if (std::abs(A[piv][col]) < 1e-14) throw std::runtime_error("singular invariant system");
        std::swap(A[piv], A[col]);
        for (int row = col + 1; row < n; ++row) {
            const double f = A[row][col] / A[col][col];
            if (f == 0.0) continue;
            for (int k = col; k <= n; ++k) A[row][k] -= f * A[col][k];
        }
    }
    Vec mu(n);
    for (int row = n - 1; row >= 0; --row) {
        double s = A[row][n];
        for (int k = row + 1; k < n; ++k) s -= A[row][k] * mu[k];
        mu[row] = s / A[row][row];
    }
    return mu;
}

// Average cost of the deterministic policy x -> actions[x] with the coupling
// measure frozen at mu, evaluated exactly through its invariant law.
inline double exact_policy_value(const MFGModel& model, const std::vector<int>& actions,
                                 const ProbVector& mu) {
    const int n = model.n();
    Mat P(n);
    for (int x = 0; x < n; ++x) P[x] = mfg::eval_kernel(model, x, actions[x], mu).data();
    const Vec inv = gauss_invariant(P);
    double J = 0.0;
    for (int x = 0; x < n; ++x) J += inv[x] * mfg::eval_cost(model, x, actions[x], mu);
    return J;
}

struct PolicySweep {
    double min_value = 0.0;
    std::vector<int> argmin;
    std::vector<double> values;  // one per enumerated policy
};

// Exhaustive deterministic-policy minimum at frozen mu.
inline PolicySweep enumerate_policy_values(const MFGModel& model, const ProbVector& mu) {
    const int n = model.n();
    const int m = model.m();
    double count = 1.0;
    for (int x = 0; x < n; ++x) {
        count *= m;
        if (count > 20000.0) throw std::runtime_error("policy enumeration too large");
    }
    PolicySweep sweep;
    sweep.min_value = std::numeric_limits<double>::infinity();
    std::vector<int> actions(n, 0);
    while (true) {
        const double v = exact_policy_value(model, actions, mu);
        sweep.values.push_back(v);
        if (v < sweep.min_value) {
            sweep.min_value = v;
            sweep.argmin = actions;
        }
        int x = 0;
        while (x < n && ++actions[x] == m) actions[x++] = 0;
        if (x == n) break;
    }
    return sweep;
}

// E |X/K - p| for X ~ Binomial(K, p), by direct pmf summation.
inline double binomial_mean_abs_dev(int K, double p) {
    double pmf = std::pow(1.0 - p, K);
    double acc = pmf * p;  // k = 0 term: |0 - p| = p
    for (int k = 0; k < K; ++k) {
        pmf *= static_cast<double>(K - k) / static_cast<double>(k + 1) * p / (1.0 - p);
        acc += pmf * std::abs(static_cast<double>(k + 1) / K - p);
    }
    return acc;
}

// Exhaustive sup of |c(x,a,mu) - c(x,a,nu)| over a simplex grid (n = 2 only),
// restricted to pairs at rho-distance <= t.
inline double omega_grid_sup(const MFGModel& model, double t, mfg::RhoMetric metric,
                             int grid = 100) {
    if (model.n() != 2) throw std::runtime_error("grid modulus oracle handles n = 2 only");
    double sup = 0.0;
    for (int i = 0; i <= grid; ++i) {
        const Vec mu = {static_cast<double>(i) / grid, 1.0 - static_cast<double>(i) / grid};
        for (int j = 0; j <= grid; ++j) {
            const Vec nu = {static_cast<double>(j) / grid, 1.0 - static_cast<double>(j) / grid};
            if (mfg::rho_distance(mu, nu, metric) > t + 1e-12) continue;
            for (int x = 0; x < 2; ++x)
                for (int a = 0; a < model.m(); ++a)
                    sup = std::max(sup, std::abs(mfg::detail::cost_at(model, x, a, mu) -
                                                 mfg::detail::cost_at(model, x, a, nu)));
        }
    }
    return sup;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(Vec a, Vec b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

struct McTable {
    Mat mean;
    Mat se;
};

// Monte Carlo estimate of the deviator's expected one-stage cost
// E c(x, a, (delta_x + sum of N-1 iid mu* draws)/N), shared draws across all
// (x,a) cells. Cross-checks the closed-form effective cost.
inline McTable mc_effective_cost(const MFGModel& model, const ProbVector& mu_star, int N,
                                 int draws, std::uint64_t seed) {
    const int n = model.n();
    const int m = model.m();
    McTable out;
    out.mean.assign(n, Vec(m, 0.0));
    out.se.assign(n, Vec(m, 0.0));
    Mat m2(n, Vec(m, 0.0));
    const mfg::rng::Key root = mfg::rng::Key::root(seed).child(static_cast<std::uint64_t>(N));
    Vec counts(n);
    Vec emp(n);
    for (int rep = 0; rep < draws; ++rep) {
        const mfg::rng::Key key = root.child(static_cast<std::uint64_t>(rep));
        std::fill(counts.begin(), counts.end(), 0.0);
        for (int j = 0; j < N - 1; ++j)
            counts[mfg::rng::sample_index(mu_star.data(), key.u01(static_cast<std::uint64_t>(j)))] +=
                1.0;
        for (int x = 0; x < n; ++x) {
            for (int y = 0; y < n; ++y) emp[y] = (counts[y] + (y == x ? 1.0 : 0.0)) / N;
            for (int a = 0; a < m; ++a) {
                const double c = mfg::detail::cost_at(model, x, a, emp);
                const double d = c - out.mean[x][a];
                out.mean[x][a] += d / static_cast<double>(rep + 1);
                m2[x][a] += d * (c - out.mean[x][a]);
            }
        }
    }
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < m; ++a)
            out.se[x][a] = draws > 1 ? std::sqrt(m2[x][a] / (draws - 1) / draws) : 0.0;
    return out;
}

}  // namespace oracles
