#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

#include "mfg/meanfield.hpp"
#include "mfg/model.hpp"
#include "mfg/rng.hpp"

namespace mfg {

// TotalVariation is the working default: on finite spaces it generates the
// weak topology and gives an exact modulus for affine costs. PaperWeighted is
// the indicator family f_m with weights 2^-m, kept for fidelity experiments.
enum class RhoMetric { TotalVariation, PaperWeighted };

inline const char* rho_metric_name(RhoMetric metric) {
    return metric == RhoMetric::TotalVariation ? "tv" : "paper";
}

inline double rho_distance(const Vec& mu, const Vec& nu, RhoMetric metric) {
    if (mu.size() != nu.size()) throw ModelError("rho_distance: dimension mismatch");
    if (metric == RhoMetric::TotalVariation) return detail::l1_dist(mu, nu);
    double d = 0.0;
    double weight = 1.0;
    for (std::size_t m = 0; m < mu.size(); ++m) {
        d += weight * std::abs(mu[m] - nu[m]);
        weight *= 0.5;
    }
    return d;
}

inline double rho_distance(const ProbVector& mu, const ProbVector& nu, RhoMetric metric) {
    return rho_distance(mu.data(), nu.data(), metric);
}

// Modulus of continuity of the cost in its measure argument. Either the exact
// envelope min(lipschitz*t, osc) or a sampled piecewise-linear table.
struct OmegaC {
    bool exact = true;
    double lipschitz = 0.0;
    double osc = 0.0;                             // global oscillation of c over the simplex
    std::vector<std::pair<double, double>> table;  // (t, sup estimate) knots, nondecreasing
};

// Exact envelope for affine costs. Under total variation the slope is
// max_{x,a} osc_z(r[x][a][.])/2 and the envelope equals the true supremum;
// under the weighted metric moving mass z <-> z' costs 2^-z + 2^-z', so the
// pairwise ratio is the sharp slope for small t and an upper bound beyond.
inline OmegaC omega_exact_lipschitz(const MFGModel& model,
                                    RhoMetric metric = RhoMetric::TotalVariation) {
    OmegaC omega;
    omega.exact = true;
    const Cube& r = model.cost().r;
    if (r.empty()) return omega;
    for (int x = 0; x < model.n(); ++x) {
        for (int a = 0; a < model.m(); ++a) {
            const Vec& row = r[x][a];
            const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
            omega.osc = std::max(omega.osc, *hi - *lo);
            if (metric == RhoMetric::PaperWeighted) {
                for (int z = 0; z < model.n(); ++z)
                    for (int zp = z + 1; zp < model.n(); ++zp) {
                        const double move = std::pow(0.5, z) + std::pow(0.5, zp);
                        omega.lipschitz =
                            std::max(omega.lipschitz, std::abs(row[z] - row[zp]) / move);
                    }
            }
        }
    }
    if (metric == RhoMetric::TotalVariation) omega.lipschitz = omega.osc / 2.0;
    return omega;
}

// Sampling fallback for costs whose modulus has no closed form. Per radius
// bucket the MAX sampled oscillation is kept (a mean would silently
// underestimate a supremum); the running maximum makes the table monotone.
inline OmegaC omega_sampled_table(const MFGModel& model,
                                  RhoMetric metric = RhoMetric::TotalVariation,
                                  int buckets = 64, int pairs_per_bucket = 10000,
                                  std::uint64_t seed = defaults::seed) {
    const int n = model.n();
    const double diam = metric == RhoMetric::TotalVariation ? 2.0 : (n > 1 ? 1.5 : 1.0);
    OmegaC omega = omega_exact_lipschitz(model, metric);
    omega.exact = false;
    omega.table.assign(static_cast<std::size_t>(buckets), {0.0, 0.0});
    for (int b = 0; b < buckets; ++b)
        omega.table[b].first = diam * static_cast<double>(b + 1) / buckets;

    const rng::Key root = rng::Key::root(seed);
    const std::int64_t total = static_cast<std::int64_t>(buckets) * pairs_per_bucket;
    Vec mu(static_cast<std::size_t>(n)), nu(static_cast<std::size_t>(n));
    for (std::int64_t rep = 0; rep < total; ++rep) {
        const rng::Key key = root.child(static_cast<std::uint64_t>(rep));
        std::uint64_t c = 0;
        auto dirichlet = [&](Vec& out) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                out[i] = -std::log(1.0 - key.u01(c++));
                sum += out[i];
            }
            for (double& v : out) v /= sum;
        };
        switch (rep % 3) {
            case 0: {  // independent interior pair
                dirichlet(mu);
                dirichlet(nu);
                break;
            }
            case 1: {  // vertex pair: realizes the diameter
                const int z = static_cast<int>(key.u01(c++) * n);
                const int zp = static_cast<int>(key.u01(c++) * n);
                std::fill(mu.begin(), mu.end(), 0.0);
                std::fill(nu.begin(), nu.end(), 0.0);
                mu[std::min(z, n - 1)] = 1.0;
                nu[std::min(zp, n - 1)] = 1.0;
                break;
            }
            default: {  // short-radius pair: nu pulled toward mu
                dirichlet(mu);
                dirichlet(nu);
                const double s = key.u01(c++);
                for (int i = 0; i < n; ++i) nu[i] = (1.0 - s) * mu[i] + s * nu[i];
                break;
            }
        }
        const double t = rho_distance(mu, nu, metric);
        double diff = 0.0;
        for (int x = 0; x < n; ++x)
            for (int a = 0; a < model.m(); ++a)
                diff = std::max(diff, std::abs(detail::cost_at(model, x, a, mu) -
                                               detail::cost_at(model, x, a, nu)));
        int b = static_cast<int>(t / diam * buckets);
        b = std::min(std::max(b, 0), buckets - 1);
        omega.table[b].second = std::max(omega.table[b].second, diff);
    }
    for (int b = 1; b < buckets; ++b)
        omega.table[b].second = std::max(omega.table[b].second, omega.table[b - 1].second);
    return omega;
}

inline double omega_c_eval(const MFGModel& model, double t, const OmegaC& omega) {
    (void)model;
    if (t < 0.0) throw ModelError("omega_c_eval: negative radius");
    if (t == 0.0) return 0.0;
    if (omega.exact) return std::min(omega.lipschitz * t, omega.osc);
    if (omega.table.empty()) return 0.0;
    double t_prev = 0.0, v_prev = 0.0;
    for (const auto& [tk, vk] : omega.table) {
        if (t <= tk) return v_prev + (vk - v_prev) * (t - t_prev) / (tk - t_prev);
        t_prev = tk;
        v_prev = vk;
    }
    return omega.table.back().second;
}

namespace detail {

template <class F>
inline void parallel_for(std::int64_t total, int threads, F&& fn) {
    if (threads <= 1 || total < 2) {
        if (total > 0) fn(static_cast<std::int64_t>(0), total);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, total));
    const std::int64_t chunk = (total + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int j = 0; j < workers; ++j) {
        const std::int64_t lo = j * chunk;
        const std::int64_t hi = std::min(total, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (std::thread& th : pool) th.join();
}

struct MeanStderr {
    double mean = 0.0;
    double se = 0.0;
};

// Welford over a fixed index order; the summary is independent of how the
// values vector was filled, so thread count cannot change the result.
inline MeanStderr reduce_mean_stderr(const Vec& vals) {
    MeanStderr out;
    double m2 = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double d = vals[i] - out.mean;
        out.mean += d / static_cast<double>(i + 1);
        m2 += d * (vals[i] - out.mean);
    }
    if (vals.size() > 1) {
        const double var = m2 / static_cast<double>(vals.size() - 1);
        out.se = std::sqrt(var / static_cast<double>(vals.size()));
    }
    return out;
}

}  // namespace detail

// The epsilon(N) upper bound split into its pieces. The deterministic second
// term is evaluated twice: a conservative form (argument 4/N) kept as the
// headline, and the tight one-swap empirical distance (2/N).
struct EpsilonBound {
    double first_term = 0.0;  // E omega_c(rho(mu*, empirical of N-1 iid draws))
    double mc_stderr = 0.0;
    double second_paper = 0.0;  // omega_c(2*(1-(N-1)/N+1/N))
    double second_tight = 0.0;  // omega_c(2/N)

    double eps_paper() const { return first_term + second_paper; }
    double eps_tight() const { return first_term + second_tight; }
};

inline EpsilonBound epsilon_bound(const MFGModel& model, const ProbVector& mu_star, int N,
                                  const OmegaC& omega,
                                  RhoMetric metric = RhoMetric::TotalVariation,
                                  int samples = defaults::samples,
                                  std::uint64_t seed = defaults::seed, int threads = 1) {
    if (N < 2) throw ModelError("epsilon_bound: N must be >= 2");
    if (samples < 100) throw ModelError("epsilon_bound: need at least 100 samples");
    const int n = model.n();
    if (mu_star.size() != n) throw ModelError("epsilon_bound: mu_star has wrong length");

    // Draw streams are keyed by (seed, N, replication), so per-N results do
    // not depend on which other N values a caller sweeps.
    const rng::Key base = rng::Key::root(seed).child(static_cast<std::uint64_t>(N));
    Vec vals(static_cast<std::size_t>(samples));
    const Vec& target = mu_star.data();
    detail::parallel_for(samples, threads, [&](std::int64_t lo, std::int64_t hi) {
        Vec emp(static_cast<std::size_t>(n));
        for (std::int64_t rep = lo; rep < hi; ++rep) {
            const rng::Key key = base.child(static_cast<std::uint64_t>(rep));
            std::fill(emp.begin(), emp.end(), 0.0);
            for (int j = 0; j < N - 1; ++j)
                emp[rng::sample_index(target, key.u01(static_cast<std::uint64_t>(j)))] += 1.0;
            for (double& v : emp) v /= static_cast<double>(N - 1);
            const double t = rho_distance(target, emp, metric);
            vals[static_cast<std::size_t>(rep)] = omega_c_eval(model, t, omega);
        }
    });
    const detail::MeanStderr ms = detail::reduce_mean_stderr(vals);

    EpsilonBound out;
    out.first_term = ms.mean;
    out.mc_stderr = ms.se;
    const double nd = static_cast<double>(N);
    out.second_paper = omega_c_eval(model, 2.0 * (1.0 - (nd - 1.0) / nd + 1.0 / nd), omega);
    out.second_tight = omega_c_eval(model, 2.0 / nd, omega);
    return out;
}

// One deviator against N-1 opponents frozen at mu*: because the kernel is
// population-independent, the opponents' stationary states are iid mu* and
// the deviator faces a plain average-cost MDP with cost
//   cbar[x][a] = E c(x, a, (delta_x + sum_{i>=2} delta_{X_i})/N),  X_i iid mu*.
// Affine costs make the expectation exact.
inline Mat effective_cost(const MFGModel& model, const ProbVector& mu_star, int N) {
    if (model.population_coupled())
        throw UnsupportedModelError(
            "effective_cost requires a population-independent transition kernel; this model's "
            "kernel is population-coupled");
    if (N < 1) throw ModelError("effective_cost: N must be >= 1");
    if (mu_star.size() != model.n()) throw ModelError("effective_cost: mu_star has wrong length");
    const double nd = static_cast<double>(N);
    Mat cbar(static_cast<std::size_t>(model.n()), Vec(static_cast<std::size_t>(model.m())));
    const Cube& r = model.cost().r;
    for (int x = 0; x < model.n(); ++x) {
        for (int a = 0; a < model.m(); ++a) {
            double v = model.cost().c0[x][a];
            if (!r.empty()) {
                v += r[x][a][x] / nd;
                double mix = 0.0;
                for (int z = 0; z < model.n(); ++z) mix += r[x][a][z] * mu_star[z];
                v += (nd - 1.0) / nd * mix;
            }
            cbar[x][a] = v;
        }
    }
    return cbar;
}

// Exact best-response gap of the symmetric profile (pi*,...,pi*) at
// population size N: stationary cost of pi* under cbar minus the optimal
// average cost of the cbar MDP. Nonnegative by construction; negative float
// dust is clamped.
inline double best_response_gap(const MFGModel& model, const Policy& pi_star,
                                const ProbVector& mu_star, int N,
                                double tol = defaults::solver_tol) {
    const Mat cbar = effective_cost(model, mu_star, N);
    const ProbVector stationary = lambda_map(model, pi_star, tol);
    if (detail::l1_dist(mu_star.data(), stationary.data()) > 10.0 * tol)
        throw InconsistentInputError(
            "best_response_gap: mu_star is not the stationary law of pi_star");

    detail::Frozen fz = detail::freeze(model, mu_star.data());
    fz.cost = cbar;
    const detail::FrozenSolve fs = detail::solve_frozen(fz, tol, 0);

    double j_eq = 0.0;
    for (int x = 0; x < model.n(); ++x)
        for (int a = 0; a < model.m(); ++a) j_eq += cbar[x][a] * pi_star(x, a) * mu_star[x];
    return std::max(0.0, j_eq - fs.rho);
}

inline bool check_eps_nash(double gap, double eps, double mc_stderr) {
    return gap <= eps + 3.0 * mc_stderr;
}

struct EpsNashReport {
    int N = 0;
    double eps_bound = 0.0;  // conservative headline bound
    double eps_tight = 0.0;
    double mc_stderr = 0.0;
    double gap_exact = 0.0;
    bool verdict = false;
    std::uint64_t seed = 0;
};

inline std::vector<EpsNashReport> eps_nash_table(const MFGModel& model, const Policy& pi_star,
                                                 const ProbVector& mu_star,
                                                 const std::vector<int>& Ns,
                                                 RhoMetric metric = RhoMetric::TotalVariation,
                                                 int samples = defaults::samples,
                                                 std::uint64_t seed = defaults::seed,
                                                 double tol = defaults::solver_tol,
                                                 int threads = 1) {
    const OmegaC omega = omega_exact_lipschitz(model, metric);
    std::vector<EpsNashReport> rows;
    rows.reserve(Ns.size());
    for (int N : Ns) {
        const EpsilonBound eb = epsilon_bound(model, mu_star, N, omega, metric, samples, seed, threads);
        EpsNashReport row;
        row.N = N;
        row.eps_bound = eb.eps_paper();
        row.eps_tight = eb.eps_tight();
        row.mc_stderr = eb.mc_stderr;
        row.gap_exact = best_response_gap(model, pi_star, mu_star, N, tol);
        row.verdict = check_eps_nash(row.gap_exact, row.eps_bound, row.mc_stderr);
        row.seed = seed;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mfg
