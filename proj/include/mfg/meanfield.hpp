#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mfg/acoe.hpp"
#include "mfg/model.hpp"
#include "mfg/rng.hpp"

namespace mfg {

// nu(x,a) = mu(x)*pi(a|x) on state-action pairs.
struct OccupationMeasure {
    Mat nu;

    static OccupationMeasure of(const ProbVector& mu, const Policy& pi) {
        OccupationMeasure out;
        out.nu.assign(static_cast<std::size_t>(pi.states()),
                      Vec(static_cast<std::size_t>(pi.actions()), 0.0));
        for (int x = 0; x < pi.states(); ++x)
            for (int a = 0; a < pi.actions(); ++a) out.nu[x][a] = mu[x] * pi(x, a);
        return out;
    }
    Vec marginal() const {
        Vec mu(nu.size(), 0.0);
        for (std::size_t x = 0; x < nu.size(); ++x)
            for (double v : nu[x]) mu[x] += v;
        return mu;
    }
};

// The three residuals that make (pi, mu) an equilibrium when all vanish:
//   consistency_residual  ||mu - Lambda(pi)||_1          (mu is stationary)
//   optimality_gap        J_mu(pi) - rho_mu              (pi is a best response)
//   b_mass_defect         occupation mass off the argmin set of the ACOE
struct EquilibriumCertificate {
    double consistency_residual = 0.0;
    double optimality_gap = 0.0;
    double b_mass_defect = 0.0;
    double tolerance = 0.0;

    double worst() const {
        return std::max(consistency_residual, std::max(optimality_gap, b_mass_defect));
    }
    bool pass() const { return worst() <= tolerance; }
};

struct MfeTraceRow {
    int iter = 0;
    double consistency = 0.0;
    double gap = 0.0;
    double b_mass = 0.0;
    double theta = 0.0;
};

struct MeanFieldEquilibrium {
    Policy pi_star;
    ProbVector mu_star;
    EquilibriumCertificate certificate;
    int iterations = 0;
    bool converged = false;
    std::vector<MfeTraceRow> trace;
};

// P[x][y] = sum_a p(y|x,a,mu)*pi(a|x). Rows inherit the minorization bound:
// convex mixtures of rows >= lambda stay >= lambda.
inline Mat policy_kernel(const MFGModel& model, const Policy& pi, const ProbVector& mu) {
    return detail::policy_matrix(detail::freeze(model, mu.data()), pi);
}

// Unique invariant law of a minorized row-stochastic matrix, by power
// iteration from the uniform start (or a caller-supplied one).
inline ProbVector invariant_of_matrix(const Mat& P, double tol = defaults::solver_tol,
                                      int max_iter = 100000, const Vec* start = nullptr) {
    detail::PowerResult pr = detail::power_invariant(P, tol, max_iter, start);
    return ProbVector(std::move(pr.mu), "invariant measure");
}

// Lambda(pi): the stationary population law consistent with everyone playing
// pi. Tensor kernels need one invariant solve; population-coupled kernels get
// Picard iteration on mu -> invariant(P_pi(mu)).
inline ProbVector lambda_map(const MFGModel& model, const Policy& pi,
                             double tol = defaults::solver_tol,
                             int max_iter = defaults::lambda_map_max_iter,
                             const ProbVector* start = nullptr) {
    if (!model.population_coupled())
        return invariant_of_matrix(policy_kernel(model, pi, ProbVector::uniform(model.n())), tol);

    const double inner_tol = tol / 10.0;
    ProbVector mu = start != nullptr ? *start : ProbVector::uniform(model.n());
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        ProbVector next = invariant_of_matrix(policy_kernel(model, pi, mu), inner_tol);
        const double res = detail::l1_dist(mu.data(), next.data());
        if (res <= tol) return mu;  // mu itself passed the self-consistency test
        best = std::min(best, res);
        mu = std::move(next);
    }
    throw NonConvergenceError("lambda_map: Picard iteration did not reach tol", best, max_iter);
}

namespace detail {

// Certificate with the expensive pieces precomputed, so the equilibrium loop
// and the public entry point produce identical numbers.
inline EquilibriumCertificate certify_with(const MFGModel& model, const Policy& pi,
                                           const ProbVector& mu, double tol,
                                           const AcoeSolution& sol, const ProbVector& lambda_pi,
                                           double j_pi) {
    EquilibriumCertificate cert;
    cert.tolerance = tol;
    cert.consistency_residual = l1_dist(mu.data(), lambda_pi.data());
    cert.optimality_gap = std::max(0.0, j_pi - sol.rho);

    // Occupation mass on state-action pairs whose ACOE bracket exceeds the
    // row minimum. The threshold cannot be tighter than the solver residual.
    const double threshold = std::max(tol, 10.0 * defaults::solver_tol);
    const Frozen fz = freeze(model, mu.data());
    Vec tmu(static_cast<std::size_t>(fz.n));
    bellman_into(fz, sol.h, tmu, nullptr);
    double defect = 0.0;
    for (int x = 0; x < fz.n; ++x) {
        for (int a = 0; a < fz.m; ++a) {
            double bracket = fz.cost[x][a];
            const Vec& hat = fz.hat[x][a];
            for (int y = 0; y < fz.n; ++y) bracket += sol.h[y] * hat[y];
            if (bracket > tmu[x] + threshold) defect += mu[x] * pi(x, a);
        }
    }
    cert.b_mass_defect = defect;
    return cert;
}

}  // namespace detail

// Checks Definition-1 membership of (pi, mu) through the C/B residuals.
inline EquilibriumCertificate certify_equilibrium(const MFGModel& model, const Policy& pi,
                                                  const ProbVector& mu,
                                                  double tol = defaults::certificate_tol) {
    const AcoeSolution sol = solve_acoe(model, mu);
    const ProbVector lam_pi = lambda_map(model, pi);
    const double j_pi = evaluate_policy_average_cost(model, pi, mu);
    return detail::certify_with(model, pi, mu, tol, sol, lam_pi, j_pi);
}

// Damped fixed-point search on the population measure:
//   pi_k = greedy best response to mu_k, mu_{k+1} = (1-theta)mu_k + theta*Lambda(pi_k).
// Existence is guaranteed, convergence of this loop is not; the caller gets
// the best certificate seen plus the full trace either way.
inline MeanFieldEquilibrium mfe_iterate(const MFGModel& model, const ProbVector& mu_init,
                                        double theta = defaults::theta,
                                        double tol = defaults::certificate_tol,
                                        int max_iter = defaults::mfe_max_iter) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ModelError("mfe_iterate: theta must lie in (0,1]");
    if (mu_init.size() != model.n()) throw ModelError("mfe_iterate: mu_init has wrong length");

    MeanFieldEquilibrium best;
    double best_worst = std::numeric_limits<double>::infinity();
    double prev_worst = std::numeric_limits<double>::infinity();
    int strikes = 0;

    ProbVector mu = mu_init;
    for (int k = 0; k < max_iter; ++k) {
        const AcoeSolution sol = solve_acoe(model, mu);
        const ProbVector lam_pi = lambda_map(model, sol.policy);
        const double j_pi = evaluate_policy_average_cost(model, sol.policy, mu);
        const EquilibriumCertificate cert =
            detail::certify_with(model, sol.policy, mu, tol, sol, lam_pi, j_pi);

        best.trace.push_back({k, cert.consistency_residual, cert.optimality_gap,
                              cert.b_mass_defect, theta});
        const double worst = cert.worst();
        if (worst < best_worst) {
            best_worst = worst;
            best.pi_star = sol.policy;
            best.mu_star = mu;
            best.certificate = cert;
        }
        best.iterations = k + 1;
        if (cert.pass()) {
            best.pi_star = sol.policy;
            best.mu_star = mu;
            best.certificate = cert;
            best.converged = true;
            return best;
        }

        // Damping control: three consecutive regressions halve theta.
        if (worst > prev_worst) {
            if (++strikes >= 3) {
                theta = std::max(theta / 2.0, 1.0 / 64.0);
                strikes = 0;
            }
        } else {
            strikes = 0;
        }
        prev_worst = worst;

        Vec blended(static_cast<std::size_t>(model.n()));
        for (int x = 0; x < model.n(); ++x)
            blended[x] = (1.0 - theta) * mu[x] + theta * lam_pi[x];
        mu = ProbVector(std::move(blended), "mfe iterate");
    }
    best.converged = false;
    return best;
}

// Exhaustive deterministic-policy oracle: every pi with mu = Lambda(pi) whose
// certificate passes. Policy count m^n is capped to keep this a desk-scale tool.
inline std::vector<MeanFieldEquilibrium> brute_force_mfe(const MFGModel& model,
                                                         double tol = defaults::certificate_tol) {
    const int n = model.n();
    const int m = model.m();
    double count = 1.0;
    for (int x = 0; x < n; ++x) {
        count *= m;
        if (count > 4096.0)
            throw TooLargeError("brute_force_mfe: m^n exceeds the 4096 policy bound");
    }

    std::vector<MeanFieldEquilibrium> found;
    std::vector<int> actions(static_cast<std::size_t>(n), 0);
    while (true) {
        const Policy pi = Policy::deterministic(n, m, actions);
        const ProbVector mu_pi = lambda_map(model, pi);
        const EquilibriumCertificate cert = certify_equilibrium(model, pi, mu_pi, tol);
        if (cert.pass()) {
            MeanFieldEquilibrium eq;
            eq.pi_star = pi;
            eq.mu_star = mu_pi;
            eq.certificate = cert;
            eq.converged = true;
            found.push_back(std::move(eq));
        }
        int x = 0;
        while (x < n && ++actions[x] == m) actions[x++] = 0;
        if (x == n) break;
    }
    return found;
}

// Multi-start driver used by the CLI: uniform, lambda/mass and two seeded
// random starts, deduplicated (TV > 1e-4 counts as distinct) and sorted by
// certificate quality then lexicographic mu. `best` always carries the best
// attempt so non-convergence can be reported with its trace.
struct MfeSearch {
    std::vector<MeanFieldEquilibrium> certified;
    MeanFieldEquilibrium best;
};

inline MfeSearch solve_mfe_multistart(const MFGModel& model,
                                      double tol = defaults::certificate_tol,
                                      double theta = defaults::theta,
                                      int max_iter = defaults::mfe_max_iter,
                                      std::uint64_t seed = defaults::seed, int random_starts = 2) {
    const int n = model.n();
    std::vector<ProbVector> starts;
    starts.push_back(ProbVector::uniform(n));
    {
        Vec lam = model.lambda().lambda;
        for (double& v : lam) v /= model.lambda().mass;
        starts.emplace_back(std::move(lam), "lambda start");
    }
    const rng::Key root = rng::Key::root(seed);
    for (int s = 0; s < random_starts; ++s) {
        const rng::Key key = root.child(static_cast<std::uint64_t>(s));
        Vec v(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (int x = 0; x < n; ++x) {
            v[x] = -std::log(1.0 - key.u01(static_cast<std::uint64_t>(x)));
            sum += v[x];
        }
        for (double& e : v) e /= sum;
        starts.emplace_back(std::move(v), "random start");
    }

    MfeSearch out;
    double best_worst = std::numeric_limits<double>::infinity();
    std::vector<MeanFieldEquilibrium> converged;
    for (const ProbVector& mu0 : starts) {
        MeanFieldEquilibrium eq = mfe_iterate(model, mu0, theta, tol, max_iter);
        const double worst = eq.certificate.worst();
        if (worst < best_worst) {
            best_worst = worst;
            out.best = eq;
        }
        if (eq.converged) converged.push_back(std::move(eq));
    }

    std::sort(converged.begin(), converged.end(),
              [](const MeanFieldEquilibrium& a, const MeanFieldEquilibrium& b) {
                  const double wa = a.certificate.worst();
                  const double wb = b.certificate.worst();
                  if (wa != wb) return wa < wb;
                  return std::lexicographical_compare(a.mu_star.data().begin(),
                                                      a.mu_star.data().end(),
                                                      b.mu_star.data().begin(),
                                                      b.mu_star.data().end());
              });
    for (MeanFieldEquilibrium& eq : converged) {
        bool duplicate = false;
        for (const MeanFieldEquilibrium& kept : out.certified)
            if (detail::l1_dist(eq.mu_star.data(), kept.mu_star.data()) <= 1e-4) {
                duplicate = true;
                break;
            }
        if (!duplicate) out.certified.push_back(std::move(eq));
    }
    return out;
}

}  // namespace mfg
