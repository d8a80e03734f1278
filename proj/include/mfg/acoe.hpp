#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mfg/detail/numeric.hpp"
#include "mfg/model.hpp"

namespace mfg {

// h: X -> R, the relative value function. Bounded by c_max/(1-beta) in sup
// norm at the fixed point.
using ValueFunction = Vec;

// Stochastic kernel on actions given states; rows renormalized like every
// other probability row.
class Policy {
  public:
    Policy() = default;
    explicit Policy(Mat rows) {
        for (std::size_t x = 0; x < rows.size(); ++x)
            rows[x] = detail::normalize_prob_row(std::move(rows[x]),
                                                 "policy row " + std::to_string(x));
        pi_ = std::move(rows);
        if (pi_.empty()) throw ModelError("policy: no states");
    }

    static Policy deterministic(int n, int m, const std::vector<int>& actions) {
        Mat rows(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(m), 0.0));
        for (int x = 0; x < n; ++x) {
            const int a = actions[static_cast<std::size_t>(x)];
            if (a < 0 || a >= m) throw ModelError("policy: action index out of range");
            rows[x][a] = 1.0;
        }
        return Policy(std::move(rows));
    }
    static Policy uniform(int n, int m) {
        return Policy(Mat(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(m), 1.0 / m)));
    }

    int states() const { return static_cast<int>(pi_.size()); }
    int actions() const { return pi_.empty() ? 0 : static_cast<int>(pi_[0].size()); }
    double operator()(int x, int a) const { return pi_[x][a]; }
    const Mat& matrix() const { return pi_; }

    bool is_deterministic() const {
        for (const Vec& row : pi_)
            for (double v : row)
                if (v != 0.0 && v != 1.0) return false;
        return true;
    }
    // Argmax per row; exact for deterministic policies, mode otherwise.
    std::vector<int> action_indices() const {
        std::vector<int> idx(pi_.size());
        for (std::size_t x = 0; x < pi_.size(); ++x) {
            int best = 0;
            for (std::size_t a = 1; a < pi_[x].size(); ++a)
                if (pi_[x][a] > pi_[x][best]) best = static_cast<int>(a);
            idx[x] = best;
        }
        return idx;
    }

  private:
    Mat pi_;
};

struct AcoeSolution {
    ValueFunction h;
    double rho = 0.0;  // = sum_x h[x]*lambda[x], the optimal average cost
    Policy policy;     // deterministic greedy selector at h
    double residual = 0.0;
    int iterations = 0;
    Vec deltas;  // sup-norm steps ||u_{k+1} - u_k||; equals the residual of u_k
};

namespace detail {

// One sweep of the shifted Bellman operator
//   (T u)(x) = min_a [ c(x,a) + sum_y u(y)*hat(y|x,a) ]
// over a frozen model. Ties resolve to the smallest action index: strict <
// never replaces an earlier equal bracket. Every consumer of greedy actions
// goes through this one loop so "argmin attains the min" holds bitwise.
inline void bellman_into(const Frozen& fz, const Vec& u, Vec& out, std::vector<int>* argmin) {
    for (int x = 0; x < fz.n; ++x) {
        double best = std::numeric_limits<double>::infinity();
        int besta = 0;
        for (int a = 0; a < fz.m; ++a) {
            double s = fz.cost[x][a];
            const Vec& hat = fz.hat[x][a];
            for (int y = 0; y < fz.n; ++y) s += u[y] * hat[y];
            if (s < best) {
                best = s;
                besta = a;
            }
        }
        out[x] = best;
        if (argmin != nullptr) (*argmin)[x] = besta;
    }
}

struct FrozenSolve {
    Vec h;
    double rho = 0.0;
    std::vector<int> actions;
    double residual = 0.0;
    int iterations = 0;
    Vec deltas;
};

// A priori value-iteration budget: beta^k * c_max <= tol*(1-beta) within
// k = ceil(log(tol*(1-beta)/c_max)/log(beta)) + 1 steps.
inline int iteration_bound(double beta, double c_max, double tol) {
    if (c_max <= tol || beta <= 0.0) return 1;
    const double k = std::ceil(std::log(tol * (1.0 - beta) / c_max) / std::log(beta)) + 1.0;
    return k < 1.0 ? 1 : static_cast<int>(k);
}

// Value iteration u_{k+1} = T u_k from u_0 = 0 until the step shrinks to tol;
// then ||T u_{k+1} - u_{k+1}|| <= beta*tol already, and one diagnostic sweep
// reports the exact residual plus the greedy actions at the returned h.
inline FrozenSolve solve_frozen(const Frozen& fz, double tol, int max_iter) {
    if (!(tol > 0.0)) throw ModelError("solve_acoe: tol must be positive");
    const double beta = 1.0 - fz.mass;
    double local_cmax = 0.0;
    for (int x = 0; x < fz.n; ++x)
        for (int a = 0; a < fz.m; ++a) local_cmax = std::max(local_cmax, fz.cost[x][a]);
    if (max_iter <= 0) max_iter = iteration_bound(beta, local_cmax, tol) + 10;

    FrozenSolve out;
    Vec u(static_cast<std::size_t>(fz.n), 0.0);
    Vec next(static_cast<std::size_t>(fz.n));
    bool converged = false;
    for (int k = 0; k < max_iter; ++k) {
        bellman_into(fz, u, next, nullptr);
        const double delta = sup_dist(next, u);
        out.deltas.push_back(delta);
        u.swap(next);
        out.iterations = k + 1;
        if (delta <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw MaxIterExceededError(
            "value iteration exhausted its budget; lambda mass is too small for tol",
            out.deltas.empty() ? 0.0 : out.deltas.back(), out.iterations);

    out.actions.assign(static_cast<std::size_t>(fz.n), 0);
    bellman_into(fz, u, next, &out.actions);
    out.residual = sup_dist(next, u);
    out.h = std::move(u);
    out.rho = dot(out.h, fz.lambda);
    return out;
}

// P[x][y] = sum_a pi(a|x) * p(y|x,a,mu) over a frozen model.
inline Mat policy_matrix(const Frozen& fz, const Policy& pi) {
    if (pi.states() != fz.n || pi.actions() != fz.m)
        throw ModelError("policy dimensions do not match model");
    Mat P(static_cast<std::size_t>(fz.n), Vec(static_cast<std::size_t>(fz.n), 0.0));
    for (int x = 0; x < fz.n; ++x) {
        for (int a = 0; a < fz.m; ++a) {
            const double pa = pi(x, a);
            if (pa == 0.0) continue;
            const Vec& row = fz.rows[x][a];
            for (int y = 0; y < fz.n; ++y) P[x][y] += pa * row[y];
        }
    }
    return P;
}

inline int power_budget(double beta, double tol) {
    if (beta <= 0.0) return 16;
    const double k = std::ceil(std::log(std::max(tol, 1e-300) / 2.0) / std::log(beta));
    return static_cast<int>(std::max(16.0, k + 16.0));
}

}  // namespace detail

// (T_mu u)(x) = min_a [ c(x,a,mu) + sum_y u(y)*hat(y|x,a,mu) ].
inline ValueFunction bellman_apply(const MFGModel& model, const ProbVector& mu,
                                   const ValueFunction& u) {
    if (static_cast<int>(u.size()) != model.n())
        throw ModelError("bellman_apply: value function has wrong length");
    const detail::Frozen fz = detail::freeze(model, mu.data());
    Vec out(u.size());
    detail::bellman_into(fz, u, out, nullptr);
    return out;
}

// Fixed point of T_mu by contraction iteration from u_0 = 0.
inline AcoeSolution solve_acoe(const MFGModel& model, const ProbVector& mu,
                               double tol = defaults::solver_tol, int max_iter = 0) {
    const detail::Frozen fz = detail::freeze(model, mu.data());
    detail::FrozenSolve fs = detail::solve_frozen(fz, tol, max_iter);
    AcoeSolution sol;
    sol.h = std::move(fs.h);
    sol.rho = fs.rho;
    sol.policy = Policy::deterministic(model.n(), model.m(), fs.actions);
    sol.residual = fs.residual;
    sol.iterations = fs.iterations;
    sol.deltas = std::move(fs.deltas);
    return sol;
}

// Deterministic argmin selector at h; ties to the smallest action index.
inline Policy greedy_policy(const MFGModel& model, const ProbVector& mu, const ValueFunction& h) {
    if (static_cast<int>(h.size()) != model.n())
        throw ModelError("greedy_policy: value function has wrong length");
    const detail::Frozen fz = detail::freeze(model, mu.data());
    Vec out(h.size());
    std::vector<int> actions(h.size(), 0);
    detail::bellman_into(fz, h, out, &actions);
    return Policy::deterministic(model.n(), model.m(), actions);
}

inline double acoe_residual(const MFGModel& model, const ProbVector& mu, const ValueFunction& h) {
    return detail::sup_dist(bellman_apply(model, mu, h), h);
}

// Long-run average cost of pi with the coupling measure frozen at mu:
// sum_{x,a} c(x,a,mu)*pi(a|x)*inv[x], inv the invariant law of the induced
// chain. Not the self-consistent Lambda map.
inline double evaluate_policy_average_cost(const MFGModel& model, const Policy& pi,
                                           const ProbVector& mu,
                                           double tol = defaults::solver_tol) {
    const detail::Frozen fz = detail::freeze(model, mu.data());
    const Mat P = detail::policy_matrix(fz, pi);
    const detail::PowerResult inv =
        detail::power_invariant(P, tol, detail::power_budget(1.0 - fz.mass, tol));
    double J = 0.0;
    for (int x = 0; x < fz.n; ++x) {
        double cx = 0.0;
        for (int a = 0; a < fz.m; ++a) cx += pi(x, a) * fz.cost[x][a];
        J += inv.mu[x] * cx;
    }
    return J;
}

}  // namespace mfg
