#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mfg/defaults.hpp"
#include "mfg/errors.hpp"

namespace mfg {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;    // Mat[i][j]
using Cube = std::vector<Mat>;   // Cube[i][j][k]
using Quad = std::vector<Cube>;  // Quad[i][j][k][l]

namespace detail {

inline void check_finite_nonneg(const Vec& v, const std::string& what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw ModelError(what + ": entry is not finite");
        if (x < 0.0) throw ModelError(what + ": negative entry");
    }
}

// Shared normalization discipline: float dust in [-renorm_tol, 0) clamps to
// zero and |sum-1| <= renorm_tol renormalizes silently; anything worse is a
// modeling bug, not rounding.
inline Vec normalize_prob_row(Vec v, const std::string& what) {
    if (v.empty()) throw ModelError(what + ": empty probability vector");
    double sum = 0.0;
    for (double& x : v) {
        if (!std::isfinite(x)) throw ModelError(what + ": entry is not finite");
        if (x < -defaults::renorm_tol)
            throw ModelError(what + ": negative entry " + std::to_string(x));
        if (x < 0.0) x = 0.0;
        sum += x;
    }
    if (std::abs(sum - 1.0) > defaults::renorm_tol)
        throw ModelError(what + ": row sums to " + std::to_string(sum) + ", expected 1");
    for (double& x : v) x /= sum;
    return v;
}

}  // namespace detail

struct StateSpace {
    int n = 0;
};

struct ActionSpace {
    int m = 0;
};

// Point of the probability simplex. Renormalized on construction.
class ProbVector {
  public:
    ProbVector() = default;
    explicit ProbVector(Vec entries, const std::string& what = "ProbVector")
        : p_(detail::normalize_prob_row(std::move(entries), what)) {}

    static ProbVector uniform(int n) {
        return ProbVector(Vec(static_cast<std::size_t>(n), 1.0 / n));
    }
    static ProbVector dirac(int n, int x) {
        Vec v(static_cast<std::size_t>(n), 0.0);
        v[static_cast<std::size_t>(x)] = 1.0;
        return ProbVector(std::move(v));
    }

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
    const Vec& data() const { return p_; }

  private:
    Vec p_;
};

// Sub-probability measure lambda with 0 < lambda(X) < 1; its mass fixes the
// contraction modulus beta = 1 - mass of every fixed-point loop downstream.
struct MinorizationMeasure {
    Vec lambda;
    double mass = 0.0;

    MinorizationMeasure() = default;
    explicit MinorizationMeasure(Vec lam) : lambda(std::move(lam)) {
        detail::check_finite_nonneg(lambda, "lambda");
        for (double x : lambda) mass += x;
        if (mass <= 0.0) throw ModelError("lambda: mass must be positive");
        if (mass >= 1.0)
            throw ModelError("lambda: mass " + std::to_string(mass) + " must be < 1");
    }
};

// Population-independent transition law p0[x][a][y].
struct TensorKernel {
    Cube p0;
};

// p(y|x,a,mu) = (1-kappa)*p0[y|x,a] + kappa*sum_z q[y|x,a,z]*mu[z].
// Affine in mu, so simplex-vertex checks extend to the whole simplex.
struct AffineKernel {
    double kappa = 0.0;
    Cube p0;
    Quad q;
};

using KernelSpec = std::variant<TensorKernel, AffineKernel>;

// c(x,a,mu) = c0[x][a] + sum_z r[x][a][z]*mu[z]; r empty means decoupled.
struct CostSpec {
    Mat c0;
    Cube r;
    double c_max = 0.0;  // max over x,a and simplex vertices; affine => global max
};

// Certificate data for the drift inequality
//   sum_y w[y]*(p(y|x,a,mu) - lambda[y]) <= alpha*w[x]  for all x,a,mu.
struct DriftCertificate {
    double alpha = 0.0;
    Vec w;
};

class MFGModel {
  public:
    MFGModel(int n, int m, KernelSpec kernel, CostSpec cost, MinorizationMeasure lambda,
             DriftCertificate drift, ProbVector mu0)
        : n_(n),
          m_(m),
          kernel_(std::move(kernel)),
          cost_(std::move(cost)),
          lambda_(std::move(lambda)),
          drift_(std::move(drift)),
          mu0_(std::move(mu0)) {
        validate_shapes();
    }

    int n() const { return n_; }
    int m() const { return m_; }
    const KernelSpec& kernel() const { return kernel_; }
    const CostSpec& cost() const { return cost_; }
    const MinorizationMeasure& lambda() const { return lambda_; }
    const DriftCertificate& drift() const { return drift_; }
    const ProbVector& mu0() const { return mu0_; }
    double c_max() const { return cost_.c_max; }
    double beta() const { return 1.0 - lambda_.mass; }

    // True when the transition law actually reads the population measure.
    bool population_coupled() const {
        const auto* aff = std::get_if<AffineKernel>(&kernel_);
        return aff != nullptr && aff->kappa > 0.0;
    }

  private:
    void validate_shapes();

    int n_;
    int m_;
    KernelSpec kernel_;
    CostSpec cost_;
    MinorizationMeasure lambda_;
    DriftCertificate drift_;
    ProbVector mu0_;
};

namespace detail {

inline void kernel_row_into(const MFGModel& model, int x, int a, const Vec& mu, Vec& out) {
    const int n = model.n();
    out.resize(static_cast<std::size_t>(n));
    if (const auto* tk = std::get_if<TensorKernel>(&model.kernel())) {
        const Vec& row = tk->p0[x][a];
        std::copy(row.begin(), row.end(), out.begin());
        return;
    }
    const auto& ak = std::get<AffineKernel>(model.kernel());
    const Vec& base = ak.p0[x][a];
    const double k0 = 1.0 - ak.kappa;
    for (int y = 0; y < n; ++y) out[static_cast<std::size_t>(y)] = k0 * base[y];
    if (ak.kappa == 0.0) return;
    const Mat& qx = ak.q[x][a];
    for (int z = 0; z < n; ++z) {
        const double wz = ak.kappa * mu[z];
        if (wz == 0.0) continue;
        const Vec& qrow = qx[z];
        for (int y = 0; y < n; ++y) out[static_cast<std::size_t>(y)] += wz * qrow[y];
    }
}

inline double cost_at(const MFGModel& model, int x, int a, const Vec& mu) {
    const CostSpec& cs = model.cost();
    double c = cs.c0[x][a];
    if (!cs.r.empty()) {
        const Vec& row = cs.r[x][a];
        for (int z = 0; z < model.n(); ++z) c += row[z] * mu[z];
    }
    return c;
}

inline void check_indices(const MFGModel& model, int x, int a) {
    if (x < 0 || x >= model.n())
        throw ModelError("state index " + std::to_string(x) + " out of range");
    if (a < 0 || a >= model.m())
        throw ModelError("action index " + std::to_string(a) + " out of range");
}

// Model with the population measure frozen: realized costs, kernel rows and
// clamped sub-stochastic rows, ready for Bellman sweeps. All downstream
// solvers consume this one representation so their arithmetic agrees bitwise.
struct Frozen {
    int n = 0;
    int m = 0;
    double mass = 0.0;  // lambda(X)
    Vec lambda;
    Mat cost;   // [x][a]
    Cube rows;  // [x][a][y] realized kernel
    Cube hat;   // [x][a][y] rows - lambda, clamped at 0
};

inline Frozen freeze(const MFGModel& model, const Vec& mu) {
    const int n = model.n();
    const int m = model.m();
    Frozen fz;
    fz.n = n;
    fz.m = m;
    fz.mass = model.lambda().mass;
    fz.lambda = model.lambda().lambda;
    fz.cost.assign(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(m)));
    fz.rows.assign(static_cast<std::size_t>(n), Mat(static_cast<std::size_t>(m)));
    fz.hat.assign(static_cast<std::size_t>(n), Mat(static_cast<std::size_t>(m)));
    for (int x = 0; x < n; ++x) {
        for (int a = 0; a < m; ++a) {
            fz.cost[x][a] = cost_at(model, x, a, mu);
            Vec& row = fz.rows[x][a];
            kernel_row_into(model, x, a, mu, row);
            Vec& hat = fz.hat[x][a];
            hat.resize(static_cast<std::size_t>(n));
            for (int y = 0; y < n; ++y) {
                double v = row[y] - fz.lambda[y];
                if (v < -defaults::renorm_tol)
                    throw ModelError("minorization violated at runtime: p - lambda = " +
                                     std::to_string(v) + " at (x=" + std::to_string(x) +
                                     ", a=" + std::to_string(a) + ", y=" + std::to_string(y) +
                                     ")");
                hat[static_cast<std::size_t>(y)] = v < 0.0 ? 0.0 : v;
            }
        }
    }
    return fz;
}

}  // namespace detail

inline void MFGModel::validate_shapes() {
    if (n_ < 1) throw ModelError("n must be >= 1");
    if (m_ < 1) throw ModelError("m must be >= 1");
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::size_t m = static_cast<std::size_t>(m_);

    auto check_rows = [&](const Cube& p0, const std::string& name) {
        if (p0.size() != n) throw ModelError(name + ": expected " + std::to_string(n_) + " states");
        for (std::size_t x = 0; x < n; ++x) {
            if (p0[x].size() != m)
                throw ModelError(name + "[" + std::to_string(x) + "]: expected " +
                                 std::to_string(m_) + " actions");
            for (std::size_t a = 0; a < m; ++a) {
                if (p0[x][a].size() != n)
                    throw ModelError(name + "[" + std::to_string(x) + "][" + std::to_string(a) +
                                     "]: expected row of length " + std::to_string(n_));
            }
        }
    };

    if (auto* tk = std::get_if<TensorKernel>(&kernel_)) {
        check_rows(tk->p0, "kernel.p0");
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t a = 0; a < m; ++a)
                tk->p0[x][a] = detail::normalize_prob_row(
                    std::move(tk->p0[x][a]),
                    "kernel.p0[" + std::to_string(x) + "][" + std::to_string(a) + "]");
    } else {
        auto& ak = std::get<AffineKernel>(kernel_);
        if (!(ak.kappa >= 0.0 && ak.kappa < 1.0))
            throw ModelError("kernel.kappa must lie in [0,1)");
        check_rows(ak.p0, "kernel.p0");
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t a = 0; a < m; ++a)
                ak.p0[x][a] = detail::normalize_prob_row(
                    std::move(ak.p0[x][a]),
                    "kernel.p0[" + std::to_string(x) + "][" + std::to_string(a) + "]");
        if (ak.q.size() != n) throw ModelError("kernel.q: expected " + std::to_string(n_) + " states");
        for (std::size_t x = 0; x < n; ++x) {
            if (ak.q[x].size() != m)
                throw ModelError("kernel.q[" + std::to_string(x) + "]: expected " +
                                 std::to_string(m_) + " actions");
            for (std::size_t a = 0; a < m; ++a) {
                if (ak.q[x][a].size() != n)
                    throw ModelError("kernel.q[" + std::to_string(x) + "][" + std::to_string(a) +
                                     "]: expected " + std::to_string(n_) + " coupling rows");
                for (std::size_t z = 0; z < n; ++z)
                    ak.q[x][a][z] = detail::normalize_prob_row(
                        std::move(ak.q[x][a][z]), "kernel.q[" + std::to_string(x) + "][" +
                                                      std::to_string(a) + "][" +
                                                      std::to_string(z) + "]");
            }
        }
    }

    if (cost_.c0.size() != n) throw ModelError("cost.c0: expected " + std::to_string(n_) + " rows");
    for (std::size_t x = 0; x < n; ++x)
        if (cost_.c0[x].size() != m)
            throw ModelError("cost.c0[" + std::to_string(x) + "]: expected " + std::to_string(m_) +
                             " entries");
    if (!cost_.r.empty()) {
        if (cost_.r.size() != n) throw ModelError("cost.r: expected " + std::to_string(n_) + " rows");
        for (std::size_t x = 0; x < n; ++x) {
            if (cost_.r[x].size() != m)
                throw ModelError("cost.r[" + std::to_string(x) + "]: expected " +
                                 std::to_string(m_) + " entries");
            for (std::size_t a = 0; a < m; ++a)
                if (cost_.r[x][a].size() != n)
                    throw ModelError("cost.r[" + std::to_string(x) + "][" + std::to_string(a) +
                                     "]: expected row of length " + std::to_string(n_));
        }
    }

    // Nonnegativity and the exact bound c_max: affine in mu, so vertices
    // mu = delta_z realize both extremes.
    cost_.c_max = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t a = 0; a < m; ++a) {
            const double base = cost_.c0[x][a];
            if (!std::isfinite(base))
                throw ModelError("cost.c0[" + std::to_string(x) + "][" + std::to_string(a) +
                                 "] is not finite");
            double lo = base, hi = base;
            if (!cost_.r.empty()) {
                for (std::size_t z = 0; z < n; ++z) {
                    const double v = base + cost_.r[x][a][z];
                    if (!std::isfinite(v))
                        throw ModelError("cost.r[" + std::to_string(x) + "][" + std::to_string(a) +
                                         "][" + std::to_string(z) + "] is not finite");
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
            if (lo < -1e-12)
                throw ModelError("cost is negative (" + std::to_string(lo) + ") at x=" +
                                 std::to_string(x) + ", a=" + std::to_string(a) +
                                 " for some vertex measure");
            cost_.c_max = std::max(cost_.c_max, hi);
        }
    }

    if (static_cast<std::size_t>(lambda_.lambda.size()) != n)
        throw ModelError("lambda: expected length " + std::to_string(n_));
    if (!(drift_.alpha > 0.0 && drift_.alpha < 1.0))
        throw ModelError("drift.alpha must lie in (0,1)");
    if (drift_.w.size() != n)
        throw ModelError("drift.w: expected length " + std::to_string(n_));
    detail::check_finite_nonneg(drift_.w, "drift.w");
    if (mu0_.size() == 0) mu0_ = ProbVector::uniform(n_);
    if (static_cast<std::size_t>(mu0_.size()) != n)
        throw ModelError("mu0: expected length " + std::to_string(n_));
}

// Realized transition row p(.|x,a,mu).
inline ProbVector eval_kernel(const MFGModel& model, int x, int a, const ProbVector& mu) {
    detail::check_indices(model, x, a);
    Vec row;
    detail::kernel_row_into(model, x, a, mu.data(), row);
    return ProbVector(std::move(row), "eval_kernel row");
}

// Realized one-stage cost c(x,a,mu) in [0, c_max].
inline double eval_cost(const MFGModel& model, int x, int a, const ProbVector& mu) {
    detail::check_indices(model, x, a);
    return detail::cost_at(model, x, a, mu.data());
}

// Sub-stochastic row p(.|x,a,mu) - lambda. Entries are clamped at zero;
// a deficit beyond renorm_tol means the minorization assumption is false.
inline Vec hat_kernel(const MFGModel& model, int x, int a, const ProbVector& mu) {
    detail::check_indices(model, x, a);
    Vec row;
    detail::kernel_row_into(model, x, a, mu.data(), row);
    const Vec& lam = model.lambda().lambda;
    for (int y = 0; y < model.n(); ++y) {
        double v = row[y] - lam[y];
        if (v < -defaults::renorm_tol)
            throw ModelError("hat_kernel: p - lambda = " + std::to_string(v) + " at (x=" +
                             std::to_string(x) + ", a=" + std::to_string(a) + ", y=" +
                             std::to_string(y) + "); minorization violated");
        row[static_cast<std::size_t>(y)] = v < 0.0 ? 0.0 : v;
    }
    return row;
}

struct MinorizationReport {
    bool ok = false;
    double worst_margin = 0.0;      // min over x,a,z,y of p(y|x,a,delta_z) - lambda[y]
    double max_uniform_mass = 0.0;  // n * min realized entry: largest feasible uniform lambda
    int x = 0, a = 0, z = 0, y = 0;  // witness attaining worst_margin
};

// Checks p >= lambda entrywise at every simplex vertex mu = delta_z. Both
// kernel families are affine in mu, so vertex margins bound the whole simplex.
inline MinorizationReport validate_minorization(const MFGModel& model) {
    const int n = model.n();
    const int m = model.m();
    const bool coupled = std::holds_alternative<AffineKernel>(model.kernel());
    const int zcount = coupled ? n : 1;
    MinorizationReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    double min_entry = std::numeric_limits<double>::infinity();
    Vec row;
    for (int z = 0; z < zcount; ++z) {
        const ProbVector vertex = ProbVector::dirac(n, z);
        for (int x = 0; x < n; ++x) {
            for (int a = 0; a < m; ++a) {
                detail::kernel_row_into(model, x, a, vertex.data(), row);
                for (int y = 0; y < n; ++y) {
                    min_entry = std::min(min_entry, row[y]);
                    const double margin = row[y] - model.lambda().lambda[y];
                    if (margin < rep.worst_margin) {
                        rep.worst_margin = margin;
                        rep.x = x;
                        rep.a = a;
                        rep.z = z;
                        rep.y = y;
                    }
                }
            }
        }
    }
    rep.max_uniform_mass = static_cast<double>(n) * min_entry;
    rep.ok = rep.worst_margin >= -defaults::renorm_tol;
    return rep;
}

struct DriftReport {
    bool ok = false;
    double max_ratio = 0.0;   // max over x with w[x] > 0 of drift LHS / w[x]
    double min_alpha = 0.0;   // smallest alpha the certificate would accept
    double alpha = 0.0;       // alpha under test
    int x = 0, a = 0, z = 0;  // witness attaining max_ratio
    std::vector<int> degenerate_states;  // w[x] = 0 with positive drift mass
};

// Verifies sum_y w[y]*hat(y|x,a,delta_z) <= alpha*w[x] at every vertex.
// States with w[x] = 0 but positive left side violate the inequality for
// every alpha; they are collected rather than aborting the sweep.
inline DriftReport validate_drift(const MFGModel& model) {
    const int n = model.n();
    const int m = model.m();
    const Vec& w = model.drift().w;
    const Vec& lam = model.lambda().lambda;
    const bool coupled = std::holds_alternative<AffineKernel>(model.kernel());
    const int zcount = coupled ? n : 1;
    DriftReport rep;
    rep.alpha = model.drift().alpha;
    rep.max_ratio = 0.0;
    Vec row;
    for (int x = 0; x < n; ++x) {
        double worst = 0.0;
        int wa = 0, wz = 0;
        for (int z = 0; z < zcount; ++z) {
            const ProbVector vertex = ProbVector::dirac(n, z);
            for (int a = 0; a < m; ++a) {
                detail::kernel_row_into(model, x, a, vertex.data(), row);
                double lhs = 0.0;
                for (int y = 0; y < n; ++y) {
                    double h = row[y] - lam[y];
                    if (h < 0.0) h = 0.0;
                    lhs += w[y] * h;
                }
                if (lhs > worst) {
                    worst = lhs;
                    wa = a;
                    wz = z;
                }
            }
        }
        if (w[x] > 0.0) {
            const double ratio = worst / w[x];
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.x = x;
                rep.a = wa;
                rep.z = wz;
            }
        } else if (worst > defaults::renorm_tol) {
            rep.degenerate_states.push_back(x);
        }
    }
    rep.min_alpha = rep.max_ratio;
    rep.ok = rep.degenerate_states.empty() && rep.max_ratio <= rep.alpha + 1e-12;
    return rep;
}

}  // namespace mfg
