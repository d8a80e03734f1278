#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfg/acoe.hpp"
#include "mfg/model.hpp"
#include "mfg/rng.hpp"

namespace mfg {

struct SimConfig {
    int N = 1;
    std::int64_t T = defaults::horizon;
    std::int64_t burn_in = -1;  // -1 selects T/10
    std::uint64_t seed = defaults::seed;
    std::vector<Policy> profile;  // one entry broadcasts to every agent
    bool record_trace = false;
    std::int64_t trace_stride = 1;
};

struct SimTraceRow {
    std::int64_t t = 0;
    Vec empirical;                          // e_t
    double running_avg_cost_agent1 = 0.0;   // cumulative mean from t = 0
};

struct SimResult {
    Vec avg_cost_per_agent;
    Vec stderr_per_agent;  // batch-means standard errors
    ProbVector time_avg_empirical;
    std::int64_t measured_steps = 0;  // measurement window actually averaged
    std::vector<SimTraceRow> trace;
};

// Synchronous population dynamics of the N-agent game: at each step every
// agent samples an action from its policy, pays c(x_i, a_i, e_t) and moves
// via p(.|x_i, a_i, e_t), all against the same frozen empirical measure e_t.
//
// Draws are keyed by (seed, stream, t, i), so enlarging N or T reuses every
// draw the smaller run made. Costs are averaged over a 20-batch window after
// burn-in; batch means absorb the autocorrelation an iid stderr would ignore.
inline SimResult simulate_population(const MFGModel& model, const SimConfig& config) {
    const int N = config.N;
    const std::int64_t T = config.T;
    if (N < 1) throw ModelError("simulate_population: N must be >= 1");
    if (T < 1) throw ModelError("simulate_population: T must be >= 1");
    std::int64_t burn = config.burn_in < 0 ? T / 10 : config.burn_in;
    if (burn >= T) throw ModelError("simulate_population: burn_in must be < T");
    if (config.profile.empty())
        throw ModelError("simulate_population: profile needs at least one policy");
    if (config.profile.size() != 1 && config.profile.size() != static_cast<std::size_t>(N))
        throw ModelError("simulate_population: profile must have 1 or N policies");
    for (const Policy& pi : config.profile)
        if (pi.states() != model.n() || pi.actions() != model.m())
            throw ModelError("simulate_population: policy dimensions do not match model");
    if (config.trace_stride < 1) throw ModelError("simulate_population: trace_stride must be >= 1");

    const int n = model.n();
    const bool broadcast = config.profile.size() == 1;
    auto policy_of = [&](int i) -> const Policy& {
        return broadcast ? config.profile[0] : config.profile[static_cast<std::size_t>(i)];
    };

    const std::int64_t window = T - burn;
    const std::int64_t batch_len = window / 20;
    const std::int64_t measured = batch_len > 0 ? 20 * batch_len : window;

    const rng::Key root = rng::Key::root(config.seed);
    const rng::Key init_stream = root.child(0);
    const rng::Key dyn_stream = root.child(1);

    std::vector<int> x(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
        x[i] = rng::sample_index(model.mu0().data(), init_stream.u01(static_cast<std::uint64_t>(i)));
    std::vector<int> x_next(static_cast<std::size_t>(N));

    Vec counts(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < N; ++i) counts[x[i]] += 1.0;

    Vec e(static_cast<std::size_t>(n));
    Vec row_scratch;
    const bool coupled = model.population_coupled();
    const TensorKernel* tensor = std::get_if<TensorKernel>(&model.kernel());

    Vec cost_sum(static_cast<std::size_t>(N), 0.0);        // measurement window
    Mat batch_means(static_cast<std::size_t>(N), Vec());   // filled at boundaries
    Vec batch_acc(static_cast<std::size_t>(N), 0.0);
    Vec e_accum(static_cast<std::size_t>(n), 0.0);
    double agent1_total = 0.0;  // from t = 0, for the trace column

    SimResult out;
    for (std::int64_t t = 0; t < T; ++t) {
        for (int y = 0; y < n; ++y) e[y] = counts[y] / static_cast<double>(N);
        const bool measure = t >= burn && (t - burn) < measured;
        if (measure)
            for (int y = 0; y < n; ++y) e_accum[y] += e[y];

        const rng::Key step = dyn_stream.child(static_cast<std::uint64_t>(t));
        for (int i = 0; i < N; ++i) {
            const rng::Key cell = step.child(static_cast<std::uint64_t>(i));
            const int xi = x[i];
            const int a = rng::sample_index(policy_of(i).matrix()[xi], cell.u01(0));
            const double c = detail::cost_at(model, xi, a, e);
            if (i == 0) agent1_total += c;
            if (measure) {
                cost_sum[i] += c;
                batch_acc[i] += c;
            }
            const Vec* row;
            if (tensor != nullptr && !coupled) {
                row = &tensor->p0[xi][a];
            } else {
                detail::kernel_row_into(model, xi, a, e, row_scratch);
                row = &row_scratch;
            }
            x_next[i] = rng::sample_index(*row, cell.u01(1));
        }

        if (measure && batch_len > 0 && (t - burn + 1) % batch_len == 0)
            for (int i = 0; i < N; ++i) {
                batch_means[i].push_back(batch_acc[i] / static_cast<double>(batch_len));
                batch_acc[i] = 0.0;
            }

        if (config.record_trace && t % config.trace_stride == 0)
            out.trace.push_back({t, e, agent1_total / static_cast<double>(t + 1)});

        for (int i = 0; i < N; ++i) {
            if (x_next[i] != x[i]) {
                counts[x[i]] -= 1.0;
                counts[x_next[i]] += 1.0;
                x[i] = x_next[i];
            }
        }
    }

    out.avg_cost_per_agent.assign(static_cast<std::size_t>(N), 0.0);
    out.stderr_per_agent.assign(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < N; ++i) {
        out.avg_cost_per_agent[i] = cost_sum[i] / static_cast<double>(measured);
        const std::size_t k = batch_means[i].size();
        if (k > 1) {
            double var = 0.0;
            for (double bm : batch_means[i]) {
                const double d = bm - out.avg_cost_per_agent[i];
                var += d * d;
            }
            var /= static_cast<double>(k - 1);
            out.stderr_per_agent[i] = std::sqrt(var / static_cast<double>(k));
        }
    }
    for (double& v : e_accum) v /= static_cast<double>(measured);
    out.time_avg_empirical = ProbVector(std::move(e_accum), "time-averaged empirical measure");
    out.measured_steps = measured;
    return out;
}

inline ProbVector empirical_measure(const std::vector<int>& states, int n) {
    if (states.empty()) throw ModelError("empirical_measure: need at least one agent");
    Vec counts(static_cast<std::size_t>(n), 0.0);
    for (int s : states) {
        if (s < 0 || s >= n) throw ModelError("empirical_measure: state out of range");
        counts[s] += 1.0;
    }
    for (double& v : counts) v /= static_cast<double>(states.size());
    return ProbVector(std::move(counts), "empirical measure");
}

struct ConvergenceRow {
    int N = 0;
    double tv_to_mu_star = 0.0;
};

// TV distance of the time-averaged empirical measure to mu* under the
// broadcast profile (pi*,...,pi*), per population size.
inline std::vector<ConvergenceRow> estimate_convergence(const MFGModel& model,
                                                        const Policy& pi_star,
                                                        const ProbVector& mu_star,
                                                        const std::vector<int>& Ns,
                                                        std::int64_t T = defaults::horizon,
                                                        std::uint64_t seed = defaults::seed) {
    std::vector<ConvergenceRow> rows;
    rows.reserve(Ns.size());
    for (int N : Ns) {
        SimConfig config;
        config.N = N;
        config.T = T;
        config.seed = seed;
        config.profile = {pi_star};
        const SimResult res = simulate_population(model, config);
        rows.push_back(
            {N, detail::l1_dist(res.time_avg_empirical.data(), mu_star.data())});
    }
    return rows;
}

}  // namespace mfg
