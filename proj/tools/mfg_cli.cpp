// mfg: command-line front end for the mean-field game solver library.
//
// Subcommands: validate, solve-acoe, solve-mfe, eps-nash, simulate.
// Exit codes (stable contract):
//   0 success, 1 assumption/verdict failure, 2 input error,
//   3 non-convergence, 4 unsupported model class.
// Every run is seed-reproducible; --no-meta strips the timestamp block so
// output files can be compared byte for byte.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mfg/acoe.hpp"
#include "mfg/json_io.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/model.hpp"
#include "mfg/nash.hpp"
#include "mfg/sim.hpp"

namespace {

using mfg::io::json;

struct CommonArgs {
    std::string model_path;
    std::string out_path;
    bool no_meta = false;
    std::uint64_t seed = mfg::defaults::seed;
    int threads = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("model", args.model_path, "model JSON file")->required();
    sub->add_option("--out", args.out_path, "write the JSON report here instead of stdout");
    sub->add_flag("--no-meta", args.no_meta, "omit the timestamp/meta block (reproducible output)");
    sub->add_option("--seed", args.seed, "root seed for all randomized work")
        ->envname("MFG_SEED");
    sub->add_option("--threads", args.threads, "worker cap for Monte Carlo loops")
        ->check(CLI::Range(1, 256));
}

std::string iso_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void emit(json out, const CommonArgs& args, const std::string& command) {
    if (!args.no_meta) {
        out["meta"] = json{{"command", command},
                           {"model", args.model_path},
                           {"timestamp", iso_timestamp()},
                           {"version", "mfgsolve 1.0.0"}};
    }
    const std::string text = out.dump(2) + "\n";
    if (args.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(args.out_path);
        if (!f) throw mfg::ParseError("cannot open output file: " + args.out_path);
        f << text;
    }
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw mfg::ParseError("cannot open output file: " + path);
    f << text;
}

json validation_json(const mfg::MFGModel& model, bool& ok) {
    const mfg::MinorizationReport minrep = mfg::validate_minorization(model);
    const mfg::DriftReport driftrep = mfg::validate_drift(model);
    ok = minrep.ok && driftrep.ok;
    return json{{"ok", ok},
                {"minorization", mfg::io::to_json(minrep)},
                {"drift", mfg::io::to_json(driftrep)}};
}

// Solve commands require a model that passes both assumption checks.
int gate_assumptions(const mfg::MFGModel& model, const CommonArgs& args,
                     const std::string& command) {
    bool ok = false;
    json rep = validation_json(model, ok);
    if (ok) return 0;
    std::cerr << "error: model fails assumption validation\n";
    emit(std::move(rep), args, command);
    return 1;
}

mfg::ProbVector parse_mu(const std::string& text, int n) {
    if (text == "uniform") return mfg::ProbVector::uniform(n);
    mfg::Vec entries;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            entries.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw mfg::ParseError("--mu: cannot parse entry \"" + item + "\"");
        }
    }
    if (static_cast<int>(entries.size()) != n)
        throw mfg::ParseError("--mu: expected " + std::to_string(n) + " entries, got " +
                              std::to_string(entries.size()));
    return mfg::ProbVector(std::move(entries), "--mu");
}

// The equilibrium used by eps-nash and simulate. mu* is re-solved from pi* at
// tight tolerance so downstream consistency guards see a clean pair.
struct SolvedMfe {
    mfg::Policy pi_star;
    mfg::ProbVector mu_star;
    mfg::MeanFieldEquilibrium equilibrium;
};

SolvedMfe solve_equilibrium_or_throw(const mfg::MFGModel& model, double tol, double theta,
                                     int max_iter, std::uint64_t seed) {
    mfg::MfeSearch search = mfg::solve_mfe_multistart(model, tol, theta, max_iter, seed);
    if (search.certified.empty())
        throw mfg::NonConvergenceError(
            "mean-field equilibrium loop did not certify; best residual " +
                std::to_string(search.best.certificate.worst()),
            search.best.certificate.worst(), search.best.iterations);
    SolvedMfe out{search.certified[0].pi_star,
                  mfg::lambda_map(model, search.certified[0].pi_star, 1e-12),
                  search.certified[0]};
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite mean-field game solver (average-cost criterion)"};
    app.require_subcommand(1);

    CommonArgs validate_args;
    CLI::App* cmd_validate = app.add_subcommand("validate", "check minorization and drift");
    add_common(cmd_validate, validate_args);

    CommonArgs acoe_args;
    std::string acoe_mu = "uniform";
    double acoe_tol = mfg::defaults::solver_tol;
    CLI::App* cmd_acoe =
        app.add_subcommand("solve-acoe", "solve the average-cost optimality equation at fixed mu");
    add_common(cmd_acoe, acoe_args);
    cmd_acoe->add_option("--mu", acoe_mu, "population measure: 'uniform' or comma list");
    cmd_acoe->add_option("--tol", acoe_tol, "fixed-point tolerance")->check(CLI::PositiveNumber);

    CommonArgs mfe_args;
    double mfe_tol = mfg::defaults::certificate_tol;
    double mfe_theta = mfg::defaults::theta;
    int mfe_max_iter = mfg::defaults::mfe_max_iter;
    std::string mfe_trace;
    CLI::App* cmd_mfe = app.add_subcommand("solve-mfe", "compute a certified mean-field equilibrium");
    add_common(cmd_mfe, mfe_args);
    cmd_mfe->add_option("--tol", mfe_tol, "certificate tolerance")->check(CLI::PositiveNumber);
    cmd_mfe->add_option("--theta", mfe_theta, "damping in (0,1]")
        ->check(CLI::Range(1e-6, 1.0));
    cmd_mfe->add_option("--max-iter", mfe_max_iter, "outer iteration budget")
        ->check(CLI::PositiveNumber);
    cmd_mfe->add_option("--trace", mfe_trace, "write the outer-loop residual trace CSV here");

    CommonArgs nash_args;
    std::vector<int> nash_Ns;
    int nash_samples = mfg::defaults::samples;
    std::string nash_metric = "tv";
    std::string nash_csv;
    CLI::App* cmd_nash =
        app.add_subcommand("eps-nash", "epsilon(N) bound vs exact best-response gap");
    add_common(cmd_nash, nash_args);
    cmd_nash->add_option("--N", nash_Ns, "population sizes, e.g. --N 5,10,50,200")
        ->required()
        ->delimiter(',')
        ->check(CLI::Range(2, 100000000));
    cmd_nash->add_option("--samples", nash_samples, "Monte Carlo replications")
        ->check(CLI::Range(100, 100000000));
    cmd_nash->add_option("--metric", nash_metric, "rho metric: tv or paper")
        ->check(CLI::IsMember({"tv", "paper"}));
    cmd_nash->add_option("--csv", nash_csv, "write the per-N table CSV here");

    CommonArgs sim_args;
    int sim_N = 0;
    std::int64_t sim_T = mfg::defaults::horizon;
    std::int64_t sim_burn = -1;
    std::string sim_policy = "equilibrium";
    std::string sim_trace;
    std::int64_t sim_stride = 1;
    CLI::App* cmd_sim = app.add_subcommand("simulate", "simulate the N-agent game");
    add_common(cmd_sim, sim_args);
    cmd_sim->add_option("--N", sim_N, "number of agents")->required()->check(CLI::PositiveNumber);
    cmd_sim->add_option("--T", sim_T, "horizon steps")->check(CLI::PositiveNumber);
    cmd_sim->add_option("--burn-in", sim_burn, "steps discarded before measuring (default T/10)");
    cmd_sim->add_option("--policy", sim_policy, "broadcast profile: equilibrium or uniform")
        ->check(CLI::IsMember({"equilibrium", "uniform"}));
    cmd_sim->add_option("--trace", sim_trace, "write the per-step trace CSV here");
    cmd_sim->add_option("--trace-stride", sim_stride, "record every k-th step in the trace")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_validate->parsed()) {
            const mfg::MFGModel model = mfg::io::load_model_file(validate_args.model_path);
            bool ok = false;
            json rep = validation_json(model, ok);
            emit(std::move(rep), validate_args, "validate");
            return ok ? 0 : 1;
        }

        if (cmd_acoe->parsed()) {
            const mfg::MFGModel model = mfg::io::load_model_file(acoe_args.model_path);
            if (const int rc = gate_assumptions(model, acoe_args, "solve-acoe"); rc != 0) return rc;
            const mfg::ProbVector mu = parse_mu(acoe_mu, model.n());
            const mfg::AcoeSolution sol = mfg::solve_acoe(model, mu, acoe_tol);
            json out = mfg::io::to_json(sol);
            out["mu"] = mu.data();
            out["tol"] = acoe_tol;
            emit(std::move(out), acoe_args, "solve-acoe");
            return 0;
        }

        if (cmd_mfe->parsed()) {
            const mfg::MFGModel model = mfg::io::load_model_file(mfe_args.model_path);
            if (const int rc = gate_assumptions(model, mfe_args, "solve-mfe"); rc != 0) return rc;
            const mfg::MfeSearch search =
                mfg::solve_mfe_multistart(model, mfe_tol, mfe_theta, mfe_max_iter, mfe_args.seed);
            json out;
            out["tolerance"] = mfe_tol;
            out["theta"] = mfe_theta;
            out["seed"] = mfe_args.seed;
            out["converged"] = !search.certified.empty();
            out["equilibria"] = json::array();
            for (const mfg::MeanFieldEquilibrium& eq : search.certified)
                out["equilibria"].push_back(mfg::io::to_json(eq));
            if (!mfe_trace.empty()) {
                const mfg::MeanFieldEquilibrium& traced =
                    search.certified.empty() ? search.best : search.certified[0];
                write_file(mfe_trace, mfg::io::csv_mfe_trace(traced.trace));
            }
            if (search.certified.empty()) {
                out["best_attempt"] = mfg::io::to_json(search.best);
                std::cerr << "error: no equilibrium certified within tolerance; best residual "
                          << search.best.certificate.worst() << "\n";
                emit(std::move(out), mfe_args, "solve-mfe");
                return 3;
            }
            emit(std::move(out), mfe_args, "solve-mfe");
            return 0;
        }

        if (cmd_nash->parsed()) {
            const mfg::MFGModel model = mfg::io::load_model_file(nash_args.model_path);
            if (model.population_coupled())
                throw mfg::UnsupportedModelError(
                    "eps-nash requires a population-independent transition kernel; this model's "
                    "kernel is population-coupled (affine with kappa > 0)");
            if (const int rc = gate_assumptions(model, nash_args, "eps-nash"); rc != 0) return rc;
            const mfg::RhoMetric metric = nash_metric == "tv" ? mfg::RhoMetric::TotalVariation
                                                              : mfg::RhoMetric::PaperWeighted;
            const SolvedMfe mfe = solve_equilibrium_or_throw(
                model, mfg::defaults::certificate_tol, mfg::defaults::theta,
                mfg::defaults::mfe_max_iter, nash_args.seed);
            const std::vector<mfg::EpsNashReport> rows =
                mfg::eps_nash_table(model, mfe.pi_star, mfe.mu_star, nash_Ns, metric, nash_samples,
                                    nash_args.seed, mfg::defaults::solver_tol, nash_args.threads);
            bool all_pass = true;
            json jrows = json::array();
            for (const mfg::EpsNashReport& row : rows) {
                all_pass = all_pass && row.verdict;
                jrows.push_back(mfg::io::to_json(row));
            }
            json out;
            out["metric"] = mfg::rho_metric_name(metric);
            out["samples"] = nash_samples;
            out["seed"] = nash_args.seed;
            out["mu_star"] = mfe.mu_star.data();
            out["policy"] = mfg::io::policy_json(mfe.pi_star);
            out["rows"] = std::move(jrows);
            out["all_pass"] = all_pass;
            if (!nash_csv.empty()) write_file(nash_csv, mfg::io::csv_eps_nash(rows));
            emit(std::move(out), nash_args, "eps-nash");
            return all_pass ? 0 : 1;
        }

        if (cmd_sim->parsed()) {
            const mfg::MFGModel model = mfg::io::load_model_file(sim_args.model_path);
            if (const int rc = gate_assumptions(model, sim_args, "simulate"); rc != 0) return rc;

            mfg::Policy pi;
            json jpolicy;
            if (sim_policy == "equilibrium") {
                const SolvedMfe mfe = solve_equilibrium_or_throw(
                    model, mfg::defaults::certificate_tol, mfg::defaults::theta,
                    mfg::defaults::mfe_max_iter, sim_args.seed);
                pi = mfe.pi_star;
            } else {
                pi = mfg::Policy::uniform(model.n(), model.m());
            }
            // Reference measure for TV columns: stationary law of the profile.
            const mfg::ProbVector mu_ref = mfg::lambda_map(model, pi, 1e-12);

            mfg::SimConfig config;
            config.N = sim_N;
            config.T = sim_T;
            config.burn_in = sim_burn;
            config.seed = sim_args.seed;
            config.profile = {pi};
            config.record_trace = !sim_trace.empty();
            config.trace_stride = sim_stride;
            const mfg::SimResult res = mfg::simulate_population(model, config);

            double mean_cost = 0.0;
            for (double c : res.avg_cost_per_agent) mean_cost += c;
            mean_cost /= static_cast<double>(sim_N);

            json out;
            out["N"] = sim_N;
            out["T"] = sim_T;
            out["burn_in"] = config.burn_in < 0 ? sim_T / 10 : config.burn_in;
            out["seed"] = sim_args.seed;
            out["policy"] = sim_policy;
            out["policy_actions"] = mfg::io::policy_json(pi);
            out["avg_cost_agent1"] = res.avg_cost_per_agent[0];
            out["stderr_agent1"] = res.stderr_per_agent[0];
            out["mean_avg_cost"] = mean_cost;
            out["measured_steps"] = res.measured_steps;
            out["mu_ref"] = mu_ref.data();
            out["tv_time_avg_to_mu_ref"] =
                mfg::detail::l1_dist(res.time_avg_empirical.data(), mu_ref.data());
            out["time_avg_empirical"] = res.time_avg_empirical.data();
            if (!model.population_coupled()) {
                const mfg::Mat cbar = mfg::effective_cost(model, mu_ref, sim_N);
                double j_eq = 0.0;
                for (int x = 0; x < model.n(); ++x)
                    for (int a = 0; a < model.m(); ++a)
                        j_eq += cbar[x][a] * pi(x, a) * mu_ref[x];
                out["j_eq"] = j_eq;
            }
            if (!sim_trace.empty())
                write_file(sim_trace, mfg::io::csv_sim_trace(res.trace, mu_ref.data()));
            emit(std::move(out), sim_args, "simulate");
            return 0;
        }
    } catch (const mfg::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mfg::UnsupportedModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const mfg::NonConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mfg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
