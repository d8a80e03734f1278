#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfg/acoe.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/model.hpp"
#include "mfg/nash.hpp"
#include "mfg/sim.hpp"

namespace mfg::io {

using nlohmann::json;

// Shortest round-trip decimal form; stable across runs and platforms with
// IEEE doubles, which keeps CSV output byte-reproducible.
inline std::string fmt_double(double v) {
    char buf[64];
    const std::to_chars_result res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline const json& member(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ParseError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end())
        throw ParseError((path.empty() ? key : path + "." + key) + ": missing");
    return *it;
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path + ": expected a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& path) {
    const double v = as_number(j, path);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) throw ParseError(path + ": expected an integer");
    return i;
}

inline Vec as_vec(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path + ": expected an array");
    Vec out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline Mat as_mat(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path + ": expected an array");
    Mat out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_vec(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline Cube as_cube(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path + ": expected an array");
    Cube out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_mat(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline Quad as_quad(const json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path + ": expected an array");
    Quad out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(as_cube(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace detail

inline MFGModel load_model(const json& j) {
    const int n = detail::as_int(detail::member(j, "n", ""), "n");
    const int m = detail::as_int(detail::member(j, "m", ""), "m");

    const json& jk = detail::member(j, "kernel", "");
    const json& jtype = detail::member(jk, "type", "kernel");
    if (!jtype.is_string()) throw ParseError("kernel.type: expected a string");
    const std::string type = jtype.get<std::string>();
    KernelSpec kernel;
    if (type == "tensor") {
        kernel = TensorKernel{detail::as_cube(detail::member(jk, "p0", "kernel"), "kernel.p0")};
    } else if (type == "affine") {
        AffineKernel ak;
        ak.kappa = detail::as_number(detail::member(jk, "kappa", "kernel"), "kernel.kappa");
        ak.p0 = detail::as_cube(detail::member(jk, "p0", "kernel"), "kernel.p0");
        ak.q = detail::as_quad(detail::member(jk, "q", "kernel"), "kernel.q");
        kernel = std::move(ak);
    } else {
        throw ParseError("kernel.type: expected \"tensor\" or \"affine\", got \"" + type + "\"");
    }

    const json& jc = detail::member(j, "cost", "");
    CostSpec cost;
    cost.c0 = detail::as_mat(detail::member(jc, "c0", "cost"), "cost.c0");
    if (jc.contains("r") && !jc["r"].is_null()) cost.r = detail::as_cube(jc["r"], "cost.r");

    MinorizationMeasure lambda(detail::as_vec(detail::member(j, "lambda", ""), "lambda"));

    const json& jd = detail::member(j, "drift", "");
    DriftCertificate drift;
    drift.alpha = detail::as_number(detail::member(jd, "alpha", "drift"), "drift.alpha");
    drift.w = detail::as_vec(detail::member(jd, "w", "drift"), "drift.w");

    ProbVector mu0;
    if (j.contains("mu0") && !j["mu0"].is_null())
        mu0 = ProbVector(detail::as_vec(j["mu0"], "mu0"), "mu0");

    return MFGModel(n, m, std::move(kernel), std::move(cost), std::move(lambda), std::move(drift),
                    std::move(mu0));
}

inline MFGModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("model file " + path + " is not valid JSON: " + e.what());
    }
    return load_model(j);
}

inline json to_json(const MinorizationReport& rep) {
    return json{{"ok", rep.ok},
                {"worst_margin", rep.worst_margin},
                {"max_uniform_lambda_mass", rep.max_uniform_mass},
                {"witness", json{{"x", rep.x}, {"a", rep.a}, {"z", rep.z}, {"y", rep.y}}}};
}

inline json to_json(const DriftReport& rep) {
    return json{{"ok", rep.ok},
                {"alpha", rep.alpha},
                {"max_ratio", rep.max_ratio},
                {"suggested_min_alpha", rep.min_alpha},
                {"witness", json{{"x", rep.x}, {"a", rep.a}, {"z", rep.z}}},
                {"degenerate_states", rep.degenerate_states}};
}

inline json policy_json(const Policy& pi) {
    if (pi.is_deterministic()) return json(pi.action_indices());
    return json(pi.matrix());
}

inline json to_json(const AcoeSolution& sol) {
    return json{{"h", sol.h},
                {"rho", sol.rho},
                {"policy", policy_json(sol.policy)},
                {"residual", sol.residual},
                {"iterations", sol.iterations}};
}

inline json to_json(const EquilibriumCertificate& cert) {
    return json{{"consistency_residual", cert.consistency_residual},
                {"optimality_gap", cert.optimality_gap},
                {"b_mass_defect", cert.b_mass_defect},
                {"tolerance", cert.tolerance}};
}

inline json to_json(const MeanFieldEquilibrium& eq) {
    return json{{"mu_star", eq.mu_star.data()},
                {"policy", policy_json(eq.pi_star)},
                {"certificate", to_json(eq.certificate)},
                {"iterations", eq.iterations},
                {"converged", eq.converged}};
}

inline json to_json(const EpsNashReport& row) {
    return json{{"N", row.N},
                {"eps_paper", row.eps_bound},
                {"eps_tight", row.eps_tight},
                {"mc_stderr", row.mc_stderr},
                {"gap_exact", row.gap_exact},
                {"verdict", row.verdict},
                {"seed", row.seed}};
}

inline std::string csv_eps_nash(const std::vector<EpsNashReport>& rows) {
    std::string out = "N,eps_paper,eps_tight,stderr,gap_exact,verdict\n";
    for (const EpsNashReport& r : rows) {
        out += std::to_string(r.N) + "," + fmt_double(r.eps_bound) + "," +
               fmt_double(r.eps_tight) + "," + fmt_double(r.mc_stderr) + "," +
               fmt_double(r.gap_exact) + "," + (r.verdict ? "true" : "false") + "\n";
    }
    return out;
}

inline std::string csv_mfe_trace(const std::vector<MfeTraceRow>& trace) {
    std::string out = "iter,consistency_residual,optimality_gap,b_mass_defect,theta\n";
    for (const MfeTraceRow& r : trace) {
        out += std::to_string(r.iter) + "," + fmt_double(r.consistency) + "," +
               fmt_double(r.gap) + "," + fmt_double(r.b_mass) + "," + fmt_double(r.theta) + "\n";
    }
    return out;
}

// Simulation trace: TV column against a reference measure (usually mu*).
inline std::string csv_sim_trace(const std::vector<SimTraceRow>& trace, const Vec& mu_ref) {
    std::string out = "t,tv_to_mu_star,running_avg_cost_agent1\n";
    for (const SimTraceRow& r : trace) {
        double tv = 0.0;
        for (std::size_t y = 0; y < mu_ref.size(); ++y) tv += std::abs(r.empirical[y] - mu_ref[y]);
        out += std::to_string(r.t) + "," + fmt_double(tv) + "," +
               fmt_double(r.running_avg_cost_agent1) + "\n";
    }
    return out;
}

}  // namespace mfg::io
