#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/rng.hpp"

// Shared test models. m1/m2/m2_tensor mirror models/*.json in the repo root;
// test_json_io checks that correspondence field by field.
namespace fixtures {

using mfg::AffineKernel;
using mfg::CostSpec;
using mfg::Cube;
using mfg::DriftCertificate;
using mfg::Mat;
using mfg::MFGModel;
using mfg::MinorizationMeasure;
using mfg::ProbVector;
using mfg::Quad;
using mfg::TensorKernel;
using mfg::Vec;

// 2 states, 2 actions, tensor kernel, decoupled cost: a plain average-cost
// MDP dressed as a game. Every equilibrium quantity is checkable by hand.
inline MFGModel m1() {
    Cube p0 = {{{0.8, 0.2}, {0.3, 0.7}},
               {{0.6, 0.4}, {0.2, 0.8}}};
    CostSpec cost;
    cost.c0 = {{1.0, 0.3}, {0.5, 2.0}};
    return MFGModel(2, 2, TensorKernel{p0}, cost, MinorizationMeasure({0.15, 0.15}),
                    DriftCertificate{0.75, {1.0, 1.0}}, ProbVector());
}

inline Cube m2_p0() {
    return {{{0.7, 0.2, 0.1}, {0.2, 0.6, 0.2}},
            {{0.2, 0.6, 0.2}, {0.1, 0.3, 0.6}},
            {{0.1, 0.2, 0.7}, {0.5, 0.3, 0.2}}};
}

inline CostSpec m2_cost() {
    CostSpec cost;
    cost.c0 = {{0.8, 1.2}, {0.9, 0.7}, {1.0, 0.6}};
    // r[x][0] rewards crowding at the own state, r[x][1] at the next state.
    cost.r = Cube(3, Mat(2, Vec(3, 0.0)));
    for (int x = 0; x < 3; ++x) {
        cost.r[x][0][x] = 0.5;
        cost.r[x][1][(x + 1) % 3] = 0.5;
    }
    return cost;
}

// 3 states, 2 actions, affine-coupled kernel (kappa = 0.3) and coupled cost.
// The main exercise model for the equilibrium loop.
inline MFGModel m2() {
    AffineKernel ak;
    ak.kappa = 0.3;
    ak.p0 = m2_p0();
    ak.q = Quad(3, Cube(2, Mat(3)));
    for (int x = 0; x < 3; ++x)
        for (int a = 0; a < 2; ++a)
            for (int z = 0; z < 3; ++z) {
                Vec row(3, 0.2);
                row[z] = 0.6;
                ak.q[x][a][z] = row;
            }
    return MFGModel(3, 2, ak, m2_cost(), MinorizationMeasure({0.1, 0.1, 0.1}),
                    DriftCertificate{0.8, {1.0, 1.0, 1.0}}, ProbVector());
}

// m2 with the coupling stripped from the kernel (cost coupling kept):
// population-independent transitions as the finite-N machinery requires.
inline MFGModel m2_tensor() {
    return MFGModel(3, 2, TensorKernel{m2_p0()}, m2_cost(), MinorizationMeasure({0.1, 0.1, 0.1}),
                    DriftCertificate{0.8, {1.0, 1.0, 1.0}}, ProbVector());
}

// Fully symmetric under swapping the two states, so mu* = (1/2, 1/2).
inline MFGModel symmetric2() {
    AffineKernel ak;
    ak.kappa = 0.4;
    ak.p0 = {{{0.7, 0.3}}, {{0.3, 0.7}}};
    ak.q = Quad(2, Cube(1, Mat(2)));
    ak.q[0][0][0] = {0.6, 0.4};
    ak.q[0][0][1] = {0.5, 0.5};
    ak.q[1][0][0] = {0.5, 0.5};
    ak.q[1][0][1] = {0.4, 0.6};
    CostSpec cost;
    cost.c0 = {{1.0}, {1.0}};
    cost.r = {{{0.2, 0.1}}, {{0.1, 0.2}}};
    return MFGModel(2, 1, ak, cost, MinorizationMeasure({0.2, 0.2}),
                    DriftCertificate{0.7, {1.0, 1.0}}, ProbVector());
}

// Anti-coordination: the cheap action is the one the crowd avoids, and the
// kernel steers toward the chosen action's state. Designed to defeat the
// undamped fixed-point loop and (empirically) every deterministic policy.
inline MFGModel oscillating() {
    Cube p0 = {{{0.8, 0.2}, {0.2, 0.8}},
               {{0.8, 0.2}, {0.2, 0.8}}};
    CostSpec cost;
    cost.c0 = {{0.0, 0.05}, {0.0, 0.05}};
    cost.r = Cube(2, Mat(2, Vec(2, 0.0)));
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a) cost.r[x][a][a] = 1.0;
    return MFGModel(2, 2, TensorKernel{p0}, cost, MinorizationMeasure({0.15, 0.15}),
                    DriftCertificate{0.8, {1.0, 1.0}}, ProbVector());
}

// One state, two bitwise-identical actions: equilibria come in tie pairs.
inline MFGModel dup_action() {
    Cube p0 = {{{1.0}, {1.0}}};
    CostSpec cost;
    cost.c0 = {{0.4, 0.4}};
    return MFGModel(1, 2, TensorKernel{p0}, cost, MinorizationMeasure({0.5}),
                    DriftCertificate{0.75, {1.0}}, ProbVector());
}

// One state, distinct action costs: h = min_a c / mass, rho = min_a c.
inline MFGModel one_state() {
    Cube p0 = {{{1.0}, {1.0}}};
    CostSpec cost;
    cost.c0 = {{0.7, 0.4}};
    return MFGModel(1, 2, TensorKernel{p0}, cost, MinorizationMeasure({0.4}),
                    DriftCertificate{0.75, {1.0}}, ProbVector());
}

// Cost and kernel ignore the action: a single uncontrolled chain.
inline MFGModel uncontrolled() {
    Cube p0(3, Mat(2));
    Mat rows = {{0.5, 0.3, 0.2}, {0.2, 0.5, 0.3}, {0.3, 0.2, 0.5}};
    for (int x = 0; x < 3; ++x)
        for (int a = 0; a < 2; ++a) p0[x][a] = rows[x];
    CostSpec cost;
    cost.c0 = {{0.6, 0.6}, {1.1, 1.1}, {0.2, 0.2}};
    return MFGModel(3, 2, TensorKernel{p0}, cost, MinorizationMeasure({0.15, 0.1, 0.1}),
                    DriftCertificate{0.7, {1.0, 1.0, 1.0}}, ProbVector());
}

// Uniform-on-two-states target with a single coupled cost row r = (0, 1):
// the modulus is exactly omega(t) = min(t/2, 1) and the epsilon-bound first
// term has a closed binomial form.
inline MFGModel binomial_probe() {
    Cube p0 = {{{0.5, 0.5}}, {{0.5, 0.5}}};
    CostSpec cost;
    cost.c0 = {{0.5}, {0.5}};
    cost.r = {{{0.0, 1.0}}, {{0.0, 1.0}}};
    return MFGModel(2, 1, TensorKernel{p0}, cost, MinorizationMeasure({0.3, 0.3}),
                    DriftCertificate{0.6, {1.0, 1.0}}, ProbVector());
}

struct Named {
    std::string name;
    MFGModel model;
};

// The fixture battery swept by the cross-cutting properties (optimality,
// membership, continuity, effective-cost exactness).
inline std::vector<Named> all() {
    return {{"m1", m1()},
            {"m2", m2()},
            {"m2_tensor", m2_tensor()},
            {"symmetric2", symmetric2()},
            {"oscillating", oscillating()},
            {"dup_action", dup_action()},
            {"one_state", one_state()},
            {"uncontrolled", uncontrolled()},
            {"binomial_probe", binomial_probe()}};
}

// Random minorized model: rows are lambda + (1-mass)*Dirichlet, so the
// minorization margin is strict with probability one.
inline MFGModel random_model(int n, int m, double mass, bool affine, std::uint64_t seed) {
    const mfg::rng::Key root = mfg::rng::Key::root(seed);
    std::uint64_t counter = 0;
    auto dirichlet_row = [&](Vec& out) {
        double sum = 0.0;
        for (int y = 0; y < n; ++y) {
            out[y] = -std::log(1.0 - root.u01(counter++));
            sum += out[y];
        }
        for (double& v : out) v /= sum;
    };
    const Vec lambda(n, mass / n);
    auto minorized_row = [&]() {
        Vec d(n);
        dirichlet_row(d);
        for (int y = 0; y < n; ++y) d[y] = lambda[y] + (1.0 - mass) * d[y];
        return d;
    };

    Cube p0(n, Mat(m));
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < m; ++a) p0[x][a] = minorized_row();

    CostSpec cost;
    cost.c0.assign(n, Vec(m));
    cost.r.assign(n, Mat(m, Vec(n)));
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < m; ++a) {
            cost.c0[x][a] = 2.0 * root.u01(counter++);
            for (int z = 0; z < n; ++z) cost.r[x][a][z] = 0.5 * root.u01(counter++);
        }

    MinorizationMeasure lam{Vec(lambda)};
    DriftCertificate drift{1.0 - mass / 2.0, Vec(n, 1.0)};
    if (!affine) return MFGModel(n, m, TensorKernel{p0}, cost, lam, drift, ProbVector());

    AffineKernel ak;
    ak.kappa = 0.25;
    ak.p0 = p0;
    ak.q.assign(n, Cube(m, Mat(n)));
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < m; ++a)
            for (int z = 0; z < n; ++z) ak.q[x][a][z] = minorized_row();
    return MFGModel(n, m, ak, cost, lam, drift, ProbVector());
}

}  // namespace fixtures
