#pragma once

#include <cstdint>

// Central default parameters. Every CLI flag and library default routes
// through here so the documented values cannot drift apart.
namespace mfg::defaults {

// Fixed-point solvers (value iteration, power iteration, Picard loops).
inline constexpr double solver_tol = 1e-10;

// Equilibrium certificates (consistency, optimality gap, B-mass defect).
inline constexpr double certificate_tol = 1e-6;

// Damping for the outer mean-field fixed-point loop.
inline constexpr double theta = 0.5;

// Outer-loop budget for mfe_iterate.
inline constexpr int mfe_max_iter = 500;

// Picard budget for the self-coupled invariant-measure map.
inline constexpr int lambda_map_max_iter = 10000;

// Monte Carlo replications for the epsilon(N) bound.
inline constexpr int samples = 10000;

// Simulation horizon.
inline constexpr std::int64_t horizon = 100000;

// Root seed when neither flag nor environment supplies one.
inline constexpr std::uint64_t seed = 20240901u;

// Normalization: probability rows are renormalized when |sum-1| is float
// dust, and rejected as modeling bugs beyond the hard limit.
inline constexpr double renorm_tol = 1e-9;

}  // namespace mfg::defaults
