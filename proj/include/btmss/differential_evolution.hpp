#pragma once
//
// Best-anchored differential evolution with bound clamping and probabilistic acceptance.
//
// Each generation takes the current best point P_o and, for every other member P_i, draws two
// further distinct members P_j, P_k. The candidate is P_o + (P_k - P_j) / |diagonal of the bounds
// box|, clamped to the box. It replaces P_i when it is strictly better, but only with probability
// acceptance_prob. Iteration stops once every parameter's population standard deviation is below
// spread_tol, or after max_generations.
//

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace btmss {

struct ParamBounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct DEConfig {
  std::uint64_t population = 500;
  std::vector<ParamBounds> bounds;
  double acceptance_prob = 0.7;
  double spread_tol = 1e-6;
  std::uint64_t max_generations = 2000;
  std::uint64_t rng_seed = 1;
  unsigned workers = 1;
  bool record_history = true;
};

void validate(const DEConfig& config);

struct EvaluatedPoint {
  std::vector<double> x;
  double value = 0.0;
};

struct DEResult {
  std::vector<double> best;
  double best_value = 0.0;
  std::uint64_t generations = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t discarded = 0;         // candidates with a non-finite objective
  bool converged = false;              // spread criterion met
  std::vector<double> final_spread;    // population standard deviation per parameter
  std::vector<EvaluatedPoint> history; // every evaluated point, in evaluation order
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimises `objective`. Deterministic for a fixed rng_seed; objective calls may run on
/// `workers` threads but all random draws happen on the calling thread in population order.
/// Ties for the best point go to the lowest population index.
DEResult differential_evolution(const Objective& objective, const DEConfig& config);

}  // namespace btmss
