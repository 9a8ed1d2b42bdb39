#include "btmss/differential_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace btmss {

namespace {

double finite_or_inf(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

void evaluate_all(const Objective& objective, const std::vector<std::vector<double>>& points,
                  std::vector<double>& values, unsigned workers) {
  const std::size_t n = points.size();
  values.assign(n, 0.0);
  workers = std::max(1U, workers);
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) values[k] = objective(points[k]);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t k = lo; k < hi; ++k) values[k] = objective(points[k]);
    });
  }
}

std::size_t best_index(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] < values[best]) best = k;
  }
  return best;
}

std::vector<double> spread(const std::vector<std::vector<double>>& pop) {
  const std::size_t dim = pop.front().size();
  const double n = static_cast<double>(pop.size());
  std::vector<double> out(dim, 0.0);
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& p : pop) mean += p[d];
    mean /= n;
    double ss = 0.0;
    for (const auto& p : pop) ss += (p[d] - mean) * (p[d] - mean);
    out[d] = std::sqrt(ss / n);
  }
  return out;
}

}  // namespace

void validate(const DEConfig& config) {
  if (config.population < 4) throw std::invalid_argument("population must be at least 4");
  if (config.bounds.empty()) throw std::invalid_argument("at least one parameter is required");
  for (const auto& b : config.bounds) {
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
      throw std::invalid_argument("each parameter needs finite bounds with lo < hi");
    }
  }
  if (!(config.acceptance_prob >= 0.0 && config.acceptance_prob <= 1.0)) {
    throw std::invalid_argument("acceptance probability must lie in [0,1]");
  }
  if (!(config.spread_tol > 0.0)) throw std::invalid_argument("spread tolerance must be positive");
}

DEResult differential_evolution(const Objective& objective, const DEConfig& config) {
  validate(config);
  const std::size_t dim = config.bounds.size();
  const auto pop_size = static_cast<std::size_t>(config.population);

  double diagonal = 0.0;
  for (const auto& b : config.bounds) diagonal += (b.hi - b.lo) * (b.hi - b.lo);
  diagonal = std::sqrt(diagonal);

  std::mt19937_64 rng(config.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);

  DEResult result;
  auto record = [&](const std::vector<std::vector<double>>& pts, const std::vector<double>& vals) {
    result.evaluations += pts.size();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!std::isfinite(vals[k])) ++result.discarded;
      if (config.record_history) result.history.push_back({pts[k], vals[k]});
    }
  };

  std::vector<std::vector<double>> pop(pop_size, std::vector<double>(dim));
  for (auto& p : pop) {
    for (std::size_t d = 0; d < dim; ++d) {
      const auto& b = config.bounds[d];
      p[d] = b.lo + (b.hi - b.lo) * unit(rng);
    }
  }
  std::vector<double> values;
  evaluate_all(objective, pop, values, config.workers);
  record(pop, values);
  for (double& v : values) v = finite_or_inf(v);

  std::vector<std::vector<double>> candidates;
  std::vector<std::size_t> targets;
  std::vector<char> accept;
  std::vector<double> cand_values;

  auto spread_ok = [&] {
    result.final_spread = spread(pop);
    return std::all_of(result.final_spread.begin(), result.final_spread.end(),
                       [&](double s) { return s < config.spread_tol; });
  };

  while (!(result.converged = spread_ok()) && result.generations < config.max_generations) {
    const std::size_t o = best_index(values);
    candidates.clear();
    targets.clear();
    accept.clear();
    for (std::size_t i = 0; i < pop_size; ++i) {
      if (i == o) continue;
      std::size_t j, k;
      do { j = pick(rng); } while (j == o || j == i);
      do { k = pick(rng); } while (k == o || k == i || k == j);
      std::vector<double> c(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        const auto& b = config.bounds[d];
        c[d] = std::clamp(pop[o][d] + (pop[k][d] - pop[j][d]) / diagonal, b.lo, b.hi);
      }
      candidates.push_back(std::move(c));
      targets.push_back(i);
      accept.push_back(unit(rng) < config.acceptance_prob ? 1 : 0);
    }

    evaluate_all(objective, candidates, cand_values, config.workers);
    record(candidates, cand_values);

    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double v = finite_or_inf(cand_values[c]);
      const std::size_t i = targets[c];
      if (accept[c] && v < values[i]) {
        pop[i] = std::move(candidates[c]);
        values[i] = v;
      }
    }
    ++result.generations;
  }

  const std::size_t best = best_index(values);
  result.best = pop[best];
  result.best_value = values[best];
  return result;
}

}  // namespace btmss
