#include "btmss/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace btmss {

namespace {

double channel_value(const NoiseTriple& n, NoiseChannel c) {
  switch (c) {
    case NoiseChannel::diff: return n.diff;
    case NoiseChannel::probe: return n.probe;
    case NoiseChannel::conj: return n.conj;
  }
  return 0.0;
}

std::array<const NoiseMeasurement*, 3> by_channel(std::span<const NoiseMeasurement> ms) {
  std::array<const NoiseMeasurement*, 3> slots{};
  for (const auto& m : ms) {
    auto& slot = slots[static_cast<std::size_t>(m.channel)];
    if (slot != nullptr) {
      throw std::invalid_argument("duplicate measurement for channel " +
                                  std::string(to_string(m.channel)));
    }
    slot = &m;
  }
  for (std::size_t c = 0; c < 3; ++c) {
    if (slots[c] == nullptr) {
      throw std::invalid_argument("missing measurement for channel " +
                                  std::string(to_string(static_cast<NoiseChannel>(c))));
    }
  }
  return slots;
}

}  // namespace

std::string_view to_string(NoiseChannel channel) {
  switch (channel) {
    case NoiseChannel::diff: return "diff";
    case NoiseChannel::probe: return "probe";
    case NoiseChannel::conj: return "conj";
  }
  return "unknown";
}

NoiseChannel parse_channel(std::string_view name) {
  if (name == "diff") return NoiseChannel::diff;
  if (name == "probe") return NoiseChannel::probe;
  if (name == "conj") return NoiseChannel::conj;
  throw std::invalid_argument("unknown noise channel: " + std::string(name));
}

std::string_view to_string(NoiseModel model) {
  return model == NoiseModel::numeric_oracle ? "numeric_oracle" : "printed_formulas";
}

std::string_view to_string(ChiScale scale) { return scale == ChiScale::log10 ? "log10" : "linear"; }

void validate(const NoiseMeasurement& m) {
  if (!(m.value > 0.0)) throw std::domain_error("normalized noise must be positive");
  if (!(m.variance > 0.0)) throw std::domain_error("measurement variance must be positive");
  if (!(m.eta > 0.0 && m.eta <= 1.0)) throw std::domain_error("transmission eta must lie in (0,1]");
}

double backtrack_noise(double measured, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("transmission eta must lie in (0,1]");
  const double n0 = (measured - (1.0 - eta)) / eta;
  if (!(n0 > 0.0)) throw std::domain_error("backtracked noise non-physical");
  return n0;
}

NoiseMeasurement backtrack(const NoiseMeasurement& m) {
  validate(m);
  return {m.channel, backtrack_noise(m.value, m.eta), m.variance / (m.eta * m.eta), 1.0};
}

NoiseTriple theory_noises(double s, double T_a, const ChiSquareOptions& options) {
  if (options.model == NoiseModel::printed_formulas) return analytic_noises(s, T_a);
  return source_noises(s, T_a, options.source_rel_tol);
}

double chi_square(std::span<const NoiseMeasurement> measurements, double s, double T_a,
                  const ChiSquareOptions& options) {
  const auto slots = by_channel(measurements);
  const NoiseTriple theory = theory_noises(s, T_a, options);
  double chi2 = 0.0;
  for (const NoiseMeasurement* m : slots) {
    if (!(m->variance > 0.0)) throw std::domain_error("measurement variance must be positive");
    const double t = channel_value(theory, m->channel);
    if (options.scale == ChiScale::log10) {
      const double sd = std::sqrt(m->variance) / (m->value * std::numbers::ln10);
      const double r = (std::log10(m->value) - std::log10(t)) / sd;
      chi2 += r * r;
    } else {
      const double r = m->value - t;
      chi2 += r * r / m->variance;
    }
  }
  return chi2;
}

double ParamUncertainty::sigma() const {
  if (bracketed_minus && bracketed_plus) return 0.5 * (minus + plus);
  if (bracketed_minus) return minus;
  if (bracketed_plus) return plus;
  return 0.5 * (minus + plus);
}

std::vector<ParamUncertainty> uncertainty_by_chi2_doubling(
    const Objective& objective, std::span<const double> optimum, double chi2_min, int dof,
    std::span<const ParamBounds> bounds, const UncertaintyOptions& options) {
  if (dof < 1) throw std::invalid_argument("degrees of freedom must be >= 1");
  const std::size_t dim = optimum.size();
  if (bounds.size() != dim || dim == 0) throw std::invalid_argument("bounds must match optimum");
  const double threshold = chi2_min + chi2_min / dof;

  // Unit directions in bounds-normalised space: a circle in 2-D, the coordinate axes otherwise.
  std::vector<std::vector<double>> dirs;
  if (dim == 2) {
    const std::uint64_t m = std::max<std::uint64_t>(4, options.directions / 4 * 4);
    for (std::uint64_t k = 0; k < m; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
      dirs.push_back({std::cos(a), std::sin(a)});
    }
  } else {
    for (std::size_t d = 0; d < dim; ++d) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> v(dim, 0.0);
        v[d] = sign;
        dirs.push_back(std::move(v));
      }
    }
  }

  std::vector<ParamUncertainty> out(dim);
  std::vector<double> x(dim);
  auto point_at = [&](const std::vector<double>& dir, double r) {
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = optimum[d] + r * dir[d] * (bounds[d].hi - bounds[d].lo);
    }
    return objective(x);
  };

  for (const auto& dir : dirs) {
    double r_max = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < dim; ++d) {
      const double span = bounds[d].hi - bounds[d].lo;
      if (dir[d] > 1e-12) r_max = std::min(r_max, (bounds[d].hi - optimum[d]) / (span * dir[d]));
      if (dir[d] < -1e-12) r_max = std::min(r_max, (bounds[d].lo - optimum[d]) / (span * dir[d]));
    }
    r_max = std::max(r_max, 0.0);

    double below = 0.0;
    double above = std::min(1e-6, r_max);
    bool bracketed = false;
    while (true) {
      const double v = point_at(dir, above);
      if (std::isfinite(v) && v >= threshold) {
        bracketed = true;
        break;
      }
      if (above >= r_max) break;
      below = above;
      above = std::min(2.0 * above, r_max);
    }
    double r = above;
    if (bracketed) {
      for (int it = 0; it < options.bisection_steps; ++it) {
        const double mid = 0.5 * (below + above);
        const double v = point_at(dir, mid);
        if (std::isfinite(v) && v >= threshold) {
          above = mid;
        } else {
          below = mid;
        }
      }
      r = 0.5 * (below + above);
    }

    for (std::size_t d = 0; d < dim; ++d) {
      const double delta = r * dir[d] * (bounds[d].hi - bounds[d].lo);
      const bool on_axis = std::abs(std::abs(dir[d]) - 1.0) < 1e-12;
      if (delta > 0.0) {
        out[d].plus = std::max(out[d].plus, delta);
        if (on_axis && !bracketed) out[d].bracketed_plus = false;
      } else if (delta < 0.0) {
        out[d].minus = std::max(out[d].minus, -delta);
        if (on_axis && !bracketed) out[d].bracketed_minus = false;
      } else if (on_axis && !bracketed) {
        (dir[d] > 0.0 ? out[d].bracketed_plus : out[d].bracketed_minus) = false;
      }
    }
  }
  return out;
}

FitConfig default_fit_config() {
  FitConfig c;
  c.de.population = 500;
  c.de.bounds = {{0.0, 3.0}, {0.5, 1.0}};
  return c;
}

FitResult fit_source(std::span<const NoiseMeasurement> raw, const FitConfig& config) {
  const auto slots = by_channel(raw);

  FitResult result;
  result.model = config.chi.model;
  for (std::size_t c = 0; c < 3; ++c) result.source_noises[c] = backtrack(*slots[c]);

  DEConfig de = config.de;
  if (de.bounds.empty()) de.bounds = {{0.0, 3.0}, {0.5, 1.0}};
  if (de.bounds.size() != 2) throw std::invalid_argument("source fit has exactly two parameters");

  const auto noises = result.source_noises;
  const ChiSquareOptions chi = config.chi;
  const Objective objective = [noises, chi](std::span<const double> x) {
    try {
      return chi_square(noises, x[0], x[1], chi);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  const DEResult best = differential_evolution(objective, de);
  result.s = best.best[0];
  result.T_a = best.best[1];
  result.chi2 = best.best_value;
  result.generations = best.generations;
  result.converged = best.converged;
  result.population_final_spread =
      *std::max_element(best.final_spread.begin(), best.final_spread.end());
  if (!best.converged) result.warnings.push_back("population spread did not reach spread_tol");
  if (best.discarded > 0) {
    result.warnings.push_back(std::to_string(best.discarded) +
                              " candidates had a non-finite chi2 and were discarded");
  }

  if (config.compute_uncertainty) {
    if (result.chi2 == 0.0) {
      result.warnings.push_back("chi2 minimum is zero; the doubling contour is degenerate");
    }
    const auto u = uncertainty_by_chi2_doubling(objective, best.best, result.chi2, 1, de.bounds,
                                                config.uncertainty);
    result.sigma_s = u[0].sigma();
    result.sigma_Ta = u[1].sigma();
    const char* names[] = {"s", "T_a"};
    for (std::size_t d = 0; d < 2; ++d) {
      if (!u[d].bracketed_minus || !u[d].bracketed_plus) {
        result.warnings.push_back(std::string("uncertainty for ") + names[d] +
                                  " is one-sided: contour reaches the parameter bound");
      }
    }
  }
  return result;
}

std::array<NoiseMeasurement, 3> synthetic_measurements(const NoiseTriple& source, double eta,
                                                       const std::array<double, 3>& variances) {
  std::array<NoiseMeasurement, 3> out;
  const std::array<double, 3> n0 = {source.diff, source.probe, source.conj};
  for (std::size_t c = 0; c < 3; ++c) {
    out[c] = {static_cast<NoiseChannel>(c), eta * n0[c] + (1.0 - eta), variances[c], eta};
  }
  return out;
}

}  // namespace btmss
