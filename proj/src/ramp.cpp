#include "btmss/ramp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace btmss {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

std::mt19937_64 bin_engine(std::uint64_t seed, std::uint64_t trace, std::uint64_t bin) {
  return std::mt19937_64(splitmix64(splitmix64(seed ^ splitmix64(trace)) + bin));
}

// Analyzer power in one bin: |slope * dT + n|^2, n complex Gaussian with E|n|^2 = variance.
double bin_power(std::mt19937_64& rng, double amplitude, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double i = amplitude + normal(rng);
  const double q = normal(rng);
  return i * i + q * q;
}

template <typename F>
void parallel_for(std::uint64_t n, unsigned workers, F&& body) {
  workers = std::max(1U, workers);
  if (workers == 1 || n < 2) {
    for (std::uint64_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::vector<std::jthread> pool;
  const std::uint64_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = w * chunk;
    const std::uint64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::uint64_t k = lo; k < hi; ++k) body(k);
    });
  }
}

}  // namespace

void validate(const MeasurementPlan& plan) {
  validate(plan.filter);
  if (plan.trials < 3) throw std::invalid_argument("ramp needs at least 3 bins");
  if (!(plan.ramp_duration > 0.0) || !(plan.hold_duration >= 0.0)) {
    throw std::invalid_argument("ramp and hold durations must be positive");
  }
  if (!(plan.estimator.g >= 0.0)) throw std::invalid_argument("estimator gain must be >= 0");
  if (!(plan.estimator.slope > 0.0)) throw std::domain_error("estimator slope must be positive");
  if (!(plan.estimator.noise_variance > 0.0)) {
    throw std::domain_error("estimator noise variance must be positive");
  }
  const double spacing = plan.ramp_duration / static_cast<double>(plan.trials);
  if (spacing < effective_time(plan.filter)) {
    throw std::invalid_argument("bins closer than the analyzer integration time are correlated");
  }
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("line fit needs >= 2 points");
  if (!weights.empty() && weights.size() != x.size()) {
    throw std::invalid_argument("one weight per point is required");
  }
  auto w = [&](std::size_t k) { return weights.empty() ? 1.0 : weights[k]; };
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sw += w(k);
    mx += w(k) * x[k];
    my += w(k) * y[k];
  }
  mx /= sw;
  my /= sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += w(k) * (x[k] - mx) * (x[k] - mx);
    sxy += w(k) * (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("line fit needs distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

SnrCrossing snr_crossing(std::span<const double> modulation_variance, std::span<const double> snr) {
  const double x_max = *std::max_element(modulation_variance.begin(), modulation_variance.end());

  auto crossing = [&](const LineFit& f) {
    const double v = (1.0 - f.intercept) / f.slope;
    if (!(f.slope > 0.0) || !(v > 0.0) || v > x_max) {
      throw std::domain_error("SNR=1 not bracketed");
    }
    return v;
  };

  const LineFit coarse = fit_line(modulation_variance, snr);
  crossing(coarse);

  // Var(SNR_k) ~ 1 + 2 SNR_k for a noncentral exponential bin power.
  std::vector<double> wx, wy, ww;
  for (std::size_t k = 0; k < snr.size(); ++k) {
    const double predicted = coarse.slope * modulation_variance[k] + coarse.intercept;
    if (predicted >= 0.2 && predicted <= 5.0) {
      wx.push_back(modulation_variance[k]);
      wy.push_back(snr[k]);
      ww.push_back(1.0 / (1.0 + 2.0 * predicted));
    }
  }
  if (wx.size() < 3) throw std::domain_error("SNR=1 not bracketed");
  const LineFit fine = fit_line(wx, wy, ww);
  return {std::sqrt(crossing(fine)), fine, wx.size()};
}

RampResult snr_ramp_simulate(const MeasurementPlan& plan, const RampProfile& profile) {
  validate(plan);
  if (!(profile.start_delta_T > 0.0)) throw std::invalid_argument("ramp must start above zero");

  const std::uint64_t ramp_bins = plan.trials;
  const double spacing = plan.ramp_duration / static_cast<double>(ramp_bins);
  const auto hold_bins = static_cast<std::uint64_t>(std::llround(plan.hold_duration / spacing));
  const std::uint64_t total = hold_bins + ramp_bins;

  RampResult out;
  out.time.resize(total);
  out.modulation.resize(total);
  for (std::uint64_t k = 0; k < total; ++k) {
    out.time[k] = (static_cast<double>(k) + 0.5) * spacing;
    const double fraction =
        k < hold_bins ? 1.0
                      : 1.0 - static_cast<double>(k - hold_bins) / static_cast<double>(ramp_bins - 1);
    out.modulation[k] = profile.start_delta_T * fraction;
  }

  const double variance = plan.estimator.noise_variance;
  const double slope = plan.estimator.slope;
  std::vector<double> on(total), off(total);
  parallel_for(total, plan.workers, [&](std::uint64_t k) {
    auto rng_on = bin_engine(plan.rng_seed, 0, k);
    auto rng_off = bin_engine(plan.rng_seed, 1, k);
    on[k] = bin_power(rng_on, slope * out.modulation[k], variance);
    off[k] = bin_power(rng_off, 0.0, variance);
  });

  double noise = 0.0;
  for (double o : off) noise += o;
  noise /= static_cast<double>(total);

  out.snr_trace.resize(total);
  for (std::uint64_t k = 0; k < total; ++k) out.snr_trace[k] = (on[k] - noise) / noise;

  std::vector<double> x, y;
  x.reserve(ramp_bins);
  y.reserve(ramp_bins);
  for (std::uint64_t k = hold_bins; k < total; ++k) {
    x.push_back(out.modulation[k] * out.modulation[k]);
    y.push_back(out.snr_trace[k]);
  }
  const SnrCrossing c = snr_crossing(x, y);
  out.delta_T_at_snr1 = c.delta_T;
  out.fit_slope = c.fit.slope;
  out.fit_intercept = c.fit.intercept;
  out.fit_points = c.points;
  return out;
}

}  // namespace btmss
