#pragma once
//
// Monte Carlo emulation of the SNR-ramp measurement: a transmission modulation is ramped linearly
// to zero while the analyzer records the estimator power; the point where the fitted SNR crosses
// one gives the transmission standard deviation.
//

#include <cstdint>
#include <span>
#include <vector>

#include "btmss/estimator.hpp"
#include "btmss/spectrum_analyzer.hpp"

namespace btmss {

struct MeasurementPlan {
  EstimatorModel estimator;         // carries the electronic gain g and the photon-unit noise
  double modulation_freq = 1.5e6;   // Hz, analyzer centre frequency
  double ramp_duration = 14.0;      // s, linear ramp to zero
  double hold_duration = 2.0;       // s, fixed amplitude before the ramp, excluded from the fit
  FilterModel filter;               // sets the per-bin integration time
  std::uint64_t trials = 10000;     // analyzer bins along the ramp
  std::uint64_t rng_seed = 1;
  unsigned workers = 1;
};

void validate(const MeasurementPlan& plan);

/// Modulation standard deviation at the start of the ramp (the ramp ends at zero).
struct RampProfile {
  double start_delta_T = 0.0;
};

struct RampResult {
  double delta_T_at_snr1 = 0.0;
  double fit_slope = 0.0;      // SNR per unit modulation variance
  double fit_intercept = 0.0;
  std::uint64_t fit_points = 0;
  std::vector<double> time;        // s, bin centres (hold then ramp)
  std::vector<double> modulation;  // Delta T per bin
  std::vector<double> snr_trace;   // power SNR per bin
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least squares y = slope x + intercept, weighted when `weights` is non-empty.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights = {});

struct SnrCrossing {
  double delta_T = 0.0;
  LineFit fit;
  std::uint64_t points = 0;
};

/// Fits SNR against modulation variance, first over every point and then, with inverse-variance
/// weights, over the window where the first fit predicts SNR in [0.2, 5]. Returns sqrt of the
/// variance where the refit crosses SNR = 1.
/// Throws std::domain_error("SNR=1 not bracketed") if the crossing lies outside the data.
SnrCrossing snr_crossing(std::span<const double> modulation_variance, std::span<const double> snr);

/// Synthesises analyzer bins with the ramp on and off (independent complex Gaussian noise of total
/// variance Var(n_p - g n_c); modulation phasor slope * Delta T), forms the SNR trace and fits it.
/// Bin k draws from a stream keyed on (rng_seed, trace, k), so output is independent of workers.
RampResult snr_ramp_simulate(const MeasurementPlan& plan, const RampProfile& profile);

}  // namespace btmss
