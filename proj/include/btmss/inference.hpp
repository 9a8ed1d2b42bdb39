#pragma once
//
// Source-parameter inference from shot-noise-normalised intensity noises.
//

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btmss/differential_evolution.hpp"
#include "btmss/source.hpp"

namespace btmss {

enum class NoiseChannel { diff, probe, conj };

std::string_view to_string(NoiseChannel channel);
NoiseChannel parse_channel(std::string_view name);

struct NoiseMeasurement {
  NoiseChannel channel = NoiseChannel::diff;
  double value = 1.0;     // normalised noise, shot-noise units
  double variance = 0.0;  // variance of `value`
  double eta = 1.0;       // total transmission between source and detector
};

void validate(const NoiseMeasurement& m);

/// N_0 = (N_m - (1 - eta)) / eta. Throws std::domain_error("backtracked noise non-physical") when
/// the result is not positive.
double backtrack_noise(double measured, double eta);

/// Backtracks value and variance (variance / eta^2) to the source; the returned eta is 1.
NoiseMeasurement backtrack(const NoiseMeasurement& m);

enum class NoiseModel { numeric_oracle, printed_formulas };
enum class ChiScale { log10, linear };

std::string_view to_string(NoiseModel model);
std::string_view to_string(ChiScale scale);

struct ChiSquareOptions {
  NoiseModel model = NoiseModel::numeric_oracle;
  ChiScale scale = ChiScale::log10;
  double source_rel_tol = 1e-9;
};

/// Model prediction for the three source-level noises.
NoiseTriple theory_noises(double s, double T_a, const ChiSquareOptions& options = {});

/// Sum over channels of (measurement - theory)^2 / variance. Measurements are source-level
/// (already backtracked). In log10 scale the variance is propagated as Var / (N ln10)^2 using the
/// measured N. Needs exactly one measurement per channel.
double chi_square(std::span<const NoiseMeasurement> measurements, double s, double T_a,
                  const ChiSquareOptions& options = {});

struct ParamUncertainty {
  double minus = 0.0;       // distance from the optimum to the contour below
  double plus = 0.0;        // distance above
  bool bracketed_minus = true;
  bool bracketed_plus = true;

  /// Half-width of the region; the bracketed side alone when only one side closes.
  double sigma() const;
};

struct UncertaintyOptions {
  std::uint64_t directions = 128;
  int bisection_steps = 60;
};

/// Radial search around `optimum` for the contour chi2 = chi2_min + chi2_min / dof, within
/// `bounds`. Returns the per-parameter extent of that contour. Directions are uniform in the
/// bounds-normalised parameter space. Sides that reach a bound are flagged as not bracketed.
std::vector<ParamUncertainty> uncertainty_by_chi2_doubling(
    const Objective& objective, std::span<const double> optimum, double chi2_min, int dof,
    std::span<const ParamBounds> bounds, const UncertaintyOptions& options = {});

struct FitConfig {
  DEConfig de;                  // bounds default to 0 <= s <= 3, 0.5 <= T_a <= 1 when empty
  ChiSquareOptions chi;
  UncertaintyOptions uncertainty;
  bool compute_uncertainty = true;
};

FitConfig default_fit_config();

struct FitResult {
  double s = 0.0;
  double sigma_s = 0.0;
  double T_a = 0.0;
  double sigma_Ta = 0.0;
  double chi2 = 0.0;
  std::uint64_t generations = 0;
  double population_final_spread = 0.0;  // largest per-parameter standard deviation
  bool converged = false;
  NoiseModel model = NoiseModel::numeric_oracle;
  std::array<NoiseMeasurement, 3> source_noises{};  // backtracked inputs, diff/probe/conj order
  std::vector<std::string> warnings;
};

/// Backtracks each measurement, minimises chi_square over (s, T_a) by differential evolution and
/// attaches chi2-doubling uncertainties (dof = 3 - 2 = 1).
FitResult fit_source(std::span<const NoiseMeasurement> raw, const FitConfig& config);

/// Noise triple as it would be measured after loss eta on every channel, with the given variances.
std::array<NoiseMeasurement, 3> synthetic_measurements(const NoiseTriple& source, double eta,
                                                       const std::array<double, 3>& variances);

}  // namespace btmss
