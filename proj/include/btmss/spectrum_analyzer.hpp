#pragma once
//
// Swept spectrum-analyzer model: split, mix with quadrature LOs, RBW low-pass, square, sum.
// The RBW is the FWHM of |H(f)|^2 and H is normalised to |H(0)| = 1.
//

#include <span>
#include <string>

namespace btmss {

enum class FilterKind { gaussian, sync_tuned };

/// Which curve the RBW is the FWHM of. The analyzer convention is `power`; `amplitude` is kept to
/// show that it misses the measured 4-pole correction factor.
enum class FwhmConvention { power, amplitude };

struct FilterModel {
  FilterKind kind = FilterKind::gaussian;
  int poles = 4;          // sync_tuned only
  double rbw = 51e3;      // Hz
  FwhmConvention convention = FwhmConvention::power;
};

void validate(const FilterModel& filter);

/// Parses "gaussian", "sync4", "sync_tuned:4".
FilterModel parse_filter(const std::string& spec, double rbw);
std::string filter_name(const FilterModel& filter);

/// Corner frequency f1 of one synchronously tuned pole, |H|^2 = (1 + (f/f1)^2)^-n.
double sync_tuned_corner(const FilterModel& filter);

/// |H(f)|^2 / |H(0)|^2.
double power_response(const FilterModel& filter, double f);

/// Effective measurement time t = |H(0)|^2 / (2 * integral |H(f)|^2 df).
/// Gaussian uses the closed form sqrt(ln2/pi)/RBW; sync-tuned uses quadrature.
double effective_time(const FilterModel& filter);

/// Always by quadrature, for any filter kind. Throws std::runtime_error if the quadrature
/// error estimate exceeds 1e-10 relative.
double effective_time_quadrature(const FilterModel& filter);

struct SampledSeries {
  std::span<const double> samples;
  double sample_rate = 0.0;  // Hz
};

/// Mean analyzer output <O> for a sampled input centred at f_lo. The first 20 filter time constants
/// are discarded as settling. Throws std::domain_error if f_lo is at or above Nyquist, or the
/// series is shorter than 100 time constants.
double sa_chain_simulate(const SampledSeries& input, const FilterModel& filter, double f_lo);

/// <n> = (lambda / (h c)) (t / m) V_dc, with exact SI h and c.
double photons_from_voltage(double v_dc, double volts_per_watt, double wavelength, double t);

inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kSpeedOfLight = 299792458.0;    // m / s

}  // namespace btmss
