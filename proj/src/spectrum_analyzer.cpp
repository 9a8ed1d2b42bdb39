#include "btmss/spectrum_analyzer.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace btmss {

namespace {

// Half-width at half-maximum in units of the per-pole corner frequency.
double sync_half_width(const FilterModel& filter) {
  const double level = filter.convention == FwhmConvention::power ? 2.0 : 4.0;
  return std::sqrt(std::pow(level, 1.0 / filter.poles) - 1.0);
}

// Standard deviation of the Gaussian impulse response, seconds.
double gaussian_sigma_t(const FilterModel& filter) {
  const double width = filter.convention == FwhmConvention::power ? 2.0 : 4.0;
  // |H(f)| = exp(-width ln2 f^2 / RBW^2) = exp(-2 pi^2 sigma^2 f^2)
  return std::sqrt(width * std::numbers::ln2 / 2.0) / (std::numbers::pi * filter.rbw);
}

class LowPass {
 public:
  LowPass(const FilterModel& filter, double sample_rate) : filter_(filter) {
    if (filter.kind == FilterKind::sync_tuned) {
      alpha_ = 1.0 - std::exp(-2.0 * std::numbers::pi * sync_tuned_corner(filter) / sample_rate);
      stages_.assign(static_cast<std::size_t>(filter.poles), 0.0);
    } else {
      const double sigma = gaussian_sigma_t(filter) * sample_rate;
      const auto half = static_cast<long>(std::ceil(6.0 * sigma));
      double sum = 0.0;
      for (long k = -half; k <= half; ++k) {
        taps_.push_back(std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma)));
        sum += taps_.back();
      }
      for (double& t : taps_) t /= sum;
      history_.assign(taps_.size(), 0.0);
    }
  }

  double step(double x) {
    if (filter_.kind == FilterKind::sync_tuned) {
      for (double& y : stages_) {
        y += alpha_ * (x - y);
        x = y;
      }
      return x;
    }
    history_[head_] = x;
    double acc = 0.0;
    const std::size_t n = taps_.size();
    std::size_t idx = head_;
    for (std::size_t k = 0; k < n; ++k) {
      acc += taps_[k] * history_[idx];
      idx = idx == 0 ? n - 1 : idx - 1;
    }
    head_ = head_ + 1 == n ? 0 : head_ + 1;
    return acc;
  }

 private:
  FilterModel filter_;
  double alpha_ = 0.0;
  std::vector<double> stages_;
  std::vector<double> taps_;
  std::vector<double> history_;
  std::size_t head_ = 0;
};

}  // namespace

void validate(const FilterModel& filter) {
  if (!(filter.rbw > 0.0) || !std::isfinite(filter.rbw)) throw std::domain_error("RBW must be positive");
  if (filter.kind == FilterKind::sync_tuned && filter.poles < 1) {
    throw std::domain_error("sync-tuned filter needs at least one pole");
  }
}

FilterModel parse_filter(const std::string& spec, double rbw) {
  FilterModel f;
  f.rbw = rbw;
  if (spec == "gaussian") {
    f.kind = FilterKind::gaussian;
  } else if (spec.rfind("sync_tuned:", 0) == 0 || spec.rfind("sync", 0) == 0) {
    f.kind = FilterKind::sync_tuned;
    const std::string digits = spec.substr(spec.find_first_of("0123456789") == std::string::npos
                                               ? spec.size()
                                               : spec.find_first_of("0123456789"));
    if (digits.empty()) throw std::invalid_argument("sync-tuned filter needs a pole count: " + spec);
    std::size_t used = 0;
    f.poles = std::stoi(digits, &used);
    if (used != digits.size()) throw std::invalid_argument("bad pole count in filter spec: " + spec);
  } else {
    throw std::invalid_argument("unknown filter kind: " + spec);
  }
  validate(f);
  return f;
}

std::string filter_name(const FilterModel& filter) {
  if (filter.kind == FilterKind::gaussian) return "gaussian";
  return "sync" + std::to_string(filter.poles);
}

double sync_tuned_corner(const FilterModel& filter) {
  validate(filter);
  return filter.rbw / (2.0 * sync_half_width(filter));
}

double power_response(const FilterModel& filter, double f) {
  if (filter.kind == FilterKind::gaussian) {
    const double width = filter.convention == FwhmConvention::power ? 4.0 : 8.0;
    return std::exp(-width * std::numbers::ln2 * f * f / (filter.rbw * filter.rbw));
  }
  const double x = f / sync_tuned_corner(filter);
  return std::pow(1.0 + x * x, -filter.poles);
}

double effective_time(const FilterModel& filter) {
  validate(filter);
  if (filter.kind == FilterKind::gaussian) {
    const double width = filter.convention == FwhmConvention::power ? 1.0 : 2.0;
    return std::sqrt(width * std::numbers::ln2 / std::numbers::pi) / filter.rbw;
  }
  return effective_time_quadrature(filter);
}

double effective_time_quadrature(const FilterModel& filter) {
  validate(filter);
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  // Integrate in units of RBW so the integrand has O(1) width.
  const double half =
      integrator.integrate([&](double u) { return power_response(filter, u * filter.rbw); }, 0.0,
                           std::numeric_limits<double>::infinity(), 1e-13, &error, &l1);
  if (!std::isfinite(half) || error > 1e-10 * std::abs(half)) {
    throw std::runtime_error("effective-time quadrature did not converge");
  }
  const double integral = 2.0 * half * filter.rbw;
  return 1.0 / (2.0 * integral);
}

double sa_chain_simulate(const SampledSeries& input, const FilterModel& filter, double f_lo) {
  validate(filter);
  const double fs = input.sample_rate;
  if (!(fs > 0.0)) throw std::domain_error("sample rate must be positive");
  if (!(f_lo >= 0.0 && f_lo < fs / 2.0)) throw std::domain_error("LO frequency above Nyquist");
  const double time_constant = 1.0 / filter.rbw;
  const double duration = static_cast<double>(input.samples.size()) / fs;
  if (duration < 100.0 * time_constant) {
    throw std::domain_error("series must cover at least 100 filter time constants");
  }

  LowPass in_phase(filter, fs);
  LowPass quadrature(filter, fs);
  const auto settle = static_cast<std::size_t>(std::ceil(20.0 * time_constant * fs));
  const double split = 1.0 / std::numbers::sqrt2;
  const double w = 2.0 * std::numbers::pi * f_lo / fs;

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < input.samples.size(); ++n) {
    const double x = split * input.samples[n];
    const double phase = w * static_cast<double>(n);
    const double i = in_phase.step(x * std::cos(phase));
    const double q = quadrature.step(x * std::sin(phase));
    if (n >= settle) {
      sum += i * i + q * q;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

double photons_from_voltage(double v_dc, double volts_per_watt, double wavelength, double t) {
  if (volts_per_watt == 0.0) throw std::domain_error("detector responsivity m must be nonzero");
  if (!(v_dc >= 0.0) || !(volts_per_watt > 0.0) || !(wavelength > 0.0) || !(t >= 0.0)) {
    throw std::domain_error("photon accounting needs non-negative V_dc, t and positive m, lambda");
  }
  return wavelength / (kPlanck * kSpeedOfLight) * (t / volts_per_watt) * v_dc;
}

}  // namespace btmss
