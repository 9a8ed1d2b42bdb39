#include "btmss/estimator.hpp"

#include <stdexcept>

namespace btmss {

double intensity_difference_variance(const GaussianState& state, double g) {
  const double vp = number_variance_bright(state, kProbe);
  const double vc = number_variance_bright(state, kConjugate);
  const double cpc = number_covariance_bright(state, kProbe, kConjugate);
  return vp - 2.0 * g * cpc + g * g * vc;
}

double optimal_gain(const GaussianState& state) {
  // A dark conjugate carries no information; fall back to a pure intensity measurement.
  if (coherent_photons(state, kConjugate) == 0.0) return 0.0;
  const double vc = number_variance_bright(state, kConjugate);
  if (!(vc > 0.0)) throw std::domain_error("conjugate number variance vanishes");
  return number_covariance_bright(state, kProbe, kConjugate) / vc;
}

EstimatorModel estimator_model(const DetectionChain& chain, double T, double g) {
  if (!(T > 0.0 && T <= 1.0)) throw std::domain_error("estimator needs T in (0,1]");
  const GaussianState state = chain.detected_state(T);
  EstimatorModel m;
  m.g = g;
  m.n_r = chain.probe_photons_at_system();
  // Probe mean photons are eta_p T n_r, so the derivative is eta_p n_r.
  m.slope = chain.budget().eta_p * m.n_r;
  if (!(m.slope > 0.0)) throw std::domain_error("estimator mean does not depend on T");
  if (coherent_photons(state, kConjugate) == 0.0) {
    if (g != 0.0) throw std::domain_error("conjugate mode is dark; only g = 0 is meaningful");
    m.noise_variance = number_variance_bright(state, kProbe);
  } else {
    m.noise_variance = intensity_difference_variance(state, g);
  }
  return m;
}

EstimatorModel optimal_estimator(const DetectionChain& chain, double T) {
  return estimator_model(chain, T, optimal_gain(chain.detected_state(T)));
}

double transmission_variance(const DetectionChain& chain, double T, double g) {
  return estimator_model(chain, T, g).var_T();
}

}  // namespace btmss
