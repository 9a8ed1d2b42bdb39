#pragma once
//
// Optimised intensity-difference estimator n_p - g n_c.
//

#include "btmss/bounds.hpp"
#include "btmss/gaussian.hpp"

namespace btmss {

/// Bright-limit Var(n_p - g n_c) of a (probe, conjugate) state.
double intensity_difference_variance(const GaussianState& state, double g);

/// g* = Cov(n_p, n_c) / Var(n_c). Throws std::domain_error when Var(n_c) = 0.
double optimal_gain(const GaussianState& state);

/// Photon-unit description of the estimator at one operating point.
struct EstimatorModel {
  double g = 0.0;
  double noise_variance = 0.0;  // Var(n_p - g n_c), photons^2
  double slope = 0.0;           // d<n_p - g n_c>/dT = eta_p n_r, photons
  double n_r = 0.0;             // probe photons incident on the system

  double var_T() const { return noise_variance / (slope * slope); }
  double var_n() const { return var_T() * n_r; }
};

/// Estimator at system transmission T with gain g (the conjugate mean does not depend on T).
EstimatorModel estimator_model(const DetectionChain& chain, double T, double g);

/// Same, with g = optimal_gain of the detected state.
EstimatorModel optimal_estimator(const DetectionChain& chain, double T);

/// Var(T_est) = Var(n_p - g n_c) / (d<n_p - g n_c>/dT)^2 for the chain's own photon number.
/// Throws std::domain_error on a vanishing derivative.
double transmission_variance(const DetectionChain& chain, double T, double g);

}  // namespace btmss
