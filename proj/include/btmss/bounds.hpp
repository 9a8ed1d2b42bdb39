#pragma once
//
// Transmission-estimation bounds. Every bound is reported as var_n = Var(T) * n_r, where n_r is the
// number of probe photons incident on the system (after T_p, before T).
//

#include <string_view>

#include "btmss/gaussian.hpp"
#include "btmss/source.hpp"

namespace btmss {

struct LossBudget {
  double T_p = 1.0;    // probe transmission before the system
  double eta_p = 1.0;  // probe transmission after the system (incl. detector efficiency)
  double eta_c = 1.0;  // conjugate transmission
};

void validate(const LossBudget& budget);

enum class BoundKind {
  pure_btmss,
  distributed_btmss,
  coherent,
  ultimate_ideal,
  ultimate_lossy,
  numeric_gaussian,
};

std::string_view to_string(BoundKind kind);

struct BoundPoint {
  double T = 0.0;
  double var_n = 0.0;  // Var(T) * <n_p>_r
  BoundKind kind = BoundKind::coherent;

  double var_T(double n_r) const { return var_n / n_r; }
};

double h_c(double eta_c, double s);
double xi(double s, double T_a);
double big_gamma(double s, double T_a);
double h_c_prime(double eta_c, double s, double T_a);

/// 32 s^2 sqrt(T_a) sinh^2(xi/4) / (xi^2 (sqrt(T_a) - 1) + Gamma): the distributed-loss analogue of
/// 1 - sech(2s). Evaluated with exp(-xi/2) scaling so it stays finite for large s.
double distributed_correlation_factor(double s, double T_a);

BoundPoint qcrb_coherent(double T, double n_r, double eta_p);
BoundPoint qcrb_pure_btmss(double T, double n_r, double s, const LossBudget& budget);
BoundPoint qcrb_distributed(double T, double n_r, const SourceParams& params,
                            const LossBudget& budget);
BoundPoint qcrb_ultimate(double T, double n_r, const LossBudget& budget, bool lossless);

/// Source -> T_p -> T -> eta_p on the probe and source -> eta_c on the conjugate.
class DetectionChain {
 public:
  DetectionChain(const SourceParams& params, const LossBudget& budget, double rel_tol = 1e-9);
  DetectionChain(SourceOutput source, const LossBudget& budget);

  const SourceOutput& source() const { return source_; }
  const LossBudget& budget() const { return budget_; }

  /// State reaching the detectors for system transmission T.
  GaussianState detected_state(double T) const;

  /// Probe photons incident on the system, mean-field part (bright limit).
  double probe_photons_at_system() const;

 private:
  SourceOutput source_;
  LossBudget budget_;
  GaussianState at_system_;
};

/// Quantum Fisher information for T carried by the displacement: dd^T sigma^-1 dd in the real
/// quadrature basis. Throws std::domain_error on a singular covariance.
double displacement_fisher_information(const Matrix& sigma, const Vector& d_dT);

/// Same quantity written in the complex (a, a^dagger) basis, 2 dd^dagger sigma_c^-1 dd with
/// sigma_c the symmetrised covariance of the ladder operators (vacuum = identity).
double displacement_fisher_information_complex(const Matrix& sigma, const Vector& d_dT);

/// Bright-limit Gaussian QCRB from the full chain. The derivative of d is analytic (probe mean
/// scales as sqrt(T)) and cross-checked against a central difference through apply_loss.
BoundPoint qcrb_numeric_gaussian(double T, const DetectionChain& chain);
BoundPoint qcrb_numeric_gaussian(double T, const SourceParams& params, const LossBudget& budget);

/// qcrb_coherent / qcrb_distributed at the same T and eta_p.
double advantage_ratio(double T, const SourceParams& params, const LossBudget& budget);

}  // namespace btmss
