#pragma once
//
// Gaussian-state bookkeeping in the real quadrature basis.
//
// Convention: x = a + a^dagger, p = i(a^dagger - a), ordering (x1, p1, x2, p2, ...).
// Vacuum has zero displacement and identity covariance, so shot noise is 1.
//

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace btmss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kMatrixTolerance = 1e-10;

struct GaussianState {
  Vector d;      // quadrature means, length 2M
  Matrix sigma;  // covariance, 2M x 2M, vacuum = identity

  std::size_t modes() const { return static_cast<std::size_t>(d.size() / 2); }
};

struct SymplecticOp {
  Matrix S;
  std::string label;
};

struct ChannelOp {
  std::vector<double> eta_per_mode;
};

/// Standard symplectic form Omega for M modes (block diagonal [[0,1],[-1,0]]).
Matrix symplectic_form(std::size_t modes);

/// True when S Omega S^T = Omega within `tol` (max-abs entry).
bool is_symplectic(const Matrix& S, double tol = kMatrixTolerance);

/// Symplectic eigenvalues of a covariance matrix, ascending. All >= 1 for a physical state.
std::vector<double> symplectic_eigenvalues(const Matrix& sigma);

/// Checks symmetry, positive definiteness and sigma + i Omega >= 0 (smallest symplectic eigenvalue
/// >= 1); throws std::domain_error when violated.
void validate_state(const GaussianState& state, double tol = 1e-12);

GaussianState vacuum_state(std::size_t modes);
GaussianState coherent_state(std::span<const std::complex<double>> alphas);

/// Two-mode squeezer acting on modes (first, second) of an M-mode register.
/// x1 -> x1 cosh r + x2 sinh r, p1 -> p1 cosh r - p2 sinh r (and symmetric), so x1 - x2 is squeezed.
SymplecticOp two_mode_squeezer(double r, std::size_t modes = 2, std::size_t first = 0,
                               std::size_t second = 1);

SymplecticOp compose(const SymplecticOp& after, const SymplecticOp& before);

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op);

/// Pure-loss channel: d -> X d, sigma -> X sigma X^T + (I - X^2), X = diag(sqrt(eta_k)) per quadrature.
GaussianState apply_loss(const GaussianState& state, const ChannelOp& channel);

double mean_photon(const GaussianState& state, std::size_t mode);

/// Photons carried by the mean field only, |d|^2 / 4. Equals mean_photon in the bright limit.
double coherent_photons(const GaussianState& state, std::size_t mode);

// Bright-limit photon statistics: fluctuations projected on the mean-field direction.
// Both throw std::domain_error("bright-limit approximation invalid") on zero displacement.
double number_variance_bright(const GaussianState& state, std::size_t mode);
double number_covariance_bright(const GaussianState& state, std::size_t i, std::size_t j);

}  // namespace btmss
