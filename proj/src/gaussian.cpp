#include "btmss/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace btmss {

namespace {

void check_mode(const GaussianState& state, std::size_t mode) {
  if (mode >= state.modes()) {
    throw std::out_of_range("mode index " + std::to_string(mode) + " outside a " +
                            std::to_string(state.modes()) + "-mode state");
  }
}

Eigen::Vector2d mode_mean(const GaussianState& state, std::size_t mode) {
  return state.d.segment<2>(static_cast<Eigen::Index>(2 * mode));
}

}  // namespace

Matrix symplectic_form(std::size_t modes) {
  const auto n = static_cast<Eigen::Index>(2 * modes);
  Matrix omega = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  return omega;
}

bool is_symplectic(const Matrix& S, double tol) {
  if (S.rows() != S.cols() || S.rows() % 2 != 0) return false;
  const Matrix omega = symplectic_form(static_cast<std::size_t>(S.rows() / 2));
  return (S * omega * S.transpose() - omega).cwiseAbs().maxCoeff() <= tol;
}

std::vector<double> symplectic_eigenvalues(const Matrix& sigma) {
  const Matrix omega = symplectic_form(static_cast<std::size_t>(sigma.rows() / 2));
  // Omega sigma has eigenvalues +-i nu_k.
  Eigen::EigenSolver<Matrix> solver(omega * sigma, false);
  std::vector<double> nu;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    nu.push_back(std::abs(solver.eigenvalues()(k).imag()));
  }
  std::sort(nu.begin(), nu.end());
  std::vector<double> out;
  for (std::size_t k = 0; k < nu.size(); k += 2) out.push_back(0.5 * (nu[k] + nu[k + 1]));
  return out;
}

void validate_state(const GaussianState& state, double tol) {
  const auto n = state.d.size();
  if (n == 0 || n % 2 != 0 || state.sigma.rows() != n || state.sigma.cols() != n) {
    throw std::invalid_argument("state dimensions inconsistent");
  }
  const double scale = std::max(1.0, state.sigma.cwiseAbs().maxCoeff());
  if ((state.sigma - state.sigma.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw std::domain_error("covariance matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(state.sigma);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("covariance matrix is not positive definite");
  }
  const auto nu = symplectic_eigenvalues(state.sigma);
  if (nu.front() < 1.0 - std::max(tol, 1e-8) * scale) {
    throw std::domain_error("covariance matrix violates the uncertainty relation");
  }
}

GaussianState vacuum_state(std::size_t modes) {
  if (modes == 0) throw std::invalid_argument("vacuum_state needs at least one mode");
  const auto n = static_cast<Eigen::Index>(2 * modes);
  return {Vector::Zero(n), Matrix::Identity(n, n)};
}

GaussianState coherent_state(std::span<const std::complex<double>> alphas) {
  GaussianState state = vacuum_state(alphas.size());
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    state.d(static_cast<Eigen::Index>(2 * k)) = 2.0 * alphas[k].real();
    state.d(static_cast<Eigen::Index>(2 * k + 1)) = 2.0 * alphas[k].imag();
  }
  return state;
}

SymplecticOp two_mode_squeezer(double r, std::size_t modes, std::size_t first,
                               std::size_t second) {
  if (!std::isfinite(r)) throw std::invalid_argument("squeezing parameter must be finite");
  if (first >= modes || second >= modes || first == second) {
    throw std::invalid_argument("two_mode_squeezer needs two distinct modes in range");
  }
  const auto n = static_cast<Eigen::Index>(2 * modes);
  Matrix S = Matrix::Identity(n, n);
  const double c = std::cosh(r);
  const double s = std::sinh(r);
  const auto x1 = static_cast<Eigen::Index>(2 * first);
  const auto x2 = static_cast<Eigen::Index>(2 * second);
  S(x1, x1) = c;
  S(x1, x2) = s;
  S(x2, x2) = c;
  S(x2, x1) = s;
  S(x1 + 1, x1 + 1) = c;
  S(x1 + 1, x2 + 1) = -s;
  S(x2 + 1, x2 + 1) = c;
  S(x2 + 1, x1 + 1) = -s;
  return {std::move(S), "tms(" + std::to_string(r) + ")"};
}

SymplecticOp compose(const SymplecticOp& after, const SymplecticOp& before) {
  if (after.S.rows() != before.S.rows()) {
    throw std::invalid_argument("cannot compose symplectic maps of different size");
  }
  return {after.S * before.S, after.label + "*" + before.label};
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op) {
  if (op.S.rows() != state.d.size() || op.S.cols() != state.d.size()) {
    throw std::invalid_argument("symplectic map dimension does not match state");
  }
  return {op.S * state.d, op.S * state.sigma * op.S.transpose()};
}

GaussianState apply_loss(const GaussianState& state, const ChannelOp& channel) {
  if (channel.eta_per_mode.size() != state.modes()) {
    throw std::invalid_argument("loss channel needs one transmission per mode");
  }
  const auto n = state.d.size();
  Vector x(n);
  for (std::size_t k = 0; k < channel.eta_per_mode.size(); ++k) {
    const double eta = channel.eta_per_mode[k];
    if (!(eta >= 0.0 && eta <= 1.0)) {
      throw std::domain_error("transmission " + std::to_string(eta) + " outside [0,1]");
    }
    x(static_cast<Eigen::Index>(2 * k)) = std::sqrt(eta);
    x(static_cast<Eigen::Index>(2 * k + 1)) = std::sqrt(eta);
  }
  GaussianState out;
  out.d = x.cwiseProduct(state.d);
  out.sigma = x.asDiagonal() * state.sigma * x.asDiagonal();
  out.sigma.diagonal() += (Vector::Ones(n) - x.cwiseAbs2());
  return out;
}

double mean_photon(const GaussianState& state, std::size_t mode) {
  check_mode(state, mode);
  const auto k = static_cast<Eigen::Index>(2 * mode);
  return coherent_photons(state, mode) + (state.sigma(k, k) + state.sigma(k + 1, k + 1) - 2.0) / 4.0;
}

double coherent_photons(const GaussianState& state, std::size_t mode) {
  check_mode(state, mode);
  return mode_mean(state, mode).squaredNorm() / 4.0;
}

double number_covariance_bright(const GaussianState& state, std::size_t i, std::size_t j) {
  check_mode(state, i);
  check_mode(state, j);
  const Eigen::Vector2d di = mode_mean(state, i);
  const Eigen::Vector2d dj = mode_mean(state, j);
  if (di.squaredNorm() == 0.0 || dj.squaredNorm() == 0.0) {
    throw std::domain_error("bright-limit approximation invalid");
  }
  const Eigen::Matrix2d block =
      state.sigma.block<2, 2>(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(2 * j));
  return di.dot(block * dj) / 4.0;
}

double number_variance_bright(const GaussianState& state, std::size_t mode) {
  return number_covariance_bright(state, mode, mode);
}

}  // namespace btmss
