#include "btmss/bounds.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace btmss {

namespace {

void check_point(double T, double n_r) {
  if (!(T >= 0.0 && T <= 1.0)) throw std::domain_error("system transmission T must lie in [0,1]");
  if (!(n_r > 0.0)) throw std::domain_error("probe photon number n_r must be positive");
}

// exp(-xi/2) * Gamma
double scaled_gamma(double xi_value, double L, double rt, double e) {
  return rt * (0.5 * (1.0 + e * e) * (xi_value * xi_value + L * L) - L * L * e -
               L * xi_value * (1.0 - e * e));
}

}  // namespace

void validate(const LossBudget& b) {
  for (double v : {b.T_p, b.eta_p, b.eta_c}) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("loss budget entries must lie in [0,1]");
  }
}

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::pure_btmss: return "pure_btmss";
    case BoundKind::distributed_btmss: return "distributed_btmss";
    case BoundKind::coherent: return "coherent";
    case BoundKind::ultimate_ideal: return "ultimate_ideal";
    case BoundKind::ultimate_lossy: return "ultimate_lossy";
    case BoundKind::numeric_gaussian: return "numeric_gaussian";
  }
  return "unknown";
}

double h_c(double eta_c, double s) {
  const double sh2 = std::sinh(s) * std::sinh(s);
  return (2.0 * eta_c - 1.0) * (1.0 + 2.0 * sh2) / (1.0 + 2.0 * eta_c * sh2);
}

double xi(double s, double T_a) {
  if (!(T_a > 0.0 && T_a <= 1.0)) throw std::domain_error("T_a must lie in (0,1]");
  const double L = std::log(T_a);
  return std::sqrt(16.0 * s * s + L * L);
}

double big_gamma(double s, double T_a) {
  const double x = xi(s, T_a);
  const double L = std::log(T_a);
  const double rt = std::sqrt(T_a);
  return rt * (std::cosh(x / 2.0) * (x * x + L * L) - L * (L + 2.0 * x * std::sinh(x / 2.0)));
}

double h_c_prime(double eta_c, double s, double T_a) {
  const double x = xi(s, T_a);
  if (x == 0.0) return h_c(eta_c, 0.0);
  const double L = std::log(T_a);
  const double rt = std::sqrt(T_a);
  const double e = std::exp(-x / 2.0);
  const double g = scaled_gamma(x, L, rt, e);
  // ((2 eta_c - 1)/eta_c) (1 + xi^2 (eta_c - 1) / (xi^2 (1 + eta_c (sqrt(T_a) - 2)) + eta_c Gamma)),
  // with the 1/eta_c cancelled and both sides scaled by exp(-xi/2).
  const double x2e = x * x * e;
  return (2.0 * eta_c - 1.0) * (x2e * (rt - 1.0) + g) /
         (x2e * (1.0 + eta_c * (rt - 2.0)) + eta_c * g);
}

double distributed_correlation_factor(double s, double T_a) {
  const double x = xi(s, T_a);
  if (s == 0.0) return 0.0;
  const double L = std::log(T_a);
  const double rt = std::sqrt(T_a);
  const double e = std::exp(-x / 2.0);
  const double numerator = 8.0 * s * s * rt * (1.0 - e) * (1.0 - e);
  const double denominator = x * x * (rt - 1.0) * e + scaled_gamma(x, L, rt, e);
  if (!(denominator > 0.0)) throw std::domain_error("non-physical parameter combination");
  return numerator / denominator;
}

BoundPoint qcrb_coherent(double T, double n_r, double eta_p) {
  check_point(T, n_r);
  if (!(eta_p > 0.0 && eta_p <= 1.0)) throw std::domain_error("eta_p must lie in (0,1]");
  return {T, T / (eta_p * n_r) * n_r, BoundKind::coherent};
}

BoundPoint qcrb_pure_btmss(double T, double n_r, double s, const LossBudget& budget) {
  check_point(T, n_r);
  validate(budget);
  const double var = T / (budget.eta_p * n_r) -
                     (T * T / n_r) * budget.T_p * h_c(budget.eta_c, s) * (1.0 - 1.0 / std::cosh(2.0 * s));
  return {T, var * n_r, BoundKind::pure_btmss};
}

BoundPoint qcrb_distributed(double T, double n_r, const SourceParams& params,
                            const LossBudget& budget) {
  check_point(T, n_r);
  validate(budget);
  validate(params);
  const double var = T / (budget.eta_p * n_r) -
                     (T * T / n_r) * budget.T_p * h_c_prime(budget.eta_c, params.s, params.T_a) *
                         distributed_correlation_factor(params.s, params.T_a);
  return {T, var * n_r, BoundKind::distributed_btmss};
}

BoundPoint qcrb_ultimate(double T, double n_r, const LossBudget& budget, bool lossless) {
  check_point(T, n_r);
  validate(budget);
  const double T_p = lossless ? 1.0 : budget.T_p;
  const double eta_p = lossless ? 1.0 : budget.eta_p;
  const double var = T / (eta_p * n_r) - (T * T / n_r) * T_p;
  return {T, var * n_r, lossless ? BoundKind::ultimate_ideal : BoundKind::ultimate_lossy};
}

DetectionChain::DetectionChain(const SourceParams& params, const LossBudget& budget, double rel_tol)
    : DetectionChain(converged_source(params, rel_tol), budget) {}

DetectionChain::DetectionChain(SourceOutput source, const LossBudget& budget)
    : source_(std::move(source)), budget_(budget) {
  validate(budget_);
  at_system_ = apply_loss(source_.state, ChannelOp{{budget_.T_p, 1.0}});
}

GaussianState DetectionChain::detected_state(double T) const {
  const GaussianState through = apply_loss(at_system_, ChannelOp{{T, 1.0}});
  return apply_loss(through, ChannelOp{{budget_.eta_p, budget_.eta_c}});
}

double DetectionChain::probe_photons_at_system() const {
  return coherent_photons(at_system_, kProbe);
}

double displacement_fisher_information(const Matrix& sigma, const Vector& d_dT) {
  Eigen::LDLT<Matrix> ldlt(sigma);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff()) {
    throw std::domain_error("covariance matrix is singular");
  }
  return d_dT.dot(ldlt.solve(d_dT));
}

double displacement_fisher_information_complex(const Matrix& sigma, const Vector& d_dT) {
  using Complex = std::complex<double>;
  using CMatrix = Eigen::MatrixXcd;
  const Eigen::Index n = sigma.rows();
  const Eigen::Index m = n / 2;
  // Rows 0..m-1 map to a_k, rows m..2m-1 to a_k^dagger; a = (x + i p) / 2.
  CMatrix U = CMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < m; ++k) {
    U(k, 2 * k) = 0.5;
    U(k, 2 * k + 1) = Complex(0.0, 0.5);
    U(m + k, 2 * k) = 0.5;
    U(m + k, 2 * k + 1) = Complex(0.0, -0.5);
  }
  const CMatrix sigma_c = 2.0 * U * sigma.cast<Complex>() * U.adjoint();
  const Eigen::VectorXcd dd = U * d_dT.cast<Complex>();
  Eigen::FullPivLU<CMatrix> lu(sigma_c);
  if (!lu.isInvertible()) throw std::domain_error("covariance matrix is singular");
  return 2.0 * (dd.adjoint() * lu.solve(dd))(0, 0).real();
}

BoundPoint qcrb_numeric_gaussian(double T, const DetectionChain& chain) {
  if (!(T > 0.0 && T <= 1.0)) throw std::domain_error("numeric QCRB needs T in (0,1]");
  const double n_r = chain.probe_photons_at_system();
  if (n_r < 1e4) throw std::domain_error("numeric QCRB needs a bright probe (>= 1e4 photons)");

  const GaussianState state = chain.detected_state(T);

  Vector analytic = Vector::Zero(state.d.size());
  analytic.segment<2>(0) = state.d.segment<2>(0) / (2.0 * T);

  const double h = 1e-6 * std::max(T, 0.01);
  Vector numeric;
  if (T + h <= 1.0) {
    numeric = (chain.detected_state(T + h).d - chain.detected_state(T - h).d) / (2.0 * h);
  } else {
    numeric = (3.0 * state.d - 4.0 * chain.detected_state(T - h).d +
               chain.detected_state(T - 2.0 * h).d) /
              (2.0 * h);
  }
  if ((numeric - analytic).norm() > 1e-6 * analytic.norm()) {
    throw std::runtime_error("analytic and finite-difference displacement derivatives disagree");
  }

  const double fisher = displacement_fisher_information(state.sigma, analytic);
  return {T, n_r / fisher, BoundKind::numeric_gaussian};
}

BoundPoint qcrb_numeric_gaussian(double T, const SourceParams& params, const LossBudget& budget) {
  return qcrb_numeric_gaussian(T, DetectionChain(params, budget));
}

double advantage_ratio(double T, const SourceParams& params, const LossBudget& budget) {
  return qcrb_coherent(T, 1.0, budget.eta_p).var_n / qcrb_distributed(T, 1.0, params, budget).var_n;
}

}  // namespace btmss
