#include "btmss/source.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace btmss {

namespace {

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

// sigma -> X sigma X^T + Y
struct AffineMap {
  Mat4 X = Mat4::Identity();
  Mat4 Y = Mat4::Zero();
};

AffineMap then(const AffineMap& first, const AffineMap& second) {
  return {second.X * first.X, second.X * first.Y * second.X.transpose() + second.Y};
}

AffineMap probe_loss(double eta) {
  AffineMap m;
  const double a = std::sqrt(eta);
  m.X(0, 0) = a;
  m.X(1, 1) = a;
  m.Y(0, 0) = 1.0 - eta;
  m.Y(1, 1) = 1.0 - eta;
  return m;
}

AffineMap squeezer(double r) {
  AffineMap m;
  m.X = two_mode_squeezer(r).S;
  return m;
}

AffineMap single_layer(const SourceParams& p, std::uint64_t layers, LayerOrder order) {
  const double n = static_cast<double>(layers);
  const AffineMap sq = squeezer(p.s / n);
  if (order == LayerOrder::squeeze_then_loss) {
    return then(sq, probe_loss(std::pow(p.T_a, 1.0 / n)));
  }
  const AffineMap half = probe_loss(std::pow(p.T_a, 0.5 / n));
  return then(then(half, sq), half);
}

// Powers of one map commute, so plain square-and-multiply is exact up to rounding.
AffineMap power(AffineMap base, std::uint64_t n) {
  AffineMap result;
  while (n > 0) {
    if (n & 1U) result = then(result, base);
    n >>= 1U;
    if (n > 0) base = then(base, base);
  }
  return result;
}

double max_rel_change(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  if (scale == 0.0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

void validate(const SourceParams& params) {
  if (!(params.s >= 0.0) || !std::isfinite(params.s)) {
    throw std::domain_error("squeezing parameter s must be finite and >= 0");
  }
  if (!(params.T_a > 0.0 && params.T_a <= 1.0)) {
    throw std::domain_error("internal transmission T_a must lie in (0,1]");
  }
  if (!(params.seed_flux >= 0.0) || !(params.seed_photons >= 0.0)) {
    throw std::domain_error("seed must be non-negative");
  }
}

SourceOutput layered_source(const SourceParams& params, std::uint64_t layers, LayerOrder order) {
  validate(params);
  if (layers == 0) throw std::invalid_argument("layered_source needs at least one layer");

  const AffineMap total = power(single_layer(params, layers, order), layers);

  GaussianState seed = vacuum_state(2);
  seed.d(0) = 2.0 * std::sqrt(params.seed_photons);

  SourceOutput out;
  out.transfer = {total.X, "fwm(s=" + std::to_string(params.s) +
                               ",T_a=" + std::to_string(params.T_a) + ")"};
  out.added_noise = total.Y;
  out.state.d = total.X * seed.d;
  out.state.sigma = total.X * seed.sigma * total.X.transpose() + total.Y;
  out.layers_used = layers;
  out.gain = params.seed_photons > 0.0
                 ? mean_photon(out.state, kProbe) / mean_photon(seed, kProbe)
                 : 0.0;
  return out;
}

SourceOutput converged_source(const SourceParams& params, double rel_tol, LayerOrder order) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  SourceOutput coarse = layered_source(params, 1, order);
  for (std::uint64_t n = 2; n <= kMaxSourceLayers; n *= 2) {
    SourceOutput fine = layered_source(params, n, order);
    if (max_rel_change(coarse.state.sigma, fine.state.sigma) < rel_tol &&
        max_rel_change(coarse.state.d, fine.state.d) < rel_tol) {
      return coarse;
    }
    coarse = std::move(fine);
  }
  throw std::runtime_error("layered source did not converge within " +
                           std::to_string(kMaxSourceLayers) + " layers");
}

NoiseTriple normalized_noises(const GaussianState& state) {
  const double np = coherent_photons(state, kProbe);
  const double nc = coherent_photons(state, kConjugate);
  const double vp = number_variance_bright(state, kProbe);
  const double vc = number_variance_bright(state, kConjugate);
  const double cpc = number_covariance_bright(state, kProbe, kConjugate);
  return {(vp + vc - 2.0 * cpc) / (np + nc), vp / np, vc / nc};
}

NoiseTriple source_noises(double s, double T_a, double rel_tol) {
  SourceParams p;
  p.s = s;
  p.T_a = T_a;
  return normalized_noises(converged_source(p, rel_tol).state);
}

NoiseTriple analytic_noises(double s, double T_a, ProbeFormula probe_formula) {
  if (!(s >= 0.0)) throw std::domain_error("s must be >= 0");
  if (!(T_a > 0.0 && T_a <= 1.0)) throw std::domain_error("T_a must lie in (0,1]");

  const double L = std::log(T_a);
  const double xi = std::sqrt(16.0 * s * s + L * L);
  if (xi == 0.0) return {1.0, 1.0, 1.0};  // no squeezing, no loss: shot noise everywhere

  const double rt = std::sqrt(T_a);
  const double zeta = std::atanh(L / xi);
  const double ch = std::cosh(xi / 2.0 + zeta);
  const double sh4 = std::sinh(xi / 4.0);

  NoiseTriple n;
  n.diff = 1.0 - 2.0 * s * sh4 * sh4 / (xi * ch) -
           rt * s * L * L * std::pow(sh4, 4) / (2.0 * std::pow(xi, 3) * ch);

  const double c = probe_formula == ProbeFormula::corrected_cosh ? std::cosh(xi / 2.0)
                                                                 : std::cos(xi / 2.0);
  n.probe = (16.0 * s * s * (1.0 - rt * (1.0 - c)) + L * L) / (xi * xi);

  n.conj = 16.0 * s * s * rt / (xi * xi) - 1.0 -
           2.0 * rt * ((8.0 * s * s - xi * xi) * std::cosh(xi / 2.0) + xi * L * std::sinh(xi / 2.0)) /
               (xi * xi);
  return n;
}

double gain(const SourceParams& params) {
  if (!(params.seed_photons > 0.0)) throw std::domain_error("gain undefined for an unseeded probe");
  return converged_source(params).gain;
}

double squeezing_db(double noise) {
  if (!(noise > 0.0)) throw std::domain_error("normalized noise must be positive");
  return -10.0 * std::log10(noise);
}

}  // namespace btmss
