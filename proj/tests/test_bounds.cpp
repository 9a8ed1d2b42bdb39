#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "btmss/bounds.hpp"

using namespace btmss;

namespace {

const LossBudget kExperiment{0.973, 0.945, 0.919};

SourceParams experiment_source() {
  SourceParams p;
  p.s = 2.04;
  p.T_a = 0.71;
  p.seed_photons = 1e8;
  return p;
}

// Direct transcriptions without the exp(-xi/2) scaling; fine for moderate s.
double literal_h_c_prime(double eta_c, double s, double T_a) {
  const double x = xi(s, T_a);
  const double g = big_gamma(s, T_a);
  return ((2.0 * eta_c - 1.0) / eta_c) *
         (1.0 + x * x * (eta_c - 1.0) / (x * x * (1.0 + eta_c * (std::sqrt(T_a) - 2.0)) + eta_c * g));
}

double literal_factor(double s, double T_a) {
  const double x = xi(s, T_a);
  const double sh = std::sinh(x / 4.0);
  return 32.0 * s * s * std::sqrt(T_a) * sh * sh /
         (x * x * (std::sqrt(T_a) - 1.0) + big_gamma(s, T_a));
}

}  // namespace

TEST_CASE("scaled closed forms agree with literal transcription") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s_dist(0.05, 4.0);
  std::uniform_real_distribution<double> t_dist(0.3, 1.0);
  std::uniform_real_distribution<double> e_dist(0.55, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double s = s_dist(rng);
    const double T_a = t_dist(rng);
    const double eta_c = e_dist(rng);
    CHECK(h_c_prime(eta_c, s, T_a) == doctest::Approx(literal_h_c_prime(eta_c, s, T_a)).epsilon(1e-10));
    CHECK(distributed_correlation_factor(s, T_a) == doctest::Approx(literal_factor(s, T_a)).epsilon(1e-10));
  }
}

TEST_CASE("lossless source reduces to the pure bound") {
  for (double s : {0.2, 1.0, 2.5}) {
    CHECK(distributed_correlation_factor(s, 1.0) ==
          doctest::Approx(1.0 - 1.0 / std::cosh(2.0 * s)).epsilon(1e-12));
    CHECK(h_c_prime(0.8, s, 1.0) == doctest::Approx(h_c(0.8, s)).epsilon(1e-12));
  }
  CHECK(h_c(1.0, 1.7) == doctest::Approx(1.0));
  CHECK(h_c(0.5, 1.7) == 0.0);
}

TEST_CASE("bound values") {
  const double n_r = 1e9;
  CHECK(qcrb_pure_btmss(0.4, n_r, 0.0, kExperiment).var_n == qcrb_coherent(0.4, n_r, 0.945).var_n);
  CHECK(qcrb_ultimate(1.0, n_r, kExperiment, true).var_n == 0.0);
  CHECK(qcrb_coherent(0.5, n_r, 1.0).var_n == doctest::Approx(0.5));
  CHECK(qcrb_coherent(0.5, n_r, 1.0).var_T(n_r) == doctest::Approx(0.5 / n_r));

  SourceParams p = experiment_source();
  const double ratio = advantage_ratio(0.84, p, kExperiment);
  CHECK(ratio == doctest::Approx(2.684).epsilon(2e-3));

  // Larger s always helps.
  double previous = qcrb_coherent(0.6, n_r, kExperiment.eta_p).var_n;
  for (double s : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    p.s = s;
    const double v = qcrb_distributed(0.6, n_r, p, kExperiment).var_n;
    CHECK(v < previous);
    CHECK(v >= qcrb_ultimate(0.6, n_r, kExperiment, false).var_n * (1.0 - 1e-12));
    previous = v;
  }
}

TEST_CASE("large squeezing stays finite") {
  SourceParams p = experiment_source();
  p.s = 20.0;
  const LossBudget ideal_conj{0.973, 0.945, 1.0};
  const BoundPoint b = qcrb_distributed(0.5, 1e9, p, ideal_conj);
  CHECK(std::isfinite(b.var_n));
  CHECK(b.var_n > qcrb_ultimate(0.5, 1e9, ideal_conj, false).var_n);
  p.T_a = 1.0;
  CHECK(qcrb_distributed(0.5, 1e9, p, ideal_conj).var_n ==
        doctest::Approx(qcrb_ultimate(0.5, 1e9, ideal_conj, false).var_n).epsilon(1e-12));
}

TEST_CASE("Fisher information in real and complex bases") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    GaussianState st = vacuum_state(2);
    st = apply_symplectic(st, two_mode_squeezer(std::abs(g(rng))));
    st = apply_loss(st, ChannelOp{{0.7, 0.9}});
    Vector dd(4);
    for (int i = 0; i < 4; ++i) dd(i) = g(rng);
    CHECK(displacement_fisher_information_complex(st.sigma, dd) ==
          doctest::Approx(displacement_fisher_information(st.sigma, dd)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(displacement_fisher_information(Matrix::Zero(2, 2), Vector::Ones(2)),
                  std::domain_error);
}

TEST_CASE("numeric Gaussian bound matches the closed form") {
  const SourceParams p = experiment_source();
  const DetectionChain chain(p, kExperiment);
  const double n_r = chain.probe_photons_at_system();
  for (int k = 0; k < 16; ++k) {
    const double T = 0.10 + 0.05 * k;
    const double numeric = qcrb_numeric_gaussian(T, chain).var_n;
    const double closed = qcrb_distributed(T, n_r, p, kExperiment).var_n;
    CHECK(numeric == doctest::Approx(closed).epsilon(1e-6));
  }
  CHECK(qcrb_numeric_gaussian(1.0, chain).var_n > 0.0);
}

TEST_CASE("input checks") {
  CHECK_THROWS_AS(qcrb_coherent(-0.1, 1e9, 0.9), std::domain_error);
  CHECK_THROWS_AS(qcrb_coherent(0.5, 0.0, 0.9), std::domain_error);
  CHECK_THROWS_AS(qcrb_ultimate(0.5, 1e9, LossBudget{1.2, 1.0, 1.0}, false), std::domain_error);
  SourceParams dim = experiment_source();
  dim.seed_photons = 1.0;
  const DetectionChain chain(dim, kExperiment);
  CHECK_THROWS_AS(qcrb_numeric_gaussian(0.5, chain), std::domain_error);
}
