#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "btmss/inference.hpp"

using namespace btmss;

namespace {

FitConfig quick_config(std::uint64_t seed = 1) {
  FitConfig c = default_fit_config();
  c.de.population = 200;
  c.de.rng_seed = seed;
  c.de.record_history = false;
  return c;
}

}  // namespace

TEST_CASE("backtracking inverts a beam splitter") {
  CHECK(backtrack_noise(0.5, 1.0) == 0.5);
  CHECK(backtrack_noise(0.919 * 0.0788 + 0.081, 0.919) == doctest::Approx(0.0788));
  CHECK(backtrack_noise(1.0, 0.3) == doctest::Approx(1.0));
  CHECK_THROWS_WITH_AS(backtrack_noise(0.05, 0.9), "backtracked noise non-physical", std::domain_error);
  CHECK_THROWS_AS(backtrack_noise(0.5, 0.0), std::domain_error);
  const NoiseMeasurement b = backtrack({NoiseChannel::probe, 10.0, 0.04, 0.5});
  CHECK(b.value == doctest::Approx(19.0));
  CHECK(b.variance == doctest::Approx(0.16));
  CHECK(b.eta == 1.0);
}

TEST_CASE("channel names") {
  for (auto c : {NoiseChannel::diff, NoiseChannel::probe, NoiseChannel::conj}) {
    CHECK(parse_channel(to_string(c)) == c);
  }
  CHECK_THROWS(parse_channel("sum"));
}

TEST_CASE("chi-square") {
  const NoiseTriple truth = source_noises(2.04, 0.71);
  const auto ms = synthetic_measurements(truth, 1.0, {1e-4, 0.01, 0.01});
  CHECK(chi_square(ms, 2.04, 0.71) == doctest::Approx(0.0).scale(1.0));
  CHECK(chi_square(ms, 2.0, 0.71) > 1.0);

  ChiSquareOptions linear;
  linear.scale = ChiScale::linear;
  CHECK(chi_square(ms, 2.0, 0.71, linear) > 1.0);

  const std::vector<NoiseMeasurement> two(ms.begin(), ms.begin() + 2);
  CHECK_THROWS_AS(chi_square(two, 2.0, 0.7), std::invalid_argument);
  std::vector<NoiseMeasurement> dup(ms.begin(), ms.end());
  dup.push_back(ms[0]);
  CHECK_THROWS_AS(chi_square(dup, 2.0, 0.7), std::invalid_argument);
}

TEST_CASE("noiseless round trip") {
  const NoiseTriple truth = source_noises(2.04, 0.71);
  const auto ms = synthetic_measurements(truth, 0.919, {4e-4, 0.5, 0.5});
  const FitResult r = fit_source(ms, quick_config());
  CHECK(r.s == doctest::Approx(2.04).epsilon(5e-4));
  CHECK(r.T_a == doctest::Approx(0.71).epsilon(1e-3));
  CHECK(r.converged);
  CHECK(r.chi2 < 1e-8);
  CHECK(r.source_noises[0].value == doctest::Approx(truth.diff).epsilon(1e-9));
}

TEST_CASE("zero chi2 minimum gives a degenerate contour") {
  const NoiseTriple truth = source_noises(1.5, 0.8);
  const auto ms = synthetic_measurements(truth, 1.0, {1e-4, 0.01, 0.01});
  const std::vector<ParamBounds> bounds = {{0.0, 3.0}, {0.5, 1.0}};
  const double opt[] = {1.5, 0.8};
  const auto u = uncertainty_by_chi2_doubling(
      [&](std::span<const double> x) { return chi_square(ms, x[0], x[1]); }, opt, 0.0, 1, bounds);
  CHECK(u[0].sigma() < 1e-5);
  CHECK(u[1].sigma() < 1e-5);
}

TEST_CASE("uncertainty halves when the noise standard deviation halves") {
  const NoiseTriple truth = source_noises(2.04, 0.71);
  const std::array<double, 3> n0 = {truth.diff, truth.probe, truth.conj};
  const std::array<double, 3> rel_sd = {0.04, 0.04, 0.04};
  std::mt19937_64 rng(42);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::array<double, 3> draws = {z(rng), z(rng), z(rng)};

  auto fit_with = [&](double scale) {
    std::array<NoiseMeasurement, 3> ms;
    for (std::size_t c = 0; c < 3; ++c) {
      const double sd = scale * rel_sd[c] * n0[c];
      ms[c] = {static_cast<NoiseChannel>(c), n0[c] + sd * draws[c], sd * sd, 1.0};
    }
    return fit_source(ms, quick_config(3));
  };
  const FitResult wide = fit_with(1.0);
  const FitResult narrow = fit_with(0.5);
  CHECK(wide.sigma_s > 0.0);
  CHECK(wide.sigma_Ta > 0.0);
  CHECK(narrow.sigma_s / wide.sigma_s == doctest::Approx(0.5).epsilon(0.1));
  CHECK(narrow.sigma_Ta / wide.sigma_Ta == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("invalid transmissions are rejected") {
  const NoiseTriple truth = source_noises(2.04, 0.71);
  auto ms = synthetic_measurements(truth, 0.919, {4e-4, 0.5, 0.5});
  ms[1].eta = 0.0;
  CHECK_THROWS_AS(fit_source(ms, quick_config()), std::domain_error);
}

TEST_CASE("printed-formula model is selectable") {
  ChiSquareOptions printed;
  printed.model = NoiseModel::printed_formulas;
  const NoiseTriple t = theory_noises(2.04, 0.71, printed);
  const NoiseTriple o = theory_noises(2.04, 0.71);
  CHECK(t.conj == doctest::Approx(o.conj).epsilon(1e-6));
  CHECK(std::abs(t.diff - o.diff) > 0.1);
}
