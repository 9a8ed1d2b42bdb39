#pragma once
//
// Four-wave-mixing source with distributed probe loss, modelled as alternating thin layers of
// two-mode squeezers and probe beam splitters. The conjugate (mode 1) sees no loss.
//

#include <cstdint>

#include "btmss/gaussian.hpp"

namespace btmss {

inline constexpr std::size_t kProbe = 0;
inline constexpr std::size_t kConjugate = 1;

struct SourceParams {
  double s = 0.0;              // total squeezing parameter
  double T_a = 1.0;            // total internal probe transmission
  double seed_flux = 0.0;      // photons per second, informational
  double seed_photons = 1e6;   // |alpha|^2 of the probe seed
};

void validate(const SourceParams& params);

/// How each layer is split. `symmetric` wraps every thin squeezer in two half-strength loss layers,
/// which telescopes to alternating squeezer / beam-splitter layers with half layers at the faces.
/// It converges as 1/N^2; `squeeze_then_loss` converges as 1/N.
enum class LayerOrder { symmetric, squeeze_then_loss };

struct SourceOutput {
  GaussianState state;     // (probe, conjugate)
  SymplecticOp transfer;   // total linear map on quadratures; symplectic only when T_a = 1
  Matrix added_noise;      // sigma_out = transfer sigma_in transfer^T + added_noise
  std::uint64_t layers_used = 0;
  double gain = 0.0;       // <n_p>_out / <n_p>_seed
};

struct NoiseTriple {
  double diff = 0.0;   // Var(n_p - n_c) / (<n_p> + <n_c>)
  double probe = 0.0;  // Var(n_p) / <n_p>
  double conj = 0.0;   // Var(n_c) / <n_c>
};

SourceOutput layered_source(const SourceParams& params, std::uint64_t layers,
                            LayerOrder order = LayerOrder::symmetric);

inline constexpr std::uint64_t kMaxSourceLayers = std::uint64_t{1} << 20;

/// Doubles the layer count from 1 until sigma and d change by less than rel_tol (relative to
/// their largest entry) between successive counts. Returns the coarser of the agreeing pair.
/// Throws std::runtime_error past kMaxSourceLayers.
SourceOutput converged_source(const SourceParams& params, double rel_tol = 1e-9,
                              LayerOrder order = LayerOrder::symmetric);

/// Shot-noise-normalised intensity noises of a bright two-mode state (bright-limit statistics).
NoiseTriple normalized_noises(const GaussianState& state);

/// Converged layered model followed by normalized_noises.
NoiseTriple source_noises(double s, double T_a, double rel_tol = 1e-9);

enum class ProbeFormula { corrected_cosh, printed_cos };

/// Closed-form noises for the distributed-loss source. The intensity-difference expression is
/// evaluated in its printed form and does not reproduce the layered model; see docs/noise_formulas.md.
NoiseTriple analytic_noises(double s, double T_a,
                            ProbeFormula probe_formula = ProbeFormula::corrected_cosh);

double gain(const SourceParams& params);

/// Noise level in dB below shot noise, -10 log10(noise).
double squeezing_db(double noise);

}  // namespace btmss
