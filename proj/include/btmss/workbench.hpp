#pragma once
//
// Command-line workbench: config parsing, the four commands and their CSV/JSON emission.
//
// Config files are flat `key = value` text with `#` comments. Every output file carries the full
// resolved config (`# config:` lines in CSV, a "config" object in JSON), and load_config accepts
// an output file in place of a config file.
//

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btmss/bounds.hpp"
#include "btmss/inference.hpp"
#include "btmss/source.hpp"
#include "btmss/spectrum_analyzer.hpp"

namespace btmss {

// Exit-code classes: 2 for IoError, 3 for SchemaError, 4 for std::domain_error.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitSchema = 3;
inline constexpr int kExitDomain = 4;

enum class OutputFormat { csv, json };

struct WorkbenchConfig {
  SourceParams source{2.04, 0.71, 0.0, 1e6};
  LossBudget budget{0.973, 0.945, 0.919};
  double n_r = 1e9;
  std::string filter = "sync4";
  double rbw = 51e3;
  std::vector<double> T_grid;  // default 0.10, 0.15, ..., 0.85
  std::uint64_t seed = 1;
  std::uint64_t trials = 10000;

  double modulation_freq = 1.5e6;
  double ramp_duration = 14.0;
  double hold_duration = 2.0;
  double ramp_start_factor = 3.0;  // start Delta T in units of the analytic sqrt(Var T)

  NoiseModel noise_model = NoiseModel::numeric_oracle;
  ChiScale chi_scale = ChiScale::log10;
  std::uint64_t de_population = 500;
  double de_acceptance = 0.7;
  double de_spread_tol = 1e-6;
  std::uint64_t de_max_generations = 2000;
  ParamBounds de_s{0.0, 3.0};
  ParamBounds de_Ta{0.5, 1.0};
  std::uint64_t uncertainty_directions = 128;

  std::string output_dir = ".";
  OutputFormat format = OutputFormat::csv;

  FilterModel filter_model() const { return parse_filter(filter, rbw); }
};

WorkbenchConfig default_config();
void validate(const WorkbenchConfig& config);
std::vector<double> default_T_grid();

/// Parses `key = value` text over the defaults. Unknown or repeated keys, malformed values and
/// invariant violations (T_grid, n_r, trials) throw SchemaError.
WorkbenchConfig parse_config(std::string_view text);

/// Reads a config file, or the embedded config of a CSV/JSON output file.
WorkbenchConfig load_config(const std::filesystem::path& path);

/// Resolved config as ordered (key, value) pairs; parse_config of the rendered pairs is exact.
std::vector<std::pair<std::string, std::string>> config_entries(const WorkbenchConfig& config);
std::string render_config(const WorkbenchConfig& config);

/// Shortest text that parses back to the same double.
std::string format_number(double v);

struct Table {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> extra;  // extra echoed inputs
  std::vector<std::string> warnings;
};

std::string render(const Table& table, const WorkbenchConfig& config, OutputFormat format);

/// Parses a CSV or JSON emission back into a table (config and extras are skipped).
Table parse_table(std::string_view text);

/// Chain whose probe carries n_r mean-field photons at the system input.
DetectionChain chain_for(const WorkbenchConfig& config);

/// Columns T, btmss_closed, btmss_numeric, coherent, ultimate_ideal, ultimate_lossy.
Table cmd_bounds(const WorkbenchConfig& config);

/// Per grid point, the ramp-simulated Delta T^2 * n_r next to the Gaussian QCRB.
/// Grid point k uses a seed derived from (config.seed, k).
Table cmd_simulate(const WorkbenchConfig& config, unsigned workers = 1);

struct NoiseFile {
  std::vector<NoiseMeasurement> measurements;
};

/// {"measurements": [{"channel", "value", "variance", "eta"}, ...]}, one entry per channel.
/// Structural problems throw SchemaError; values are checked later by the fit.
NoiseFile parse_noise_file(std::string_view text);
NoiseFile load_noise_file(const std::filesystem::path& path);

FitConfig fit_config(const WorkbenchConfig& config, unsigned workers = 1);

struct FitRun {
  FitResult result;
  Table table;  // one row: s, sigma_s, T_a, sigma_Ta, chi2, generations, spread, converged
};

FitRun cmd_fit(const NoiseFile& noise, const WorkbenchConfig& config, unsigned workers = 1);

struct SaTimeReport {
  std::string filter;
  double rbw = 0.0;
  double t = 0.0;
  double t_rbw = 0.0;
};

SaTimeReport cmd_sa_time(const FilterModel& filter);
std::string render(const SaTimeReport& report, OutputFormat format);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// --out when given, otherwise output_dir/<command>.<csv|json>.
std::filesystem::path output_path(const WorkbenchConfig& config, std::string_view command,
                                  const std::string& out_flag);

}  // namespace btmss
