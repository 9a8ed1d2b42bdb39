// btmss: bounds | simulate | fit | sa-time
#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "btmss/workbench.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::string out;
  std::string format;
  unsigned workers = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "config file, or an earlier output file");
  cmd->add_option("--seed", c.seed, "master RNG seed");
  cmd->add_option("--trials", c.trials, "analyzer bins per ramp");
  cmd->add_option("--out", c.out, "output file (default <output_dir>/<command>.<format>)");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--workers", c.workers, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1U, 256U));
}

btmss::WorkbenchConfig resolve(const Common& c) {
  btmss::WorkbenchConfig config =
      c.config_path.empty() ? btmss::default_config() : btmss::load_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  if (c.trials) config.trials = *c.trials;
  if (!c.format.empty()) {
    config.format = c.format == "json" ? btmss::OutputFormat::json : btmss::OutputFormat::csv;
  }
  btmss::validate(config);
  return config;
}

void emit(const btmss::Table& table, const btmss::WorkbenchConfig& config, const Common& c) {
  const auto path = btmss::output_path(config, table.command, c.out);
  btmss::write_file(path, btmss::render(table, config, config.format));
  std::cerr << table.command << ": wrote " << table.rows.size() << " rows to " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bright two-mode squeezed light transmission-estimation workbench"};
  app.require_subcommand(1);

  Common common;
  auto* bounds = app.add_subcommand("bounds", "QCRB curves over the transmission grid");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo SNR-ramp measurement per grid point");
  auto* fit = app.add_subcommand("fit", "fit s and T_a to measured noise levels");
  auto* sa_time = app.add_subcommand("sa-time", "effective analyzer measurement time");
  for (auto* cmd : {bounds, simulate, fit}) add_common(cmd, common);

  std::string noise_path;
  fit->add_option("noise_file", noise_path, "JSON noise measurements")->required();

  std::string filter_spec = "sync4";
  double rbw = 51e3;
  std::string sa_format = "csv";
  sa_time->add_option("--filter", filter_spec, "gaussian, sync4 or sync_tuned:<poles>");
  sa_time->add_option("--rbw", rbw, "resolution bandwidth in Hz");
  sa_time->add_option("--format", sa_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return btmss::kExitSchema;
  }

  try {
    if (*bounds) {
      const auto config = resolve(common);
      emit(btmss::cmd_bounds(config), config, common);
    } else if (*simulate) {
      const auto config = resolve(common);
      emit(btmss::cmd_simulate(config, common.workers), config, common);
    } else if (*fit) {
      const auto config = resolve(common);
      const auto noise = btmss::load_noise_file(noise_path);
      const auto run = btmss::cmd_fit(noise, config, common.workers);
      emit(run.table, config, common);
      for (const auto& w : run.result.warnings) std::cerr << "warning: " << w << "\n";
      if (!run.result.converged) {
        std::cerr << "error: fit did not converge\n";
        return btmss::kExitDomain;
      }
    } else if (*sa_time) {
      btmss::FilterModel filter;
      try {
        filter = btmss::parse_filter(filter_spec, rbw);
      } catch (const std::exception& e) {
        throw btmss::SchemaError(e.what());
      }
      const auto report = btmss::cmd_sa_time(filter);
      std::cout << btmss::render(report, sa_format == "json" ? btmss::OutputFormat::json
                                                             : btmss::OutputFormat::csv);
    }
  } catch (const btmss::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return btmss::kExitIo;
  } catch (const btmss::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return btmss::kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return btmss::kExitDomain;
  }
  return btmss::kExitOk;
}
