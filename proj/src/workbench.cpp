#include "btmss/workbench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "btmss/estimator.hpp"
#include "btmss/ramp.hpp"

namespace btmss {

namespace {

using ojson = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw SchemaError("config key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
  }
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw SchemaError("config key '" + std::string(key) + "': not a non-negative integer: '" +
                      std::string(v) + "'");
  }
  return out;
}

std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_double(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k > 0) out += ", ";
    out += format_number(xs[k]);
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27U)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31U);
}

struct KeySpec {
  std::function<void(WorkbenchConfig&, std::string_view)> set;
  std::function<std::string(const WorkbenchConfig&)> get;
};

KeySpec number_key(double WorkbenchConfig::*member, std::string key) {
  return {[member, key](WorkbenchConfig& c, std::string_view v) { c.*member = parse_double(key, v); },
          [member](const WorkbenchConfig& c) { return format_number(c.*member); }};
}

KeySpec number_key(std::function<double&(WorkbenchConfig&)> ref, std::string key) {
  return {[ref, key](WorkbenchConfig& c, std::string_view v) { ref(c) = parse_double(key, v); },
          [ref](const WorkbenchConfig& c) {
            return format_number(ref(const_cast<WorkbenchConfig&>(c)));
          }};
}

KeySpec uint_key(std::uint64_t WorkbenchConfig::*member, std::string key) {
  return {[member, key](WorkbenchConfig& c, std::string_view v) { c.*member = parse_uint(key, v); },
          [member](const WorkbenchConfig& c) { return std::to_string(c.*member); }};
}

const std::vector<std::pair<std::string, KeySpec>>& key_table() {
  static const std::vector<std::pair<std::string, KeySpec>> table = [] {
    std::vector<std::pair<std::string, KeySpec>> t;
    t.emplace_back("s", number_key([](WorkbenchConfig& c) -> double& { return c.source.s; }, "s"));
    t.emplace_back("T_a",
                   number_key([](WorkbenchConfig& c) -> double& { return c.source.T_a; }, "T_a"));
    t.emplace_back("T_p",
                   number_key([](WorkbenchConfig& c) -> double& { return c.budget.T_p; }, "T_p"));
    t.emplace_back("eta_p", number_key(
                                [](WorkbenchConfig& c) -> double& { return c.budget.eta_p; }, "eta_p"));
    t.emplace_back("eta_c", number_key(
                                [](WorkbenchConfig& c) -> double& { return c.budget.eta_c; }, "eta_c"));
    t.emplace_back("n_r", number_key(&WorkbenchConfig::n_r, "n_r"));
    t.emplace_back("filter", KeySpec{[](WorkbenchConfig& c, std::string_view v) { c.filter = v; },
                                     [](const WorkbenchConfig& c) { return c.filter; }});
    t.emplace_back("rbw", number_key(&WorkbenchConfig::rbw, "rbw"));
    t.emplace_back("T_grid",
                   KeySpec{[](WorkbenchConfig& c, std::string_view v) { c.T_grid = parse_list("T_grid", v); },
                           [](const WorkbenchConfig& c) { return join(c.T_grid); }});
    t.emplace_back("seed", uint_key(&WorkbenchConfig::seed, "seed"));
    t.emplace_back("trials", uint_key(&WorkbenchConfig::trials, "trials"));
    t.emplace_back("modulation_freq", number_key(&WorkbenchConfig::modulation_freq, "modulation_freq"));
    t.emplace_back("ramp_duration", number_key(&WorkbenchConfig::ramp_duration, "ramp_duration"));
    t.emplace_back("hold_duration", number_key(&WorkbenchConfig::hold_duration, "hold_duration"));
    t.emplace_back("ramp_start_factor",
                   number_key(&WorkbenchConfig::ramp_start_factor, "ramp_start_factor"));
    t.emplace_back("noise_model",
                   KeySpec{[](WorkbenchConfig& c, std::string_view v) {
                             if (v == "numeric_oracle") {
                               c.noise_model = NoiseModel::numeric_oracle;
                             } else if (v == "printed_formulas") {
                               c.noise_model = NoiseModel::printed_formulas;
                             } else {
                               throw SchemaError("noise_model must be numeric_oracle or printed_formulas");
                             }
                           },
                           [](const WorkbenchConfig& c) { return std::string(to_string(c.noise_model)); }});
    t.emplace_back("chi_scale",
                   KeySpec{[](WorkbenchConfig& c, std::string_view v) {
                             if (v == "log10") {
                               c.chi_scale = ChiScale::log10;
                             } else if (v == "linear") {
                               c.chi_scale = ChiScale::linear;
                             } else {
                               throw SchemaError("chi_scale must be log10 or linear");
                             }
                           },
                           [](const WorkbenchConfig& c) { return std::string(to_string(c.chi_scale)); }});
    t.emplace_back("de_population", uint_key(&WorkbenchConfig::de_population, "de_population"));
    t.emplace_back("de_acceptance", number_key(&WorkbenchConfig::de_acceptance, "de_acceptance"));
    t.emplace_back("de_spread_tol", number_key(&WorkbenchConfig::de_spread_tol, "de_spread_tol"));
    t.emplace_back("de_max_generations",
                   uint_key(&WorkbenchConfig::de_max_generations, "de_max_generations"));
    t.emplace_back("de_s_min", number_key(
                                   [](WorkbenchConfig& c) -> double& { return c.de_s.lo; }, "de_s_min"));
    t.emplace_back("de_s_max", number_key(
                                   [](WorkbenchConfig& c) -> double& { return c.de_s.hi; }, "de_s_max"));
    t.emplace_back("de_Ta_min",
                   number_key([](WorkbenchConfig& c) -> double& { return c.de_Ta.lo; }, "de_Ta_min"));
    t.emplace_back("de_Ta_max",
                   number_key([](WorkbenchConfig& c) -> double& { return c.de_Ta.hi; }, "de_Ta_max"));
    t.emplace_back("uncertainty_directions",
                   uint_key(&WorkbenchConfig::uncertainty_directions, "uncertainty_directions"));
    t.emplace_back("output_dir",
                   KeySpec{[](WorkbenchConfig& c, std::string_view v) { c.output_dir = v; },
                           [](const WorkbenchConfig& c) { return c.output_dir; }});
    t.emplace_back("format",
                   KeySpec{[](WorkbenchConfig& c, std::string_view v) {
                             if (v == "csv") {
                               c.format = OutputFormat::csv;
                             } else if (v == "json") {
                               c.format = OutputFormat::json;
                             } else {
                               throw SchemaError("format must be csv or json");
                             }
                           },
                           [](const WorkbenchConfig& c) {
                             return std::string(c.format == OutputFormat::csv ? "csv" : "json");
                           }});
    return t;
  }();
  return table;
}

void check_finite(const Table& table) {
  for (const auto& row : table.rows) {
    for (double v : row) {
      if (!std::isfinite(v)) throw std::domain_error(table.command + ": non-finite value in output");
    }
  }
}

std::string render_csv(const Table& table, const WorkbenchConfig& config) {
  std::string out = "# command: " + table.command + "\n";
  for (const auto& [k, v] : config_entries(config)) out += "# config: " + k + " = " + v + "\n";
  for (const auto& [k, v] : table.extra) out += "# input: " + k + " = " + v + "\n";
  for (const auto& w : table.warnings) out += "# warning: " + w + "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out += (c > 0 ? "," : "") + table.columns[c];
  }
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ",";
      out += format_number(row[c]);
    }
    out += "\n";
  }
  return out;
}

std::string render_json(const Table& table, const WorkbenchConfig& config) {
  ojson j;
  j["command"] = table.command;
  ojson cfg = ojson::object();
  for (const auto& [k, v] : config_entries(config)) cfg[k] = v;
  j["config"] = cfg;
  if (!table.extra.empty()) {
    ojson input = ojson::object();
    for (const auto& [k, v] : table.extra) input[k] = v;
    j["input"] = input;
  }
  j["warnings"] = table.warnings;
  j["columns"] = table.columns;
  ojson rows = ojson::array();
  for (const auto& row : table.rows) rows.push_back(row);
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite value cannot be serialized");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<double> default_T_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 16; ++k) grid.push_back((10.0 + 5.0 * k) / 100.0);
  return grid;
}

WorkbenchConfig default_config() {
  WorkbenchConfig c;
  c.T_grid = default_T_grid();
  return c;
}

void validate(const WorkbenchConfig& c) {
  if (c.T_grid.empty()) throw SchemaError("T_grid must not be empty");
  for (std::size_t k = 0; k < c.T_grid.size(); ++k) {
    const double T = c.T_grid[k];
    if (!(T > 0.0 && T <= 1.0)) throw SchemaError("T_grid entries must lie in (0,1]");
    if (k > 0 && !(T > c.T_grid[k - 1])) throw SchemaError("T_grid must be strictly increasing");
  }
  if (!(c.n_r > 0.0) || !std::isfinite(c.n_r)) throw SchemaError("n_r must be positive");
  if (c.trials < 100) throw SchemaError("trials must be at least 100");
  try {
    (void)c.filter_model();
  } catch (const std::exception& e) {
    throw SchemaError(std::string("filter: ") + e.what());
  }
  if (c.de_population < 4) throw SchemaError("de_population must be at least 4");
  if (!(c.de_acceptance >= 0.0 && c.de_acceptance <= 1.0)) {
    throw SchemaError("de_acceptance must lie in [0,1]");
  }
  if (!(c.de_spread_tol > 0.0)) throw SchemaError("de_spread_tol must be positive");
  if (!(c.de_s.lo < c.de_s.hi) || !(c.de_Ta.lo < c.de_Ta.hi)) {
    throw SchemaError("fit bounds need min < max");
  }
  if (c.uncertainty_directions < 4) throw SchemaError("uncertainty_directions must be at least 4");
  if (!(c.ramp_start_factor > 0.0)) throw SchemaError("ramp_start_factor must be positive");
}

WorkbenchConfig parse_config(std::string_view text) {
  WorkbenchConfig c = default_config();
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw SchemaError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& table = key_table();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const auto& entry) { return entry.first == key; });
    if (it == table.end()) throw SchemaError("unknown config key '" + key + "'");
    if (!seen.insert(key).second) throw SchemaError("config key '" + key + "' given twice");
    it->second.set(c, value);
  }
  validate(c);
  return c;
}

WorkbenchConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string_view body = trim(text);
  if (!body.empty() && body.front() == '{') {
    ojson j;
    try {
      j = ojson::parse(body);
    } catch (const std::exception& e) {
      throw SchemaError(path.string() + ": invalid JSON: " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) {
      throw SchemaError(path.string() + ": no \"config\" object");
    }
    std::string lines;
    for (const auto& [k, v] : j["config"].items()) {
      if (!v.is_string()) throw SchemaError("config value for '" + k + "' must be a string");
      lines += k + " = " + v.get<std::string>() + "\n";
    }
    return parse_config(lines);
  }

  constexpr std::string_view prefix = "# config: ";
  std::string embedded;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) == 0) embedded += line.substr(prefix.size()) + "\n";
  }
  return parse_config(embedded.empty() ? std::string_view(text) : std::string_view(embedded));
}

std::vector<std::pair<std::string, std::string>> config_entries(const WorkbenchConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, spec] : key_table()) out.emplace_back(key, spec.get(config));
  return out;
}

std::string render_config(const WorkbenchConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

std::string render(const Table& table, const WorkbenchConfig& config, OutputFormat format) {
  check_finite(table);
  return format == OutputFormat::csv ? render_csv(table, config) : render_json(table, config);
}

Table parse_table(std::string_view text) {
  Table t;
  const std::string_view body = trim(text);
  if (!body.empty() && body.front() == '{') {
    ojson j;
    try {
      j = ojson::parse(body);
      t.command = j.at("command").get<std::string>();
      t.columns = j.at("columns").get<std::vector<std::string>>();
      t.rows = j.at("rows").get<std::vector<std::vector<double>>>();
    } catch (const std::exception& e) {
      throw SchemaError(std::string("invalid JSON table: ") + e.what());
    }
    return t;
  }
  std::istringstream in{std::string(text)};
  bool header = true;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("# command: ", 0) == 0) t.command = line.substr(11);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (header) {
      t.columns = cells;
      header = false;
      continue;
    }
    if (cells.size() != t.columns.size()) throw SchemaError("CSV row width differs from header");
    std::vector<double> row;
    for (const auto& cell : cells) row.push_back(parse_double("csv", cell));
    t.rows.push_back(std::move(row));
  }
  return t;
}

DetectionChain chain_for(const WorkbenchConfig& config) {
  SourceParams unit = config.source;
  unit.seed_photons = 1.0;
  const double per_seed = DetectionChain(unit, config.budget).probe_photons_at_system();
  if (!(per_seed > 0.0)) throw std::domain_error("no probe photons reach the system");
  SourceParams params = config.source;
  params.seed_photons = config.n_r / per_seed;
  return DetectionChain(params, config.budget);
}

Table cmd_bounds(const WorkbenchConfig& config) {
  validate(config);
  const DetectionChain chain = chain_for(config);
  Table t;
  t.command = "bounds";
  t.columns = {"T", "btmss_closed", "btmss_numeric", "coherent", "ultimate_ideal", "ultimate_lossy"};
  for (double T : config.T_grid) {
    t.rows.push_back({
        T,
        qcrb_distributed(T, config.n_r, config.source, config.budget).var_n,
        qcrb_numeric_gaussian(T, chain).var_n,
        qcrb_coherent(T, config.n_r, config.budget.eta_p).var_n,
        qcrb_ultimate(T, config.n_r, config.budget, true).var_n,
        qcrb_ultimate(T, config.n_r, config.budget, false).var_n,
    });
  }
  check_finite(t);
  return t;
}

Table cmd_simulate(const WorkbenchConfig& config, unsigned workers) {
  validate(config);
  const DetectionChain chain = chain_for(config);
  const FilterModel filter = config.filter_model();
  Table t;
  t.command = "simulate";
  t.columns = {"T", "g", "analytic_var_n", "estimator_var_n", "simulated_var_n", "ratio", "fit_points"};
  for (std::size_t k = 0; k < config.T_grid.size(); ++k) {
    const double T = config.T_grid[k];
    const EstimatorModel est = optimal_estimator(chain, T);
    const double analytic = qcrb_numeric_gaussian(T, chain).var_n;

    MeasurementPlan plan;
    plan.estimator = est;
    plan.modulation_freq = config.modulation_freq;
    plan.ramp_duration = config.ramp_duration;
    plan.hold_duration = config.hold_duration;
    plan.filter = filter;
    plan.trials = config.trials;
    plan.rng_seed = splitmix64(config.seed ^ splitmix64(k));
    plan.workers = workers;
    const RampResult r =
        snr_ramp_simulate(plan, RampProfile{config.ramp_start_factor * std::sqrt(est.var_T())});

    const double simulated = r.delta_T_at_snr1 * r.delta_T_at_snr1 * est.n_r;
    t.rows.push_back({T, est.g, analytic, est.var_n(), simulated, simulated / analytic,
                      static_cast<double>(r.fit_points)});
  }
  check_finite(t);
  return t;
}

NoiseFile parse_noise_file(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw SchemaError(std::string("noise file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("measurements") || !j["measurements"].is_array()) {
    throw SchemaError("noise file needs a \"measurements\" array");
  }
  NoiseFile out;
  std::set<std::string> channels;
  for (const auto& m : j["measurements"]) {
    if (!m.is_object()) throw SchemaError("each measurement must be an object");
    for (const char* field : {"channel", "value", "variance", "eta"}) {
      if (!m.contains(field)) throw SchemaError(std::string("measurement missing \"") + field + "\"");
    }
    if (!m["channel"].is_string()) throw SchemaError("\"channel\" must be a string");
    for (const char* field : {"value", "variance", "eta"}) {
      if (!m[field].is_number()) throw SchemaError(std::string("\"") + field + "\" must be a number");
    }
    const auto name = m["channel"].get<std::string>();
    NoiseMeasurement nm;
    try {
      nm.channel = parse_channel(name);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
    if (!channels.insert(name).second) throw SchemaError("duplicate channel \"" + name + "\"");
    nm.value = m["value"].get<double>();
    nm.variance = m["variance"].get<double>();
    nm.eta = m["eta"].get<double>();
    out.measurements.push_back(nm);
  }
  for (const char* name : {"diff", "probe", "conj"}) {
    if (!channels.contains(name)) throw SchemaError(std::string("missing channel \"") + name + "\"");
  }
  return out;
}

NoiseFile load_noise_file(const std::filesystem::path& path) {
  return parse_noise_file(read_file(path));
}

FitConfig fit_config(const WorkbenchConfig& config, unsigned workers) {
  FitConfig f = default_fit_config();
  f.de.population = config.de_population;
  f.de.acceptance_prob = config.de_acceptance;
  f.de.spread_tol = config.de_spread_tol;
  f.de.max_generations = config.de_max_generations;
  f.de.bounds = {config.de_s, config.de_Ta};
  f.de.rng_seed = config.seed;
  f.de.workers = workers;
  f.de.record_history = false;
  f.chi.model = config.noise_model;
  f.chi.scale = config.chi_scale;
  f.uncertainty.directions = config.uncertainty_directions;
  return f;
}

FitRun cmd_fit(const NoiseFile& noise, const WorkbenchConfig& config, unsigned workers) {
  validate(config);
  FitRun run;
  run.result = fit_source(noise.measurements, fit_config(config, workers));
  const FitResult& r = run.result;
  if (!std::isfinite(r.chi2)) throw std::domain_error("fit failed: no parameter point gave a finite chi2");

  Table& t = run.table;
  t.command = "fit";
  t.columns = {"s",  "sigma_s",     "T_a", "sigma_Ta", "chi2", "generations", "population_final_spread",
               "converged"};
  t.rows.push_back({r.s, r.sigma_s, r.T_a, r.sigma_Ta, r.chi2, static_cast<double>(r.generations),
                    r.population_final_spread, r.converged ? 1.0 : 0.0});
  for (const auto& m : noise.measurements) {
    t.extra.emplace_back(std::string(to_string(m.channel)),
                         "value " + format_number(m.value) + ", variance " + format_number(m.variance) +
                             ", eta " + format_number(m.eta));
  }
  t.warnings = r.warnings;
  return run;
}

SaTimeReport cmd_sa_time(const FilterModel& filter) {
  validate(filter);
  const double t = effective_time(filter);
  return {filter_name(filter), filter.rbw, t, t * filter.rbw};
}

std::string render(const SaTimeReport& r, OutputFormat format) {
  if (format == OutputFormat::json) {
    ojson j;
    j["filter"] = r.filter;
    j["rbw"] = r.rbw;
    j["t"] = r.t;
    j["t_rbw"] = r.t_rbw;
    return j.dump(2) + "\n";
  }
  return "filter,rbw,t,t_rbw\n" + r.filter + "," + format_number(r.rbw) + "," + format_number(r.t) +
         "," + format_number(r.t_rbw) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("error while writing " + path.string());
}

std::filesystem::path output_path(const WorkbenchConfig& config, std::string_view command,
                                  const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  return std::filesystem::path(config.output_dir) /
         (std::string(command) + (config.format == OutputFormat::csv ? ".csv" : ".json"));
}

}  // namespace btmss
