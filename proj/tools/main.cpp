// relu1d command-line front end: run region/crossing/survival experiments,
// tabulate the closed-form predictions, and evaluate region-adaptive
// sparsity reports. Every run writes a manifest next to its outputs so
// results can be traced back to the exact configuration that produced them.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relu1d/errors.hpp"
#include "relu1d/gp_limit.hpp"
#include "relu1d/montecarlo.hpp"
#include "relu1d/network.hpp"
#include "relu1d/sparsity.hpp"
#include "relu1d/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

int exit_code_for(relu1d::ErrorKind kind) {
  switch (kind) {
    case relu1d::ErrorKind::io_error:
      return kExitIo;
    case relu1d::ErrorKind::invariant_error:
    case relu1d::ErrorKind::internal_error:
      return kExitInternal;
    default:
      return kExitValidation;
  }
}

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// FNV-1a over the canonical (sorted-key) JSON dump; stable across runs and
// platforms, recomputable by anyone holding the config.
std::string config_hash(const json& j) {
  const std::string bytes = j.dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string("fnv1a64:") + buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) relu1d::raise(relu1d::ErrorKind::io_error, "cannot open " + path.string());
  out << text;
  if (!out) relu1d::raise(relu1d::ErrorKind::io_error, "write failed: " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) relu1d::raise(relu1d::ErrorKind::io_error, "cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    relu1d::raise(relu1d::ErrorKind::invalid_value,
                  "bad JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

struct ManifestWriter {
  std::string command;
  json config;
  std::uint64_t base_seed = 0;
  std::string started_at = iso8601_now();
  std::vector<std::string> outputs;

  void finish(const fs::path& dir) const {
    json m{{"command", command},
           {"config_hash", config_hash(config)},
           {"base_seed", base_seed},
           {"version", relu1d::kVersion},
           {"started_at", started_at},
           {"finished_at", iso8601_now()},
           {"outputs", outputs}};
    write_text(dir / "manifest.json", m.dump(2) + "\n");
  }
};

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    relu1d::raise(relu1d::ErrorKind::io_error,
                  "cannot create output directory " + dir.string());
}

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- simulate ----

int cmd_simulate(const std::string& config_path, const fs::path& out_dir,
                 std::optional<std::uint64_t> seed_override, int threads,
                 bool keep_per_trial) {
  json config_json = read_json_file(config_path);
  if (seed_override) config_json["base_seed"] = *seed_override;
  relu1d::ExperimentConfig config = relu1d::config_from_json(config_json);

  ensure_out_dir(out_dir);
  ManifestWriter manifest{.command = "simulate",
                          .config = relu1d::config_to_json(config),
                          .base_seed = config.base_seed};

  const relu1d::ExperimentResult result = relu1d::run_experiment(config, threads);

  write_text(out_dir / "result.json",
             relu1d::result_to_json(result, keep_per_trial).dump(2) + "\n");
  manifest.outputs.push_back("result.json");
  if (keep_per_trial) {
    write_text(out_dir / "trials.csv", relu1d::per_trial_csv(result));
    manifest.outputs.push_back("trials.csv");
  }
  manifest.finish(out_dir);

  std::cout << experiment_mode_name(config.mode)
            << ": mean=" << format17(result.estimate_mean)
            << " stderr=" << format17(result.estimate_stderr)
            << " theory=" << format17(result.theory_value)
            << " z=" << format17(result.z_score) << "\n";
  return kExitOk;
}

// ---- theory ----

std::vector<int> parse_layer_range(const std::string& spec) {
  int lo = 0, hi = 0;
  const auto colon = spec.find(':');
  try {
    if (colon == std::string::npos) {
      lo = hi = std::stoi(spec);
    } else {
      lo = std::stoi(spec.substr(0, colon));
      hi = std::stoi(spec.substr(colon + 1));
    }
  } catch (const std::exception&) {
    relu1d::raise(relu1d::ErrorKind::invalid_value,
                  "layer range must be L or LO:HI, got '" + spec + "'");
  }
  if (lo < 1 || hi < lo)
    relu1d::raise(relu1d::ErrorKind::invalid_layer,
                  "layer range must satisfy 1 <= LO <= HI");
  std::vector<int> layers;
  for (int l = lo; l <= hi; ++l) layers.push_back(l);
  return layers;
}

std::vector<double> parse_grid(const std::string& spec) {
  // Either a comma list "0,0.5,1" or a range "lo:hi:count".
  std::vector<double> xs;
  try {
    if (spec.find(':') != std::string::npos) {
      std::istringstream in(spec);
      std::string a, b, c;
      std::getline(in, a, ':');
      std::getline(in, b, ':');
      std::getline(in, c);
      const double lo = std::stod(a), hi = std::stod(b);
      const int count = std::stoi(c);
      if (count < 1 || (count > 1 && !(lo < hi)))
        relu1d::raise(relu1d::ErrorKind::invalid_interval,
                      "grid range needs lo < hi and count >= 1");
      for (int i = 0; i < count; ++i)
        xs.push_back(count == 1 ? lo
                                : lo + (hi - lo) * static_cast<double>(i) /
                                           static_cast<double>(count - 1));
    } else {
      std::istringstream in(spec);
      std::string cell;
      while (std::getline(in, cell, ',')) xs.push_back(std::stod(cell));
    }
  } catch (const relu1d::Error&) {
    throw;
  } catch (const std::exception&) {
    relu1d::raise(relu1d::ErrorKind::invalid_value,
                  "grid must be 'x0,x1,...' or 'lo:hi:count', got '" + spec + "'");
  }
  if (xs.empty())
    relu1d::raise(relu1d::ErrorKind::invalid_value, "empty evaluation grid");
  return xs;
}

int cmd_theory(const std::string& layers_spec, const std::string& grid_spec,
               double sigma_b, const fs::path& out_dir) {
  const std::vector<int> layers = parse_layer_range(layers_spec);
  const std::vector<double> xs = parse_grid(grid_spec);

  ensure_out_dir(out_dir);
  ManifestWriter manifest{
      .command = "theory",
      .config = json{{"layers", layers}, {"x", xs}, {"sigma_b", sigma_b}},
      .base_seed = 0};

  std::ostringstream grid;
  grid << "layer,x,variance,density,A_coeff\n";
  for (int l : layers)
    for (double x : xs)
      grid << l << "," << format17(x) << ","
           << format17(relu1d::variance(l, x, sigma_b)) << ","
           << format17(relu1d::crossing_density(l, x, sigma_b)) << ","
           << format17(relu1d::expansion_coefficient(l, x, sigma_b)) << "\n";
  write_text(out_dir / "theory_grid.csv", grid.str());
  manifest.outputs.push_back("theory_grid.csv");

  const double inf = std::numeric_limits<double>::infinity();
  std::ostringstream crossings;
  crossings << "layer,A,B,expected_crossings\n";
  for (int l : layers) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      crossings << l << "," << format17(xs[i]) << "," << format17(xs[i + 1])
                << ","
                << format17(relu1d::expected_crossings(l, xs[i], xs[i + 1], sigma_b))
                << "\n";
    crossings << l << ",-inf,inf,"
              << format17(relu1d::expected_crossings(l, -inf, inf, sigma_b))
              << "\n";
  }
  write_text(out_dir / "theory_crossings.csv", crossings.str());
  manifest.outputs.push_back("theory_crossings.csv");

  manifest.finish(out_dir);
  std::cout << "theory: wrote " << (out_dir / "theory_grid.csv").string()
            << " and " << (out_dir / "theory_crossings.csv").string() << "\n";
  return kExitOk;
}

// ---- sparsity ----

int cmd_sparsity(const std::string& family, const std::string& target_csv,
                 double lo, double hi, int grid_points, double eps0,
                 double alpha, double c, const std::string& topology_spec,
                 const std::string& network_path,
                 std::optional<double> expected_regions_override,
                 double sigma_b, std::uint64_t seed, const fs::path& out_dir) {
  relu1d::TargetFunction target = [&] {
    if (!target_csv.empty()) {
      std::ifstream in(target_csv);
      if (!in)
        relu1d::raise(relu1d::ErrorKind::io_error, "cannot open " + target_csv);
      return relu1d::TargetFunction::from_csv(in);
    }
    return relu1d::TargetFunction::builtin(family, lo, hi, grid_points);
  }();

  // The candidate function and the expected-regions figure: either a seeded
  // network file, or a topology whose expectation comes from the closed-form
  // limit (sum of hidden widths + 1) with a freshly seeded draw as phi.
  std::optional<relu1d::NetworkParams> params;
  if (!network_path.empty()) {
    params = relu1d::network_from_json(read_json_file(network_path));
  } else if (!topology_spec.empty()) {
    std::vector<int> widths;
    std::istringstream in(topology_spec);
    std::string cell;
    try {
      while (std::getline(in, cell, ',')) widths.push_back(std::stoi(cell));
    } catch (const std::exception&) {
      relu1d::raise(relu1d::ErrorKind::invalid_value,
                    "topology must be a comma list of widths");
    }
    params = relu1d::init_network(relu1d::Topology(widths), sigma_b, seed);
  } else {
    relu1d::raise(relu1d::ErrorKind::invalid_value,
                  "need --topology or --network");
  }

  double expected_regions;
  relu1d::RegionsSource source;
  if (expected_regions_override) {
    expected_regions = *expected_regions_override;
    source = relu1d::RegionsSource::montecarlo;
  } else {
    expected_regions =
        static_cast<double>(params->topology().total_hidden()) + 1.0;
    source = relu1d::RegionsSource::theorem;
  }

  ensure_out_dir(out_dir);
  ManifestWriter manifest{
      .command = "sparsity",
      .config = json{{"target", target_csv.empty() ? family : target_csv},
                     {"domain", {target.domain_lo, target.domain_hi}},
                     {"grid_points", target.size()},
                     {"eps0", eps0},
                     {"alpha", alpha},
                     {"c", c},
                     {"topology", params->topology().hidden_widths},
                     {"sigma_b", params->sigma_b()},
                     {"expected_regions", expected_regions}},
      .base_seed = params->has_seed() ? params->seed() : 0};

  const relu1d::PwlFunction phi = relu1d::forward_pwl(*params);
  const relu1d::SparsityReport report = relu1d::check_region_adaptive_sparsity(
      phi, target, eps0, alpha, c, expected_regions, source);

  json out = relu1d::report_to_json(report);
  out["topology"] = params->topology().hidden_widths;
  if (params->has_seed()) out["seed"] = params->seed();
  write_text(out_dir / "report.json", out.dump(2) + "\n");
  manifest.outputs.push_back("report.json");
  manifest.finish(out_dir);

  std::cout << "sparsity: l_min=" << report.l_min
            << " expected_regions=" << format17(report.expected_regions)
            << " eta_region=" << format17(report.eta_region)
            << " sup_error=" << format17(report.sup_error)
            << " approximating=" << (report.approximating ? "true" : "false")
            << " region_efficient=" << (report.region_efficient ? "true" : "false")
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact piecewise-linear analysis of random ReLU networks"};
  app.set_version_flag("--version", relu1d::kVersion);
  app.require_subcommand(1);

  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", seed, "Override the base seed");
  app.add_option("--threads", threads, "Worker thread cap")
      ->check(CLI::Range(1, 4096));

  auto* simulate = app.add_subcommand(
      "simulate", "Run a Monte Carlo experiment from a JSON config");
  std::string config_path;
  bool no_per_trial = false;
  simulate->add_option("config", config_path, "Experiment config JSON")
      ->required();
  simulate->add_flag("--no-per-trial", no_per_trial,
                     "Skip per-trial values in outputs");

  auto* theory = app.add_subcommand(
      "theory", "Tabulate variance, crossing density, and expected crossings");
  std::string layers_spec = "1:3";
  std::string grid_spec = "0";
  double sigma_b = 1.0;
  theory->add_option("--layers", layers_spec, "Layer or range LO:HI")
      ->capture_default_str();
  theory->add_option("--x", grid_spec, "Grid: 'x0,x1,...' or 'lo:hi:count'")
      ->capture_default_str();
  theory->add_option("--sigma-b", sigma_b, "Bias scale")
      ->capture_default_str();

  auto* sparsity = app.add_subcommand(
      "sparsity", "Region-adaptive sparsity report for a network vs a target");
  std::string family = "abs";
  std::string target_csv;
  double lo = -1.0, hi = 1.0;
  int grid_points = 1001;
  double eps0 = 0.1, alpha = 1.0, c = 10.0;
  std::string topology_spec, network_path;
  std::optional<double> expected_regions;
  double sp_sigma_b = 1.0;
  sparsity->add_option("--target", family,
                       "Builtin target family: abs, quadratic, sine")
      ->capture_default_str();
  sparsity->add_option("--target-csv", target_csv,
                       "Read the target from a CSV (columns x,y)");
  sparsity->add_option("--domain-lo", lo, "Domain lower end")->capture_default_str();
  sparsity->add_option("--domain-hi", hi, "Domain upper end")->capture_default_str();
  sparsity->add_option("--grid-points", grid_points, "Uniform grid size")
      ->capture_default_str();
  sparsity->add_option("--eps0", eps0, "Approximation tolerance")
      ->capture_default_str();
  sparsity->add_option("--alpha", alpha, "Error allowance factor (>= 1)")
      ->capture_default_str();
  sparsity->add_option("--c", c, "Inefficiency threshold")->capture_default_str();
  sparsity->add_option("--topology", topology_spec,
                       "Hidden widths, e.g. '10' or '128,128'");
  sparsity->add_option("--network", network_path,
                       "Seeded network JSON ({topology, sigma_b, seed})");
  sparsity->add_option("--expected-regions", expected_regions,
                       "Use this estimate instead of the closed-form value");
  sparsity->add_option("--sigma-b", sp_sigma_b, "Bias scale for --topology")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (simulate->parsed())
      return cmd_simulate(config_path, out_dir, seed, threads, !no_per_trial);
    if (theory->parsed())
      return cmd_theory(layers_spec, grid_spec, sigma_b, out_dir);
    if (sparsity->parsed())
      return cmd_sparsity(family, target_csv, lo, hi, grid_points, eps0, alpha,
                          c, topology_spec, network_path, expected_regions,
                          sp_sigma_b, seed.value_or(0), out_dir);
  } catch (const relu1d::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;  // unreachable: a subcommand is required
}
