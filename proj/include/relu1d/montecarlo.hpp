#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "relu1d/network.hpp"

namespace relu1d {

enum class ExperimentMode { regions, crossings, survival };

const char* experiment_mode_name(ExperimentMode mode);
ExperimentMode experiment_mode_from_name(const std::string& name);

// A fully reproducible experiment: trial t draws its network from a key
// derived from (base_seed, t), so any subset of trials can run anywhere, in
// any order, on any number of threads, and still produce identical values.
struct ExperimentConfig {
  Topology topology{std::vector<int>{1}};
  double sigma_b = 1.0;
  std::int64_t trials = 1;
  std::uint64_t base_seed = 0;
  ExperimentMode mode = ExperimentMode::regions;

  // crossings: interval scanned for sign changes (required) and the
  // pre-activation layer (required, in [2, depth()+1]).
  std::optional<std::pair<double, double>> interval;
  std::optional<int> target_layer;
  // crossings: neurons averaged per sampled network (counts within one
  // network are correlated, so the trial statistic is the per-network mean).
  int neurons = 1;
  // First trial index; lets a big run be split into disjoint chunks that
  // merge back into the sequential result bit for bit.
  std::int64_t trial_offset = 0;

  void validate() const;
  bool mergeable_with(const ExperimentConfig& other) const;
};

struct ExperimentResult {
  ExperimentConfig config;
  double estimate_mean = 0.0;
  double estimate_stderr = 0.0;  // sample std / sqrt(trials); 0 for one trial
  std::int64_t trials_completed = 0;
  double theory_value = 0.0;
  double z_score = 0.0;
  std::vector<double> per_trial_values;  // index i holds trial trial_offset+i
};

// Mean breakpoint count over sampled networks; theory = sum of hidden widths.
ExperimentResult run_regions(const ExperimentConfig& config, int threads = 1);

// Mean sign-change count of target-layer pre-activations over the interval,
// averaged over `neurons` per network; theory = expected_crossings at the
// pre-activation's own layer index. Layer 1 pre-activations are affine in
// each region of interest and rejected.
ExperimentResult run_crossings(const ExperimentConfig& config, int threads = 1);

// Fraction of kinks created at the target layer (default 1) that survive to
// the output; theory = product over downstream hidden layers of
// (1 - 2^-width). Needs at least two hidden layers.
ExperimentResult run_survival(const ExperimentConfig& config, int threads = 1);

ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

// Pool results of the same experiment over disjoint trial ranges. Ordering
// trials canonically by (base_seed, index) makes the pooled mean and stderr
// bit-identical to the sequential run over the union.
ExperimentResult merge(std::span<const ExperimentResult> parts);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json result_to_json(const ExperimentResult& result,
                              bool include_per_trial = true);
ExperimentResult result_from_json(const nlohmann::json& j);

// CSV with header "trial,value", one row per trial.
std::string per_trial_csv(const ExperimentResult& result);

}  // namespace relu1d
