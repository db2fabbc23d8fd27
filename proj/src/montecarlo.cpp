#include "relu1d/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "relu1d/gp_limit.hpp"
#include "relu1d/rng.hpp"

namespace relu1d {

namespace {

constexpr std::uint64_t kTrialTag = 0x54;  // 'T'

std::uint64_t trial_seed(std::uint64_t base_seed, std::int64_t trial) {
  return rng::derive_key(base_seed,
                         {kTrialTag, static_cast<std::uint64_t>(trial)});
}

struct Moments {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Plain left-to-right two-pass moments; merge() relies on reproducing this
// exact summation order.
Moments compute_moments(const std::vector<double>& values) {
  Moments m;
  const std::size_t n = values.size();
  if (n == 0) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.stderr_ = std::sqrt(ss / static_cast<double>(n - 1)) /
                std::sqrt(static_cast<double>(n));
  }
  return m;
}

double z_score_of(double mean, double theory, double stderr_) {
  if (stderr_ > 0.0) return (mean - theory) / stderr_;
  if (mean == theory) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), mean - theory);
}

ExperimentResult run_trials(const ExperimentConfig& config, int threads,
                            double theory,
                            const std::function<double(const NetworkParams&)>& trial_fn) {
  const std::int64_t n = config.trials;
  std::vector<double> values(static_cast<std::size_t>(n));
  auto work = [&](std::int64_t t) {
    const NetworkParams params(
        config.topology, config.sigma_b,
        trial_seed(config.base_seed, config.trial_offset + t));
    values[static_cast<std::size_t>(t)] = trial_fn(params);
  };
  if (threads <= 1 || n == 1) {
    for (std::int64_t t = 0; t < n; ++t) work(t);
  } else {
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
      for (std::int64_t t = next.fetch_add(1); t < n; t = next.fetch_add(1))
        work(t);
    };
    const int nthreads = std::min<std::int64_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  result.config = config;
  result.trials_completed = n;
  result.theory_value = theory;
  const Moments m = compute_moments(values);
  result.estimate_mean = m.mean;
  result.estimate_stderr = m.stderr_;
  result.z_score = z_score_of(m.mean, theory, m.stderr_);
  result.per_trial_values = std::move(values);
  return result;
}

}  // namespace

const char* experiment_mode_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::regions: return "regions";
    case ExperimentMode::crossings: return "crossings";
    case ExperimentMode::survival: return "survival";
  }
  raise(ErrorKind::internal_error, "unknown experiment mode");
}

ExperimentMode experiment_mode_from_name(const std::string& name) {
  if (name == "regions") return ExperimentMode::regions;
  if (name == "crossings") return ExperimentMode::crossings;
  if (name == "survival") return ExperimentMode::survival;
  raise(ErrorKind::invalid_value, "unknown experiment mode '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (!(sigma_b > 0.0) || !std::isfinite(sigma_b))
    raise(ErrorKind::invalid_sigma, "sigma_b must be strictly positive");
  if (trials < 1)
    raise(ErrorKind::invalid_value, "trials must be >= 1");
  if (trial_offset < 0)
    raise(ErrorKind::invalid_value, "trial_offset must be >= 0");
  const int depth = topology.depth();
  if (mode == ExperimentMode::crossings) {
    if (!interval)
      raise(ErrorKind::invalid_interval, "crossings mode needs an interval");
    const auto [lo, hi] = *interval;
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      raise(ErrorKind::invalid_interval, "interval must be finite with lo < hi");
    if (!target_layer)
      raise(ErrorKind::invalid_value, "crossings mode needs target_layer");
    if (*target_layer == 1)
      raise(ErrorKind::first_layer_affine,
            "layer-1 pre-activations are affine; crossings start at layer 2");
    if (*target_layer < 2 || *target_layer > depth + 1)
      raise(ErrorKind::index_error,
            "target_layer must lie in [2, depth+1]");
    if (neurons < 1 || neurons > topology.width(*target_layer))
      raise(ErrorKind::index_error,
            "neurons must lie in [1, width(target_layer)]");
  }
  if (mode == ExperimentMode::survival) {
    if (depth < 2)
      raise(ErrorKind::nothing_to_propagate,
            "survival needs at least two hidden layers");
    const int layer = target_layer.value_or(1);
    if (layer < 1 || layer > depth)
      raise(ErrorKind::index_error, "target_layer must lie in [1, depth]");
  }
}

bool ExperimentConfig::mergeable_with(const ExperimentConfig& other) const {
  return mode == other.mode && topology == other.topology &&
         sigma_b == other.sigma_b && interval == other.interval &&
         target_layer == other.target_layer && neurons == other.neurons;
}

ExperimentResult run_regions(const ExperimentConfig& config, int threads) {
  config.validate();
  if (config.mode != ExperimentMode::regions)
    raise(ErrorKind::invalid_value, "config mode is not 'regions'");
  const double theory = static_cast<double>(config.topology.total_hidden());
  return run_trials(config, threads, theory, [](const NetworkParams& params) {
    return static_cast<double>(count_regions(params) - 1);
  });
}

ExperimentResult run_crossings(const ExperimentConfig& config, int threads) {
  config.validate();
  if (config.mode != ExperimentMode::crossings)
    raise(ErrorKind::invalid_value, "config mode is not 'crossings'");
  const int layer = *config.target_layer;
  const auto [lo, hi] = *config.interval;
  const int neurons = config.neurons;
  // The prediction is indexed by the pre-activation's own layer.
  const double theory = expected_crossings(layer, lo, hi, config.sigma_b);
  return run_trials(config, threads, theory, [=](const NetworkParams& params) {
    const auto pres = preactivations_at(params, layer);
    double sum = 0.0;
    for (int j = 0; j < neurons; ++j)
      sum += static_cast<double>(
          count_sign_changes(pres[static_cast<std::size_t>(j)], lo, hi));
    return sum / static_cast<double>(neurons);
  });
}

ExperimentResult run_survival(const ExperimentConfig& config, int threads) {
  config.validate();
  if (config.mode != ExperimentMode::survival)
    raise(ErrorKind::invalid_value, "config mode is not 'survival'");
  const int layer = config.target_layer.value_or(1);
  const int depth = config.topology.depth();
  double theory = 1.0;
  for (int m = layer + 1; m <= depth; ++m)
    theory *= 1.0 - std::exp2(static_cast<double>(-config.topology.width(m)));
  return run_trials(config, threads, theory, [=](const NetworkParams& params) {
    const ForwardTrace trace = forward_trace(params);
    // Kinks created by this layer's ReLU: knots of the post-activation that
    // the pre-activation did not already have. Knot coordinates are copied
    // verbatim through downstream combinations, so exact membership in the
    // output knot set decides survival.
    const auto& pre = trace.pre[static_cast<std::size_t>(layer - 1)];
    const auto& post = trace.post[static_cast<std::size_t>(layer - 1)];
    std::vector<double> created;
    for (std::size_t j = 0; j < post.size(); ++j) {
      const auto& old_knots = pre[j].knots();
      for (double x : post[j].knots())
        if (!std::binary_search(old_knots.begin(), old_knots.end(), x))
          created.push_back(x);
    }
    if (created.empty()) return 1.0;  // nothing to lose
    const auto& out_knots = trace.output().knots();
    std::int64_t survived = 0;
    for (double x : created)
      if (std::binary_search(out_knots.begin(), out_knots.end(), x)) ++survived;
    return static_cast<double>(survived) / static_cast<double>(created.size());
  });
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  switch (config.mode) {
    case ExperimentMode::regions: return run_regions(config, threads);
    case ExperimentMode::crossings: return run_crossings(config, threads);
    case ExperimentMode::survival: return run_survival(config, threads);
  }
  raise(ErrorKind::internal_error, "unknown experiment mode");
}

ExperimentResult merge(std::span<const ExperimentResult> parts) {
  if (parts.empty())
    raise(ErrorKind::config_mismatch, "nothing to merge");
  const ExperimentConfig& first = parts[0].config;
  for (const auto& part : parts) {
    if (!part.config.mergeable_with(first))
      raise(ErrorKind::config_mismatch,
            "experiment configs differ in more than seed/trial range");
    if (part.theory_value != parts[0].theory_value)
      raise(ErrorKind::config_mismatch, "theory values differ");
    if (static_cast<std::int64_t>(part.per_trial_values.size()) !=
        part.trials_completed)
      raise(ErrorKind::config_mismatch,
            "merge needs per-trial values for every part");
  }

  struct Tagged {
    std::uint64_t seed;
    std::int64_t index;
    double value;
  };
  std::vector<Tagged> all;
  for (const auto& part : parts)
    for (std::int64_t i = 0; i < part.trials_completed; ++i)
      all.push_back({part.config.base_seed, part.config.trial_offset + i,
                     part.per_trial_values[static_cast<std::size_t>(i)]});
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) {
    return a.seed != b.seed ? a.seed < b.seed : a.index < b.index;
  });
  for (std::size_t i = 1; i < all.size(); ++i)
    if (all[i].seed == all[i - 1].seed && all[i].index == all[i - 1].index)
      raise(ErrorKind::config_mismatch, "trial index sets overlap");

  ExperimentResult merged;
  merged.config = first;
  merged.config.trials = static_cast<std::int64_t>(all.size());
  merged.config.trial_offset = all.front().index;
  merged.config.base_seed = all.front().seed;
  merged.theory_value = parts[0].theory_value;
  merged.trials_completed = static_cast<std::int64_t>(all.size());
  merged.per_trial_values.reserve(all.size());
  for (const auto& t : all) merged.per_trial_values.push_back(t.value);
  const Moments m = compute_moments(merged.per_trial_values);
  merged.estimate_mean = m.mean;
  merged.estimate_stderr = m.stderr_;
  merged.z_score = z_score_of(m.mean, merged.theory_value, m.stderr_);
  return merged;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json j{{"mode", experiment_mode_name(config.mode)},
                   {"topology", config.topology.hidden_widths},
                   {"sigma_b", config.sigma_b},
                   {"trials", config.trials},
                   {"base_seed", config.base_seed}};
  if (config.interval)
    j["interval"] = {config.interval->first, config.interval->second};
  if (config.target_layer) j["target_layer"] = *config.target_layer;
  if (config.neurons != 1) j["neurons"] = config.neurons;
  if (config.trial_offset != 0) j["trial_offset"] = config.trial_offset;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    raise(ErrorKind::invalid_value, "experiment config must be an object");
  for (const char* key : {"mode", "topology", "sigma_b", "trials", "base_seed"})
    if (!j.contains(key))
      raise(ErrorKind::invalid_value,
            std::string("experiment config missing '") + key + "'");
  ExperimentConfig config;
  config.mode = experiment_mode_from_name(j.at("mode").get<std::string>());
  config.topology = Topology(j.at("topology").get<std::vector<int>>());
  config.sigma_b = j.at("sigma_b").get<double>();
  config.trials = j.at("trials").get<std::int64_t>();
  config.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("interval")) {
    const auto iv = j.at("interval").get<std::vector<double>>();
    if (iv.size() != 2)
      raise(ErrorKind::invalid_interval, "interval must be [lo, hi]");
    config.interval = {iv[0], iv[1]};
  }
  if (j.contains("target_layer"))
    config.target_layer = j.at("target_layer").get<int>();
  if (j.contains("neurons")) config.neurons = j.at("neurons").get<int>();
  if (j.contains("trial_offset"))
    config.trial_offset = j.at("trial_offset").get<std::int64_t>();
  config.validate();
  return config;
}

namespace {

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::json result_to_json(const ExperimentResult& result,
                              bool include_per_trial) {
  nlohmann::json j{{"config", config_to_json(result.config)},
                   {"estimate_mean", result.estimate_mean},
                   {"estimate_stderr", result.estimate_stderr},
                   {"trials_completed", result.trials_completed},
                   {"theory_value", result.theory_value},
                   {"z_score", finite_or_null(result.z_score)}};
  if (result.theory_value != 0.0)
    j["ratio_to_theory"] = result.estimate_mean / result.theory_value;
  if (include_per_trial) j["per_trial_values"] = result.per_trial_values;
  return j;
}

ExperimentResult result_from_json(const nlohmann::json& j) {
  ExperimentResult r;
  r.config = config_from_json(j.at("config"));
  r.estimate_mean = j.at("estimate_mean").get<double>();
  r.estimate_stderr = j.at("estimate_stderr").get<double>();
  r.trials_completed = j.at("trials_completed").get<std::int64_t>();
  r.theory_value = j.at("theory_value").get<double>();
  if (j.contains("z_score") && j.at("z_score").is_number())
    r.z_score = j.at("z_score").get<double>();
  else
    r.z_score = z_score_of(r.estimate_mean, r.theory_value, r.estimate_stderr);
  if (j.contains("per_trial_values"))
    r.per_trial_values = j.at("per_trial_values").get<std::vector<double>>();
  return r;
}

std::string per_trial_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "trial,value\n";
  for (std::size_t i = 0; i < result.per_trial_values.size(); ++i)
    out << result.config.trial_offset + static_cast<std::int64_t>(i) << ","
        << result.per_trial_values[i] << "\n";
  return out.str();
}

}  // namespace relu1d
