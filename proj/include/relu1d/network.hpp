#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "relu1d/errors.hpp"
#include "relu1d/pwl.hpp"

namespace relu1d {

// Fully connected scalar-in scalar-out ReLU network: 1 -> n_1 -> ... -> n_L -> 1,
// ReLU after every hidden layer, linear output. Layers are indexed 1..L+1,
// where layer l maps activations of width n_{l-1} to pre-activations of
// width n_l (layer L+1 being the output layer of width 1).
struct Topology {
  std::vector<int> hidden_widths;

  explicit Topology(std::vector<int> widths);

  int depth() const noexcept { return static_cast<int>(hidden_widths.size()); }
  // Width of layer l for l in [0, depth()+1]; layer 0 is the input.
  int width(int layer) const;
  long long total_hidden() const noexcept;
  bool operator==(const Topology&) const = default;
};

// One concrete draw of weights and biases. Weights are sampled
// N(0, 2/fan_in), biases N(0, sigma_b^2), each variate keyed by
// (seed, layer, row, col), so the same (topology, sigma_b, seed) always
// regenerates bit-identical parameters regardless of traversal or threading.
class NetworkParams {
public:
  NetworkParams(Topology topology, double sigma_b, std::uint64_t seed);

  // Explicit parameters (for hand-built fixtures); such instances carry no
  // seed and refuse compact serialization.
  static NetworkParams from_values(Topology topology,
                                   std::vector<std::vector<double>> weights,
                                   std::vector<std::vector<double>> biases,
                                   double sigma_b);

  const Topology& topology() const noexcept { return topology_; }
  double sigma_b() const noexcept { return sigma_b_; }
  bool has_seed() const noexcept { return has_seed_; }
  std::uint64_t seed() const;

  // layer in [1, depth()+1]; weight matrices are row-major n_l x n_{l-1}.
  double weight(int layer, int row, int col) const;
  double bias(int layer, int row) const;

private:
  NetworkParams(Topology topology, double sigma_b);

  Topology topology_;
  double sigma_b_;
  std::uint64_t seed_ = 0;
  bool has_seed_ = false;
  std::vector<std::vector<double>> weights_;  // [layer-1], row-major
  std::vector<std::vector<double>> biases_;   // [layer-1]

  void check_layer(int layer) const;
};

NetworkParams init_network(const Topology& topology, double sigma_b,
                           std::uint64_t seed);

// Exact piecewise-linear propagation. Memory grows with the total number of
// breakpoints, which is at most (number of first-layer kinks) plus every
// downstream zero crossing; expected totals stay near the sum of hidden
// widths, so traces for the widths used here are small.
PwlFunction forward_pwl(const NetworkParams& params);

// Pre-activation of one neuron: layer in [1, depth()+1], neuron in [0, n_l).
PwlFunction preactivation_pwl(const NetworkParams& params, int layer,
                              int neuron);

// All pre-activations of one layer (shares the propagation work).
std::vector<PwlFunction> preactivations_at(const NetworkParams& params,
                                           int layer);

// Pre- and post-activations of every layer plus the output, for analyses
// that need to see where kinks are created and which ones reach the output.
struct ForwardTrace {
  std::vector<std::vector<PwlFunction>> pre;   // [l-1][j], l = 1..depth()+1
  std::vector<std::vector<PwlFunction>> post;  // [l-1][j], l = 1..depth()
  const PwlFunction& output() const { return pre.back().front(); }
};

ForwardTrace forward_trace(const NetworkParams& params);

// Linear regions of the input-output map: breakpoints + 1.
long long count_regions(const NetworkParams& params);

// Compact JSON ({"topology": [...], "sigma_b": s, "seed": n}) for seeded
// networks; parameters are regenerated on load.
nlohmann::json network_to_json(const NetworkParams& params);
NetworkParams network_from_json(const nlohmann::json& j);

// Full parameter dump (weights and biases spelled out), for debugging.
nlohmann::json network_debug_json(const NetworkParams& params);

}  // namespace relu1d
