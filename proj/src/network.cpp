#include "relu1d/network.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "relu1d/rng.hpp"

namespace relu1d {

namespace {

// Key tags keep weight and bias streams disjoint.
constexpr std::uint64_t kWeightTag = 0x57;  // 'W'
constexpr std::uint64_t kBiasTag = 0x42;    // 'B'

}  // namespace

Topology::Topology(std::vector<int> widths) : hidden_widths(std::move(widths)) {
  if (hidden_widths.empty())
    raise(ErrorKind::invalid_value, "need at least one hidden layer");
  for (int w : hidden_widths)
    if (w < 1)
      raise(ErrorKind::invalid_value, "hidden widths must be >= 1");
}

int Topology::width(int layer) const {
  if (layer < 0 || layer > depth() + 1)
    raise(ErrorKind::index_error,
          "layer " + std::to_string(layer) + " out of [0, " +
              std::to_string(depth() + 1) + "]");
  if (layer == 0 || layer == depth() + 1) return 1;
  return hidden_widths[static_cast<std::size_t>(layer - 1)];
}

long long Topology::total_hidden() const noexcept {
  long long total = 0;
  for (int w : hidden_widths) total += w;
  return total;
}

NetworkParams::NetworkParams(Topology topology, double sigma_b)
    : topology_(std::move(topology)), sigma_b_(sigma_b) {
  if (!(sigma_b_ > 0.0) || !std::isfinite(sigma_b_))
    raise(ErrorKind::invalid_sigma, "sigma_b must be strictly positive");
}

NetworkParams::NetworkParams(Topology topology, double sigma_b,
                             std::uint64_t seed)
    : NetworkParams(std::move(topology), sigma_b) {
  seed_ = seed;
  has_seed_ = true;
  const int layers = topology_.depth() + 1;
  weights_.resize(static_cast<std::size_t>(layers));
  biases_.resize(static_cast<std::size_t>(layers));
  for (int l = 1; l <= layers; ++l) {
    const int rows = topology_.width(l);
    const int cols = topology_.width(l - 1);
    const double w_scale = std::sqrt(2.0 / static_cast<double>(cols));
    auto& w = weights_[static_cast<std::size_t>(l - 1)];
    auto& b = biases_[static_cast<std::size_t>(l - 1)];
    w.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    b.resize(static_cast<std::size_t>(rows));
    for (int j = 0; j < rows; ++j) {
      for (int i = 0; i < cols; ++i) {
        const std::uint64_t key = rng::derive_key(
            seed, {kWeightTag, static_cast<std::uint64_t>(l),
                   static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i)});
        w[static_cast<std::size_t>(j) * static_cast<std::size_t>(cols) +
          static_cast<std::size_t>(i)] = w_scale * rng::standard_normal(key);
      }
      const std::uint64_t key = rng::derive_key(
          seed, {kBiasTag, static_cast<std::uint64_t>(l),
                 static_cast<std::uint64_t>(j)});
      b[static_cast<std::size_t>(j)] = sigma_b_ * rng::standard_normal(key);
    }
  }
}

NetworkParams NetworkParams::from_values(
    Topology topology, std::vector<std::vector<double>> weights,
    std::vector<std::vector<double>> biases, double sigma_b) {
  NetworkParams p(std::move(topology), sigma_b);
  const int layers = p.topology_.depth() + 1;
  if (weights.size() != static_cast<std::size_t>(layers) ||
      biases.size() != static_cast<std::size_t>(layers))
    raise(ErrorKind::shape_error, "need one weight matrix and one bias vector per layer");
  for (int l = 1; l <= layers; ++l) {
    const std::size_t rows = static_cast<std::size_t>(p.topology_.width(l));
    const std::size_t cols = static_cast<std::size_t>(p.topology_.width(l - 1));
    if (weights[static_cast<std::size_t>(l - 1)].size() != rows * cols)
      raise(ErrorKind::shape_error,
            "layer " + std::to_string(l) + " weights must be " +
                std::to_string(rows) + "x" + std::to_string(cols));
    if (biases[static_cast<std::size_t>(l - 1)].size() != rows)
      raise(ErrorKind::shape_error,
            "layer " + std::to_string(l) + " biases must have length " +
                std::to_string(rows));
  }
  p.weights_ = std::move(weights);
  p.biases_ = std::move(biases);
  return p;
}

std::uint64_t NetworkParams::seed() const {
  if (!has_seed_)
    raise(ErrorKind::invalid_value, "hand-built parameters carry no seed");
  return seed_;
}

void NetworkParams::check_layer(int layer) const {
  if (layer < 1 || layer > topology_.depth() + 1)
    raise(ErrorKind::index_error,
          "layer " + std::to_string(layer) + " out of [1, " +
              std::to_string(topology_.depth() + 1) + "]");
}

double NetworkParams::weight(int layer, int row, int col) const {
  check_layer(layer);
  const int rows = topology_.width(layer);
  const int cols = topology_.width(layer - 1);
  if (row < 0 || row >= rows || col < 0 || col >= cols)
    raise(ErrorKind::index_error, "weight index out of range");
  return weights_[static_cast<std::size_t>(layer - 1)]
                 [static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
                  static_cast<std::size_t>(col)];
}

double NetworkParams::bias(int layer, int row) const {
  check_layer(layer);
  if (row < 0 || row >= topology_.width(layer))
    raise(ErrorKind::index_error, "bias index out of range");
  return biases_[static_cast<std::size_t>(layer - 1)][static_cast<std::size_t>(row)];
}

NetworkParams init_network(const Topology& topology, double sigma_b,
                           std::uint64_t seed) {
  return NetworkParams(topology, sigma_b, seed);
}

namespace {

// Pre-activations of `layer` given the activations of layer-1.
std::vector<PwlFunction> layer_preactivations(const NetworkParams& params,
                                              int layer,
                                              const std::vector<PwlFunction>& prev) {
  const int rows = params.topology().width(layer);
  const int cols = params.topology().width(layer - 1);
  std::vector<PwlFunction> out;
  out.reserve(static_cast<std::size_t>(rows));
  std::vector<double> row_coeffs(static_cast<std::size_t>(cols));
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i)
      row_coeffs[static_cast<std::size_t>(i)] = params.weight(layer, j, i);
    out.push_back(linear_combine(row_coeffs, prev, params.bias(layer, j)));
  }
  return out;
}

// Activations of hidden layer `upto` (upto = 0 gives the input identity).
std::vector<PwlFunction> activations_upto(const NetworkParams& params, int upto) {
  std::vector<PwlFunction> act{PwlFunction::affine(1.0, 0.0)};
  for (int l = 1; l <= upto; ++l) {
    auto pre = layer_preactivations(params, l, act);
    act.clear();
    act.reserve(pre.size());
    for (auto& s : pre) act.push_back(relu(s));
  }
  return act;
}

}  // namespace

PwlFunction preactivation_pwl(const NetworkParams& params, int layer,
                              int neuron) {
  const int depth = params.topology().depth();
  if (layer < 1 || layer > depth + 1)
    raise(ErrorKind::index_error,
          "layer " + std::to_string(layer) + " out of [1, " +
              std::to_string(depth + 1) + "]");
  const int rows = params.topology().width(layer);
  if (neuron < 0 || neuron >= rows)
    raise(ErrorKind::index_error, "neuron index out of range");
  const auto prev = activations_upto(params, layer - 1);
  const int cols = params.topology().width(layer - 1);
  std::vector<double> coeffs(static_cast<std::size_t>(cols));
  for (int i = 0; i < cols; ++i)
    coeffs[static_cast<std::size_t>(i)] = params.weight(layer, neuron, i);
  return linear_combine(coeffs, prev, params.bias(layer, neuron));
}

std::vector<PwlFunction> preactivations_at(const NetworkParams& params,
                                           int layer) {
  const int depth = params.topology().depth();
  if (layer < 1 || layer > depth + 1)
    raise(ErrorKind::index_error,
          "layer " + std::to_string(layer) + " out of [1, " +
              std::to_string(depth + 1) + "]");
  return layer_preactivations(params, layer, activations_upto(params, layer - 1));
}

PwlFunction forward_pwl(const NetworkParams& params) {
  const int depth = params.topology().depth();
  auto act = activations_upto(params, depth);
  return layer_preactivations(params, depth + 1, act).front();
}

ForwardTrace forward_trace(const NetworkParams& params) {
  const int depth = params.topology().depth();
  ForwardTrace trace;
  trace.pre.reserve(static_cast<std::size_t>(depth + 1));
  trace.post.reserve(static_cast<std::size_t>(depth));
  std::vector<PwlFunction> act{PwlFunction::affine(1.0, 0.0)};
  for (int l = 1; l <= depth; ++l) {
    trace.pre.push_back(layer_preactivations(params, l, act));
    act.clear();
    act.reserve(trace.pre.back().size());
    for (const auto& s : trace.pre.back()) act.push_back(relu(s));
    trace.post.push_back(act);
  }
  trace.pre.push_back(layer_preactivations(params, depth + 1, act));
  return trace;
}

long long count_regions(const NetworkParams& params) {
  return static_cast<long long>(forward_pwl(params).breakpoint_count()) + 1;
}

nlohmann::json network_to_json(const NetworkParams& params) {
  return nlohmann::json{{"topology", params.topology().hidden_widths},
                        {"sigma_b", params.sigma_b()},
                        {"seed", params.seed()}};
}

NetworkParams network_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("topology") || !j.contains("sigma_b") ||
      !j.contains("seed"))
    raise(ErrorKind::invalid_value,
          "expected object with topology, sigma_b, seed");
  Topology topo(j.at("topology").get<std::vector<int>>());
  return init_network(topo, j.at("sigma_b").get<double>(),
                      j.at("seed").get<std::uint64_t>());
}

nlohmann::json network_debug_json(const NetworkParams& params) {
  nlohmann::json layers = nlohmann::json::array();
  const int depth = params.topology().depth();
  for (int l = 1; l <= depth + 1; ++l) {
    const int rows = params.topology().width(l);
    const int cols = params.topology().width(l - 1);
    nlohmann::json w = nlohmann::json::array();
    nlohmann::json b = nlohmann::json::array();
    for (int j = 0; j < rows; ++j) {
      nlohmann::json row = nlohmann::json::array();
      for (int i = 0; i < cols; ++i) row.push_back(params.weight(l, j, i));
      w.push_back(std::move(row));
      b.push_back(params.bias(l, j));
    }
    layers.push_back({{"layer", l}, {"weights", std::move(w)}, {"biases", std::move(b)}});
  }
  nlohmann::json out{{"topology", params.topology().hidden_widths},
                     {"sigma_b", params.sigma_b()},
                     {"layers", std::move(layers)}};
  if (params.has_seed()) out["seed"] = params.seed();
  return out;
}

}  // namespace relu1d
