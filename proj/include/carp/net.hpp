#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carp/dataset.hpp"
#include "carp/geometry.hpp"

namespace carp {

// Dense row-major tensor.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel(), 0.0);
  }
  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
  bool empty() const { return data.empty(); }
};

struct LayerSpec {
  enum class Type { Conv3d, Relu, Flatten, Dense, Sigmoid };
  Type type = Type::Relu;
  // Conv3d
  int in_channels = 0, out_channels = 0, kernel = 1, stride = 1;
  // Dense
  int in_features = 0, out_features = 0;

  static LayerSpec conv3d(int in_ch, int out_ch, int kernel, int stride);
  static LayerSpec relu() { return LayerSpec{Type::Relu}; }
  static LayerSpec flatten() { return LayerSpec{Type::Flatten}; }
  static LayerSpec dense(int out_features);  // in_features resolved at build
  static LayerSpec sigmoid() { return LayerSpec{Type::Sigmoid}; }
};

enum class ModelKind : std::uint8_t { Carp = 0, Gsp = 1 };

// A small feed-forward stack ending in a scalar sigmoid. Weights live in
// per-layer tensors (empty for parameter-free layers).
struct Model {
  ModelKind kind = ModelKind::Carp;
  std::array<int, 4> input_shape{1, 40, 40, 40};  // (channels, x, y, z)
  std::vector<LayerSpec> layers;
  std::vector<Tensor> weights;  // Conv3d: (out,in,k,k,k); Dense: (out,in)
  std::vector<Tensor> biases;   // (out)
  bool trained = false;
};

// Resolves dense input widths against the input shape, validates the chain
// ends in a single sigmoid unit, and initializes weights uniformly in
// +-sqrt(6/(fan_in+fan_out)) from `seed` (biases zero).
Model build_model(ModelKind kind, const std::vector<LayerSpec>& layers,
                  const std::array<int, 4>& input_shape, std::uint64_t seed);

// The default architecture used for both predictors.
std::vector<LayerSpec> default_arch();

Tensor to_input_tensor(const VoxelGrid& grid);

// Scalar probability, clamped to [1e-7, 1-1e-7]. Throws InputError on a
// shape mismatch.
double predict(const Model& model, const Tensor& input);
std::vector<double> predict_batch(const Model& model,
                                  const std::vector<const VoxelGrid*>& grids);

double bce_loss(double prediction, int label);

struct Gradients {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
};

// Sum-reduced gradients of bce_loss over a batch of inputs (analytic
// backprop through every layer). Outputs the mean loss if requested.
Gradients backward_batch(const Model& model, const std::vector<Tensor>& inputs,
                         const std::vector<int>& labels,
                         double* mean_loss = nullptr);

struct TrainConfig {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;
  double val_accuracy = 0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = 0;
  double best_val_accuracy = 0;
};

// Minibatch SGD with momentum; deterministic given the seed. The model is
// left holding the best-validation-accuracy weights.
TrainHistory train(Model& model, const std::vector<LabeledSample>& dataset,
                   const TrainConfig& config);

struct Metrics {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
};

// Threshold fixed at 0.5; a prediction of exactly 0.5 classifies as 0.
Metrics evaluate(const Model& model, const std::vector<LabeledSample>& dataset);

}  // namespace carp
