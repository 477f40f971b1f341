#include "carp/net.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "carp/errors.hpp"
#include "carp/rng.hpp"

namespace carp {

namespace {

constexpr double kProbClamp = 1e-7;

using MatrixRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixCM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

// Spatial shape tracking through the stack. Activations are stored as
// (channels x batch*voxels) row-major matrices; dense features as
// (features x batch).
struct StageShape {
  bool spatial = true;
  int channels = 0;
  int dx = 0, dy = 0, dz = 0;  // spatial dims (valid when spatial)
  int features = 0;            // valid when !spatial

  std::size_t per_example() const {
    return spatial ? static_cast<std::size_t>(dx) * dy * dz
                   : static_cast<std::size_t>(1);
  }
  int rows() const { return spatial ? channels : features; }
};

StageShape input_stage(const std::array<int, 4>& in) {
  StageShape s;
  s.spatial = true;
  s.channels = in[0];
  s.dx = in[1];
  s.dy = in[2];
  s.dz = in[3];
  return s;
}

int conv_out_dim(int in, int k, int s) { return (in - k) / s + 1; }

StageShape next_stage(const StageShape& cur, const LayerSpec& layer) {
  StageShape s = cur;
  switch (layer.type) {
    case LayerSpec::Type::Conv3d:
      if (!cur.spatial) throw InputError("conv3d after flatten");
      if (cur.channels != layer.in_channels)
        throw InputError("conv3d channel mismatch");
      if (cur.dx < layer.kernel || cur.dy < layer.kernel || cur.dz < layer.kernel)
        throw InputError("conv3d kernel larger than input");
      s.channels = layer.out_channels;
      s.dx = conv_out_dim(cur.dx, layer.kernel, layer.stride);
      s.dy = conv_out_dim(cur.dy, layer.kernel, layer.stride);
      s.dz = conv_out_dim(cur.dz, layer.kernel, layer.stride);
      break;
    case LayerSpec::Type::Flatten:
      if (!cur.spatial) throw InputError("flatten after flatten");
      s.spatial = false;
      s.features = static_cast<int>(cur.channels * cur.per_example());
      break;
    case LayerSpec::Type::Dense:
      if (cur.spatial) throw InputError("dense requires flattened input");
      if (cur.features != layer.in_features) throw InputError("dense width mismatch");
      s.features = layer.out_features;
      break;
    case LayerSpec::Type::Relu:
    case LayerSpec::Type::Sigmoid:
      break;
  }
  return s;
}

// im2col for one example inside a packed batch matrix. `in` points at the
// example's first voxel of channel 0; channel rows are `chan_stride` apart.
// Output (Ck^3 x Vout) column-major so each output voxel's patch is a
// contiguous column; kz runs are memcpy'd.
void im2col(const double* in, std::size_t chan_stride, const StageShape& shape,
            int k, int s, const StageShape& out_shape, MatrixCM& col) {
  const int C = shape.channels;
  const std::size_t in_yz = static_cast<std::size_t>(shape.dy) * shape.dz;
  std::size_t c_idx = 0;
  for (int ox = 0; ox < out_shape.dx; ++ox)
    for (int oy = 0; oy < out_shape.dy; ++oy)
      for (int oz = 0; oz < out_shape.dz; ++oz, ++c_idx) {
        double* dst = col.data() + c_idx * col.rows();
        for (int ic = 0; ic < C; ++ic) {
          const double* chan = in + ic * chan_stride;
          for (int kx = 0; kx < k; ++kx) {
            const std::size_t x_off = static_cast<std::size_t>(ox * s + kx) * in_yz;
            for (int ky = 0; ky < k; ++ky) {
              const double* src =
                  chan + x_off + static_cast<std::size_t>(oy * s + ky) * shape.dz +
                  static_cast<std::size_t>(oz * s);
              std::memcpy(dst, src, static_cast<std::size_t>(k) * sizeof(double));
              dst += k;
            }
          }
        }
      }
}

void col2im_add(const MatrixCM& col, std::size_t chan_stride,
                const StageShape& shape, int k, int s,
                const StageShape& out_shape, double* din) {
  const int C = shape.channels;
  const std::size_t in_yz = static_cast<std::size_t>(shape.dy) * shape.dz;
  std::size_t c_idx = 0;
  for (int ox = 0; ox < out_shape.dx; ++ox)
    for (int oy = 0; oy < out_shape.dy; ++oy)
      for (int oz = 0; oz < out_shape.dz; ++oz, ++c_idx) {
        const double* src_col = col.data() + c_idx * col.rows();
        for (int ic = 0; ic < C; ++ic) {
          double* chan = din + ic * chan_stride;
          for (int kx = 0; kx < k; ++kx) {
            const std::size_t x_off = static_cast<std::size_t>(ox * s + kx) * in_yz;
            for (int ky = 0; ky < k; ++ky) {
              double* dst =
                  chan + x_off + static_cast<std::size_t>(oy * s + ky) * shape.dz +
                  static_cast<std::size_t>(oz * s);
              for (int kz = 0; kz < k; ++kz) dst[kz] += src_col[kz];
              src_col += k;
            }
          }
        }
      }
}

struct ForwardCache {
  std::vector<MatrixRM> acts;         // acts[0] = input, acts[i+1] = layer i out
  std::vector<StageShape> shapes;     // shapes[i] matches acts[i]
};

// Forward over a packed batch. Input matrix: (channels x B*Vin) for spatial
// input. Returns the final activation (1 x B).
MatrixRM forward_batch_impl(const Model& model, const MatrixRM& input, int batch,
                            ForwardCache* cache) {
  StageShape shape = input_stage(model.input_shape);
  if (input.rows() != shape.rows() ||
      input.cols() != static_cast<Eigen::Index>(shape.per_example() * batch))
    throw InputError("forward: input shape mismatch");

  MatrixRM cur = input;
  if (cache) {
    cache->acts.push_back(cur);
    cache->shapes.push_back(shape);
  }

  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    const LayerSpec& layer = model.layers[li];
    const StageShape out_shape = next_stage(shape, layer);
    MatrixRM out;
    switch (layer.type) {
      case LayerSpec::Type::Conv3d: {
        const std::size_t vin = shape.per_example();
        const std::size_t vout = out_shape.per_example();
        const int patch = layer.in_channels * layer.kernel * layer.kernel * layer.kernel;
        out.resize(out_shape.channels, static_cast<Eigen::Index>(vout) * batch);
        ConstMapRM w(model.weights[li].data.data(), layer.out_channels, patch);
        MatrixCM col(patch, vout);
        for (int b = 0; b < batch; ++b) {
          im2col(cur.data() + static_cast<std::size_t>(b) * vin,
                 static_cast<std::size_t>(cur.cols()), shape, layer.kernel,
                 layer.stride, out_shape, col);
          out.middleCols(static_cast<Eigen::Index>(b) * vout, vout).noalias() = w * col;
        }
        out.colwise() += Eigen::Map<const Eigen::VectorXd>(
            model.biases[li].data.data(), out_shape.channels);
        break;
      }
      case LayerSpec::Type::Relu:
        out = cur.cwiseMax(0.0);
        break;
      case LayerSpec::Type::Flatten: {
        // (C x B*V) -> (C*V x B)
        const std::size_t v = shape.per_example();
        out.resize(out_shape.features, batch);
        for (int b = 0; b < batch; ++b)
          for (int c = 0; c < shape.channels; ++c)
            for (std::size_t i = 0; i < v; ++i)
              out(static_cast<Eigen::Index>(c * v + i), b) =
                  cur(c, static_cast<Eigen::Index>(b) * v + i);
        break;
      }
      case LayerSpec::Type::Dense: {
        ConstMapRM w(model.weights[li].data.data(), layer.out_features,
                     layer.in_features);
        out.resize(layer.out_features, batch);
        out.noalias() = w * cur;
        out.colwise() += Eigen::Map<const Eigen::VectorXd>(
            model.biases[li].data.data(), layer.out_features);
        break;
      }
      case LayerSpec::Type::Sigmoid:
        out = cur.unaryExpr([](double x) {
          const double p = 1.0 / (1.0 + std::exp(-x));
          return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
        });
        break;
    }
    shape = out_shape;
    cur = std::move(out);
    if (cache) {
      cache->acts.push_back(cur);
      cache->shapes.push_back(shape);
    }
  }
  if (shape.spatial || shape.features != 1)
    throw InputError("forward: model does not end in a scalar output");
  return cur;
}

MatrixRM pack_inputs(const Model& model, const std::vector<Tensor>& inputs) {
  const auto& in = model.input_shape;
  const std::size_t per =
      static_cast<std::size_t>(in[1]) * in[2] * in[3];
  MatrixRM packed(in[0], static_cast<Eigen::Index>(per * inputs.size()));
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    const Tensor& t = inputs[b];
    if (t.shape != std::vector<int>{in[0], in[1], in[2], in[3]})
      throw InputError("forward: input tensor shape mismatch");
    for (int c = 0; c < in[0]; ++c)
      std::memcpy(packed.data() + c * packed.cols() + b * per,
                  t.data.data() + static_cast<std::size_t>(c) * per,
                  per * sizeof(double));
  }
  return packed;
}

}  // namespace

LayerSpec LayerSpec::conv3d(int in_ch, int out_ch, int kernel, int stride) {
  if (in_ch < 1 || out_ch < 1 || kernel < 1 || stride < 1)
    throw InputError("conv3d spec: all parameters must be >= 1");
  LayerSpec s;
  s.type = Type::Conv3d;
  s.in_channels = in_ch;
  s.out_channels = out_ch;
  s.kernel = kernel;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::dense(int out_features) {
  if (out_features < 1) throw InputError("dense spec: out_features must be >= 1");
  LayerSpec s;
  s.type = Type::Dense;
  s.out_features = out_features;
  return s;
}

std::vector<LayerSpec> default_arch() {
  return {LayerSpec::conv3d(1, 8, 5, 2), LayerSpec::relu(),
          LayerSpec::conv3d(8, 16, 3, 2), LayerSpec::relu(),
          LayerSpec::flatten(),           LayerSpec::dense(128),
          LayerSpec::relu(),              LayerSpec::dense(1),
          LayerSpec::sigmoid()};
}

Model build_model(ModelKind kind, const std::vector<LayerSpec>& layers,
                  const std::array<int, 4>& input_shape, std::uint64_t seed) {
  Model model;
  model.kind = kind;
  model.input_shape = input_shape;
  model.layers = layers;
  model.weights.resize(layers.size());
  model.biases.resize(layers.size());

  Rng rng(derive_seed(seed, 0x11E7ULL));
  StageShape shape = input_stage(input_shape);
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    LayerSpec& layer = model.layers[li];
    if (layer.type == LayerSpec::Type::Dense && layer.in_features == 0) {
      if (shape.spatial) throw InputError("build_model: dense before flatten");
      layer.in_features = shape.features;
    }
    if (layer.type == LayerSpec::Type::Conv3d) {
      const int fan_in = layer.in_channels * layer.kernel * layer.kernel * layer.kernel;
      const int fan_out = layer.out_channels * layer.kernel * layer.kernel * layer.kernel;
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      model.weights[li] = Tensor({layer.out_channels, layer.in_channels,
                                  layer.kernel, layer.kernel, layer.kernel});
      for (double& w : model.weights[li].data) w = rng.uniform(-bound, bound);
      model.biases[li] = Tensor({layer.out_channels});
    } else if (layer.type == LayerSpec::Type::Dense) {
      const double bound =
          std::sqrt(6.0 / (layer.in_features + layer.out_features));
      model.weights[li] = Tensor({layer.out_features, layer.in_features});
      for (double& w : model.weights[li].data) w = rng.uniform(-bound, bound);
      model.biases[li] = Tensor({layer.out_features});
    }
    shape = next_stage(shape, layer);
  }
  if (shape.spatial || shape.features != 1)
    throw InputError("build_model: network must end in one output unit");
  if (model.layers.empty() ||
      model.layers.back().type != LayerSpec::Type::Sigmoid)
    throw InputError("build_model: final layer must be sigmoid");
  return model;
}

Tensor to_input_tensor(const VoxelGrid& grid) {
  const auto& d = grid.dims();
  Tensor t({1, d[0], d[1], d[2]});
  // tensor layout (c,x,y,z) z-fastest; grid storage is x-fastest
  std::size_t i = 0;
  for (int x = 0; x < d[0]; ++x)
    for (int y = 0; y < d[1]; ++y)
      for (int z = 0; z < d[2]; ++z, ++i)
        t.data[i] = grid.test(x, y, z) ? 1.0 : 0.0;
  return t;
}

double predict(const Model& model, const Tensor& input) {
  const MatrixRM packed = pack_inputs(model, {input});
  return forward_batch_impl(model, packed, 1, nullptr)(0, 0);
}

std::vector<double> predict_batch(const Model& model,
                                  const std::vector<const VoxelGrid*>& grids) {
  if (grids.empty()) return {};
  std::vector<Tensor> inputs;
  inputs.reserve(grids.size());
  for (const VoxelGrid* g : grids) inputs.push_back(to_input_tensor(*g));
  const MatrixRM packed = pack_inputs(model, inputs);
  const MatrixRM out =
      forward_batch_impl(model, packed, static_cast<int>(grids.size()), nullptr);
  std::vector<double> probs(grids.size());
  for (std::size_t i = 0; i < grids.size(); ++i) probs[i] = out(0, static_cast<Eigen::Index>(i));
  return probs;
}

double bce_loss(double prediction, int label) {
  const double p = std::clamp(prediction, kProbClamp, 1.0 - kProbClamp);
  return label ? -std::log(p) : -std::log(1.0 - p);
}

Gradients backward_batch(const Model& model, const std::vector<Tensor>& inputs,
                         const std::vector<int>& labels, double* mean_loss) {
  if (inputs.empty() || inputs.size() != labels.size())
    throw InputError("backward: batch inputs/labels mismatch");
  const int batch = static_cast<int>(inputs.size());

  ForwardCache cache;
  const MatrixRM packed = pack_inputs(model, inputs);
  const MatrixRM out = forward_batch_impl(model, packed, batch, &cache);

  if (mean_loss) {
    double total = 0;
    for (int b = 0; b < batch; ++b) total += bce_loss(out(0, b), labels[b]);
    *mean_loss = total / batch;
  }

  Gradients grads;
  grads.weights.resize(model.layers.size());
  grads.biases.resize(model.layers.size());
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    if (!model.weights[li].empty()) {
      grads.weights[li] = Tensor(model.weights[li].shape);
      grads.biases[li] = Tensor(model.biases[li].shape);
    }
  }

  // dL/dp for the sum of per-example losses
  MatrixRM grad(1, batch);
  for (int b = 0; b < batch; ++b) {
    const double p = out(0, b);
    grad(0, b) = (p - labels[b]) / (p * (1.0 - p));
  }

  for (int li = static_cast<int>(model.layers.size()) - 1; li >= 0; --li) {
    const LayerSpec& layer = model.layers[li];
    const MatrixRM& in_act = cache.acts[li];
    const MatrixRM& out_act = cache.acts[li + 1];
    const StageShape& in_shape = cache.shapes[li];
    const StageShape& out_shape = cache.shapes[li + 1];
    MatrixRM next;
    switch (layer.type) {
      case LayerSpec::Type::Sigmoid:
        next = grad.cwiseProduct(
            out_act.unaryExpr([](double p) { return p * (1.0 - p); }));
        break;
      case LayerSpec::Type::Relu:
        next = grad.cwiseProduct(
            in_act.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; }));
        break;
      case LayerSpec::Type::Flatten: {
        const std::size_t v = in_shape.per_example();
        next.resize(in_shape.channels, static_cast<Eigen::Index>(v) * batch);
        for (int b = 0; b < batch; ++b)
          for (int c = 0; c < in_shape.channels; ++c)
            for (std::size_t i = 0; i < v; ++i)
              next(c, static_cast<Eigen::Index>(b) * v + i) =
                  grad(static_cast<Eigen::Index>(c * v + i), b);
        break;
      }
      case LayerSpec::Type::Dense: {
        ConstMapRM w(model.weights[li].data.data(), layer.out_features,
                     layer.in_features);
        MapRM dw(grads.weights[li].data.data(), layer.out_features,
                 layer.in_features);
        dw.noalias() = grad * in_act.transpose();
        Eigen::Map<Eigen::VectorXd> db(grads.biases[li].data.data(),
                                       layer.out_features);
        db = grad.rowwise().sum();
        if (li > 0) next = w.transpose() * grad;
        break;
      }
      case LayerSpec::Type::Conv3d: {
        const std::size_t vout = out_shape.per_example();
        const int patch =
            layer.in_channels * layer.kernel * layer.kernel * layer.kernel;
        ConstMapRM w(model.weights[li].data.data(), layer.out_channels, patch);
        MapRM dw(grads.weights[li].data.data(), layer.out_channels, patch);
        Eigen::Map<Eigen::VectorXd> db(grads.biases[li].data.data(),
                                       layer.out_channels);
        db = grad.rowwise().sum();
        const bool need_input_grad = li > 0;
        if (need_input_grad) {
          next.resize(in_shape.channels,
                      static_cast<Eigen::Index>(in_shape.per_example()) * batch);
          next.setZero();
        }
        MatrixCM col(patch, vout);
        MatrixCM dcol(patch, vout);
        for (int b = 0; b < batch; ++b) {
          im2col(in_act.data() + 0, in_shape, layer.kernel, layer.stride,
                 out_shape, col);
          const auto gout =
              grad.middleCols(static_cast<Eigen::Index>(b) * vout, vout);
          dw.noalias() += gout * col.transpose();
          if (need_input_grad) {
            dcol.noalias() = w.transpose() * gout;
            col2im_add(dcol, in_shape, layer.kernel, layer.stride, out_shape,
                       next.data() + 0);
          }
        }
        break;
      }
    }
    grad = std::move(next);
    if (li == 0) break;
  }
  return grads;
}

TrainHistory train(Model& model, const std::vector<LabeledSample>& dataset,
                   const TrainConfig& config) {
  if (dataset.empty()) throw TrainingError("train: empty dataset");
  if (!(config.learning_rate > 0)) throw TrainingError("train: learning_rate must be > 0");
  if (!(config.validation_fraction > 0 && config.validation_fraction < 1))
    throw TrainingError("train: validation_fraction must be in (0,1)");
  bool has_pos = false, has_neg = false;
  for (const LabeledSample& s : dataset) (s.label ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw TrainingError("train: dataset must contain both classes");

  Rng rng(derive_seed(config.seed, 0x7124ULL));
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  const std::size_t n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(config.validation_fraction * dataset.size()));
  std::vector<std::size_t> val_idx(order.end() - n_val, order.end());
  std::vector<std::size_t> train_idx(order.begin(), order.end() - n_val);
  if (train_idx.empty()) throw TrainingError("train: no training examples left");

  std::vector<Tensor> velocity_w, velocity_b;
  velocity_w.reserve(model.weights.size());
  for (const Tensor& w : model.weights)
    velocity_w.push_back(w.empty() ? Tensor{} : Tensor(w.shape));
  for (const Tensor& b : model.biases)
    velocity_b.push_back(b.empty() ? Tensor{} : Tensor(b.shape));

  auto val_accuracy = [&]() {
    std::vector<const VoxelGrid*> grids;
    grids.reserve(val_idx.size());
    for (std::size_t i : val_idx) grids.push_back(&dataset[i].grid);
    const std::vector<double> probs = predict_batch(model, grids);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < val_idx.size(); ++i) {
      const int pred = probs[i] > 0.5 ? 1 : 0;
      if (pred == static_cast<int>(dataset[val_idx[i]].label)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(val_idx.size());
  };

  TrainHistory history;
  std::vector<Tensor> best_w = model.weights, best_b = model.biases;
  double best_acc = -1.0;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(train_idx);
    double loss_sum = 0;
    std::size_t batch_count = 0;
    for (std::size_t start = 0; start < train_idx.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(train_idx.size(), start + config.batch_size);
      std::vector<Tensor> inputs;
      std::vector<int> labels;
      inputs.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        inputs.push_back(to_input_tensor(dataset[train_idx[i]].grid));
        labels.push_back(dataset[train_idx[i]].label);
      }
      double mean_loss = 0;
      Gradients grads = backward_batch(model, inputs, labels, &mean_loss);
      loss_sum += mean_loss;
      ++batch_count;

      const double scale = 1.0 / static_cast<double>(inputs.size());
      for (std::size_t li = 0; li < model.weights.size(); ++li) {
        if (model.weights[li].empty()) continue;
        auto update = [&](std::vector<double>& w, const std::vector<double>& g,
                          std::vector<double>& v) {
          for (std::size_t j = 0; j < w.size(); ++j) {
            v[j] = config.momentum * v[j] - config.learning_rate * g[j] * scale;
            w[j] += v[j];
          }
        };
        update(model.weights[li].data, grads.weights[li].data,
               velocity_w[li].data);
        update(model.biases[li].data, grads.biases[li].data,
               velocity_b[li].data);
      }
    }
    const double acc = val_accuracy();
    history.epochs.push_back(
        {epoch, loss_sum / static_cast<double>(batch_count), acc});
    if (acc > best_acc) {
      best_acc = acc;
      best_epoch = epoch;
      best_w = model.weights;
      best_b = model.biases;
    }
  }

  model.weights = std::move(best_w);
  model.biases = std::move(best_b);
  model.trained = true;
  history.best_epoch = best_epoch;
  history.best_val_accuracy = best_acc;
  return history;
}

Metrics evaluate(const Model& model, const std::vector<LabeledSample>& dataset) {
  if (dataset.empty()) throw InputError("evaluate: empty dataset");
  std::vector<const VoxelGrid*> grids;
  grids.reserve(dataset.size());
  for (const LabeledSample& s : dataset) grids.push_back(&s.grid);

  // batch in slabs to bound memory
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  const std::size_t slab = 64;
  for (std::size_t start = 0; start < grids.size(); start += slab) {
    const std::size_t end = std::min(grids.size(), start + slab);
    std::vector<const VoxelGrid*> part(grids.begin() + start, grids.begin() + end);
    const std::vector<double> probs = predict_batch(model, part);
    for (std::size_t i = 0; i < part.size(); ++i) {
      const int pred = probs[i] > 0.5 ? 1 : 0;
      const int truth = dataset[start + i].label ? 1 : 0;
      if (pred == 1 && truth == 1) ++tp;
      else if (pred == 1 && truth == 0) ++fp;
      else if (pred == 0 && truth == 0) ++tn;
      else ++fn;
    }
  }
  Metrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(dataset.size());
  m.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
  m.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
  return m;
}

}  // namespace carp
