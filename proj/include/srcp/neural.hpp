#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace srcp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Activation : std::uint64_t { Linear = 0, Tanh = 1, Sigmoid = 2 };

struct Layer {
  Mat W;  // out_dim x in_dim
  Vec b;  // out_dim
  Activation act = Activation::Linear;
};

/// Fully connected network. Batches are stored column-wise: an input matrix
/// has one sample per column, so a single sample is an in_dim x 1 matrix.
struct Mlp {
  std::vector<Layer> layers;

  int in_dim() const { return static_cast<int>(layers.front().W.cols()); }
  int out_dim() const { return static_cast<int>(layers.back().W.rows()); }

  /// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
  static Mlp make(const std::vector<int>& sizes,
                  const std::vector<Activation>& acts, std::mt19937_64& rng);
};

/// Intermediates kept by mlp_forward for the matching backward pass.
struct ForwardCache {
  Mat input;
  std::vector<Mat> pre;   // pre-activation per layer
  std::vector<Mat> post;  // post-activation per layer
};

struct MlpGrads {
  std::vector<Mat> dW;
  std::vector<Vec> db;

  static MlpGrads zeros_like(const Mlp& net);
  bool finite() const;
};

/// Forward pass over a batch (one sample per column). Fills `cache` when
/// given so mlp_backward can run against this exact evaluation.
Mat mlp_forward(const Mlp& net, const Mat& X, ForwardCache* cache = nullptr);

/// Reverse-mode gradients of the forward map. `dY` is dLoss/dOutput with the
/// same shape as the forward output; parameter gradients are summed over the
/// batch. Returns dLoss/dInput.
Mat mlp_backward(const Mlp& net, const ForwardCache& cache, const Mat& dY,
                 MlpGrads& grads);

struct AdamState {
  std::vector<Mat> mW, vW;
  std::vector<Vec> mb, vb;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState zeros_like(const Mlp& net);
};

/// Standard Adam with bias correction. Throws on non-finite gradients; the
/// parameters are left untouched in that case.
void adam_step(Mlp& net, const MlpGrads& grads, AdamState& adam, double lr);

/// Adam over a single scalar (used for the entropy temperature).
struct ScalarAdam {
  double m = 0, v = 0;
  long step = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  void update(double& param, double grad, double lr);
};

struct LrSchedule {
  enum class Mode { Triangular, Constant };
  double lr_min = 1e-4;
  double lr_max = 4e-4;
  long period = 100;  // episodes
  Mode mode = Mode::Triangular;
};

/// Triangular wave: lr_min at episode 0, lr_max at period/2, back to lr_min
/// at `period`, then repeating. Constant mode returns lr_min.
double lr_at(const LrSchedule& schedule, long episode);

// Binary network segments ("SRCP1" checkpoint building blocks): layer count,
// then per layer rows, cols, activation tag, row-major weights, biases.
// Counts are little-endian u64, values little-endian IEEE doubles.
void write_mlp(std::ostream& os, const Mlp& net);
Mlp read_mlp(std::istream& is);
void write_adam(std::ostream& os, const AdamState& adam);
AdamState read_adam(std::istream& is);

}  // namespace srcp
