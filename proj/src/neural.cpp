#include "srcp/neural.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace srcp {

namespace {

Mat apply_activation(Activation act, const Mat& z) {
  switch (act) {
    case Activation::Linear:
      return z;
    case Activation::Tanh:
      return z.array().tanh().matrix();
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
  throw std::logic_error("unknown activation");
}

// Derivative in terms of the post-activation value.
Mat activation_grad(Activation act, const Mat& post) {
  switch (act) {
    case Activation::Linear:
      return Mat::Ones(post.rows(), post.cols());
    case Activation::Tanh:
      return (1.0 - post.array().square()).matrix();
    case Activation::Sigmoid:
      return (post.array() * (1.0 - post.array())).matrix();
  }
  throw std::logic_error("unknown activation");
}

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint: truncated integer field");
  return v;
}

void write_doubles(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), n * sizeof(double));
}

void read_doubles(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), n * sizeof(double));
  if (!is) throw std::runtime_error("checkpoint: truncated value block");
}

}  // namespace

Mlp Mlp::make(const std::vector<int>& sizes, const std::vector<Activation>& acts,
              std::mt19937_64& rng) {
  if (sizes.size() < 2 || acts.size() != sizes.size() - 1)
    throw std::invalid_argument("Mlp::make: sizes/activations mismatch");
  Mlp net;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const int fan_in = sizes[i];
    const int fan_out = sizes[i + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Layer layer;
    layer.W = Mat::NullaryExpr(fan_out, fan_in, [&]() { return dist(rng); });
    layer.b = Vec::Zero(fan_out);
    layer.act = acts[i];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (const Layer& layer : net.layers) {
    g.dW.push_back(Mat::Zero(layer.W.rows(), layer.W.cols()));
    g.db.push_back(Vec::Zero(layer.b.size()));
  }
  return g;
}

bool MlpGrads::finite() const {
  for (const Mat& m : dW)
    if (!m.allFinite()) return false;
  for (const Vec& v : db)
    if (!v.allFinite()) return false;
  return true;
}

Mat mlp_forward(const Mlp& net, const Mat& X, ForwardCache* cache) {
  if (X.rows() != net.in_dim())
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  if (cache) {
    cache->input = X;
    cache->pre.clear();
    cache->post.clear();
  }
  Mat a = X;
  for (const Layer& layer : net.layers) {
    Mat z = (layer.W * a).colwise() + layer.b;
    a = apply_activation(layer.act, z);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(a);
    }
  }
  return a;
}

Mat mlp_backward(const Mlp& net, const ForwardCache& cache, const Mat& dY,
                 MlpGrads& grads) {
  const auto n_layers = net.layers.size();
  if (cache.post.size() != n_layers)
    throw std::invalid_argument("mlp_backward: cache does not match network");
  if (dY.rows() != net.out_dim() || dY.cols() != cache.input.cols())
    throw std::invalid_argument("mlp_backward: output gradient shape mismatch");
  grads.dW.resize(n_layers);
  grads.db.resize(n_layers);

  Mat delta = dY;
  for (std::size_t li = n_layers; li-- > 0;) {
    const Layer& layer = net.layers[li];
    delta = delta.cwiseProduct(activation_grad(layer.act, cache.post[li]));
    const Mat& below = li == 0 ? cache.input : cache.post[li - 1];
    grads.dW[li] = delta * below.transpose();
    grads.db[li] = delta.rowwise().sum();
    if (li > 0) delta = layer.W.transpose() * delta;
  }
  return net.layers.front().W.transpose() * delta;
}

AdamState AdamState::zeros_like(const Mlp& net) {
  AdamState s;
  for (const Layer& layer : net.layers) {
    s.mW.push_back(Mat::Zero(layer.W.rows(), layer.W.cols()));
    s.vW.push_back(Mat::Zero(layer.W.rows(), layer.W.cols()));
    s.mb.push_back(Vec::Zero(layer.b.size()));
    s.vb.push_back(Vec::Zero(layer.b.size()));
  }
  return s;
}

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& adam, double lr) {
  if (grads.dW.size() != net.layers.size())
    throw std::invalid_argument("adam_step: gradient/parameter mismatch");
  if (!grads.finite())
    throw std::runtime_error("adam_step: non-finite gradients, update rejected");
  adam.step += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = adam.beta1 * m + (1.0 - adam.beta1) * g;
      v = adam.beta2 * v + (1.0 - adam.beta2) * g.cwiseProduct(g);
      param.array() -=
          lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + adam.eps);
    };
    update(net.layers[i].W, adam.mW[i], adam.vW[i], grads.dW[i]);
    update(net.layers[i].b, adam.mb[i], adam.vb[i], grads.db[i]);
  }
}

void ScalarAdam::update(double& param, double grad, double lr) {
  if (!std::isfinite(grad))
    throw std::runtime_error("ScalarAdam: non-finite gradient");
  step += 1;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad * grad;
  const double mhat = m / (1.0 - std::pow(beta1, static_cast<double>(step)));
  const double vhat = v / (1.0 - std::pow(beta2, static_cast<double>(step)));
  param -= lr * mhat / (std::sqrt(vhat) + eps);
}

double lr_at(const LrSchedule& schedule, long episode) {
  if (episode < 0) throw std::invalid_argument("lr_at: negative episode");
  if (schedule.mode == LrSchedule::Mode::Constant) return schedule.lr_min;
  const long phase = episode % schedule.period;
  const double half = 0.5 * static_cast<double>(schedule.period);
  const double frac = phase < half ? phase / half : (schedule.period - phase) / half;
  return schedule.lr_min + (schedule.lr_max - schedule.lr_min) * frac;
}

void write_mlp(std::ostream& os, const Mlp& net) {
  write_u64(os, net.layers.size());
  for (const Layer& layer : net.layers) {
    write_u64(os, static_cast<std::uint64_t>(layer.W.rows()));
    write_u64(os, static_cast<std::uint64_t>(layer.W.cols()));
    write_u64(os, static_cast<std::uint64_t>(layer.act));
    // Eigen stores column-major; emit row-major as the format requires.
    const Mat wt = layer.W.transpose();
    write_doubles(os, wt.data(), static_cast<std::size_t>(wt.size()));
    write_doubles(os, layer.b.data(), static_cast<std::size_t>(layer.b.size()));
  }
}

Mlp read_mlp(std::istream& is) {
  Mlp net;
  const std::uint64_t n_layers = read_u64(is);
  if (n_layers == 0 || n_layers > 64)
    throw std::runtime_error("checkpoint: implausible layer count");
  for (std::uint64_t i = 0; i < n_layers; ++i) {
    const auto rows = static_cast<Eigen::Index>(read_u64(is));
    const auto cols = static_cast<Eigen::Index>(read_u64(is));
    const std::uint64_t act = read_u64(is);
    if (act > 2) throw std::runtime_error("checkpoint: bad activation tag");
    if (rows <= 0 || cols <= 0 || rows * cols > (1 << 26))
      throw std::runtime_error("checkpoint: implausible layer shape");
    Layer layer;
    Mat wt(cols, rows);
    read_doubles(is, wt.data(), static_cast<std::size_t>(wt.size()));
    layer.W = wt.transpose();
    layer.b = Vec(rows);
    read_doubles(is, layer.b.data(), static_cast<std::size_t>(rows));
    layer.act = static_cast<Activation>(act);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void write_adam(std::ostream& os, const AdamState& adam) {
  write_u64(os, adam.mW.size());
  write_u64(os, static_cast<std::uint64_t>(adam.step));
  write_doubles(os, &adam.beta1, 1);
  write_doubles(os, &adam.beta2, 1);
  write_doubles(os, &adam.eps, 1);
  for (std::size_t i = 0; i < adam.mW.size(); ++i) {
    write_u64(os, static_cast<std::uint64_t>(adam.mW[i].rows()));
    write_u64(os, static_cast<std::uint64_t>(adam.mW[i].cols()));
    write_doubles(os, adam.mW[i].data(), static_cast<std::size_t>(adam.mW[i].size()));
    write_doubles(os, adam.vW[i].data(), static_cast<std::size_t>(adam.vW[i].size()));
    write_doubles(os, adam.mb[i].data(), static_cast<std::size_t>(adam.mb[i].size()));
    write_doubles(os, adam.vb[i].data(), static_cast<std::size_t>(adam.vb[i].size()));
  }
}

AdamState read_adam(std::istream& is) {
  AdamState s;
  const std::uint64_t n_layers = read_u64(is);
  if (n_layers > 64) throw std::runtime_error("checkpoint: implausible adam state");
  s.step = static_cast<long>(read_u64(is));
  read_doubles(is, &s.beta1, 1);
  read_doubles(is, &s.beta2, 1);
  read_doubles(is, &s.eps, 1);
  for (std::uint64_t i = 0; i < n_layers; ++i) {
    const auto rows = static_cast<Eigen::Index>(read_u64(is));
    const auto cols = static_cast<Eigen::Index>(read_u64(is));
    if (rows <= 0 || cols <= 0 || rows * cols > (1 << 26))
      throw std::runtime_error("checkpoint: implausible adam shape");
    Mat mw(rows, cols), vw(rows, cols);
    Vec mb(rows), vb(rows);
    read_doubles(is, mw.data(), static_cast<std::size_t>(mw.size()));
    read_doubles(is, vw.data(), static_cast<std::size_t>(vw.size()));
    read_doubles(is, mb.data(), static_cast<std::size_t>(mb.size()));
    read_doubles(is, vb.data(), static_cast<std::size_t>(vb.size()));
    s.mW.push_back(std::move(mw));
    s.vW.push_back(std::move(vw));
    s.mb.push_back(std::move(mb));
    s.vb.push_back(std::move(vb));
  }
  return s;
}

}  // namespace srcp
