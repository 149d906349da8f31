#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace percept::nn {

// Activations use rows = tokens/pixels, cols = channels.
template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

constexpr double kLayerNormEps = 1e-5;  // matches the checkpoints' training
constexpr double kBatchNormEps = 1e-5;

// y = x * W^T + b, W stored [out, in].
template <typename T>
MatX<T> linear(const MatX<T>& x, const MatX<T>& weight, const VecX<T>& bias) {
  MatX<T> y = x * weight.transpose();
  y.rowwise() += bias.transpose();
  return y;
}

template <typename T>
struct LayerNormParams {
  VecX<T> gamma;
  VecX<T> beta;
};

template <typename T>
struct LayerNormCache {
  MatX<T> xhat;       // normalized input, pre scale/shift
  VecX<T> rstd;       // 1 / sqrt(var + eps), per row
};

template <typename T>
MatX<T> layer_norm(const MatX<T>& x, const LayerNormParams<T>& p,
                   LayerNormCache<T>* cache = nullptr) {
  const auto cols = x.cols();
  MatX<T> xhat(x.rows(), cols);
  VecX<T> rstd(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T mean = x.row(r).mean();
    const T var = (x.row(r).array() - mean).square().sum() / static_cast<T>(cols);
    const T rs = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    xhat.row(r) = (x.row(r).array() - mean) * rs;
    rstd(r) = rs;
  }
  MatX<T> y = xhat.array().rowwise() * p.gamma.transpose().array();
  y.array().rowwise() += p.beta.transpose().array();
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

// Gradient w.r.t. the layer_norm input given the cached normalization.
template <typename T>
MatX<T> layer_norm_backward(const MatX<T>& dy, const LayerNormParams<T>& p,
                            const LayerNormCache<T>& cache) {
  const auto cols = dy.cols();
  MatX<T> dx(dy.rows(), cols);
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const Eigen::Array<T, 1, Eigen::Dynamic> dxhat =
        dy.row(r).array() * p.gamma.transpose().array();
    const T m1 = dxhat.mean();
    const T m2 = (dxhat * cache.xhat.row(r).array()).mean();
    dx.row(r) =
        cache.rstd(r) * (dxhat - m1 - cache.xhat.row(r).array() * m2);
  }
  return dx;
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// x * sigmoid(1.702 x): the gelu approximation the checkpoints were trained
// with.
template <typename T>
MatX<T> quick_gelu(const MatX<T>& x) {
  return x.array() * (T(1) / (T(1) + (-T(1.702) * x.array()).exp()));
}

template <typename T>
MatX<T> quick_gelu_backward(const MatX<T>& dy, const MatX<T>& x) {
  const auto s = (T(1) / (T(1) + (-T(1.702) * x.array()).exp())).eval();
  return dy.array() * (s + T(1.702) * x.array() * s * (T(1) - s));
}

// Row-wise softmax in place.
template <typename T>
void softmax_rows(MatX<T>& logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const T mx = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - mx).exp();
    logits.row(r) /= logits.row(r).sum();
  }
}

// dlogits given softmax output p and upstream dp.
template <typename T>
MatX<T> softmax_rows_backward(const MatX<T>& dp, const MatX<T>& p) {
  MatX<T> dlogits(p.rows(), p.cols());
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const T dot = dp.row(r).dot(p.row(r));
    dlogits.row(r) = (dp.row(r).array() - dot) * p.row(r).array();
  }
  return dlogits;
}

}  // namespace percept::nn
