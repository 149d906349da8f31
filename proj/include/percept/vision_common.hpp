#pragma once

#include <Eigen/Dense>

#include "percept/image.hpp"
#include "percept/nn.hpp"
#include "percept/tensor_archive.hpp"

namespace percept::vision {

// Spatial activations, rows = pixels in row-major (y, x) order, cols = channels.
struct FeatureMap {
  int height = 0;
  int width = 0;
  nn::MatX<float> data;  // [height*width, channels]
  int channels() const { return static_cast<int>(data.cols()); }
};

// Channel-normalized view of an RGB image: (value - mean[c]) / std[c].
FeatureMap to_feature_map(const ImageBuffer& image,
                          const Eigen::Vector3f& mean,
                          const Eigen::Vector3f& std);

struct Conv2d {
  nn::MatX<float> weight;  // [out, in*kh*kw], in-major then ky, kx
  int in_ch = 0, out_ch = 0, kh = 0, kw = 0, stride = 1, pad = 0;

  // Reads a 4-d [out, in, kh, kw] tensor.
  static Conv2d from_archive(const TensorArchive& archive,
                             const std::string& name, int stride, int pad);
  FeatureMap forward(const FeatureMap& x) const;
};

// Inference-mode batch norm folded to per-channel scale/shift.
struct BatchNorm {
  Eigen::VectorXf scale, shift;
  static BatchNorm from_archive(const TensorArchive& archive,
                                const std::string& prefix);
  void apply_inplace(FeatureMap& x) const;
};

FeatureMap avg_pool(const FeatureMap& x, int k);
void relu_inplace(FeatureMap& x);

// Bilinear resample of a positional grid stored as [src_h*src_w, channels]
// row-major rows, using half-pixel sample centers.
nn::MatX<float> resample_position_grid(const nn::MatX<float>& grid, int src_h,
                                       int src_w, int dst_h, int dst_w);

}  // namespace percept::vision
