#include "percept/vision_common.hpp"

#include <cmath>

#include "percept/errors.hpp"

namespace percept::vision {

FeatureMap to_feature_map(const ImageBuffer& image,
                          const Eigen::Vector3f& mean,
                          const Eigen::Vector3f& std) {
  FeatureMap fm;
  fm.height = image.height;
  fm.width = image.width;
  fm.data.resize(image.pixels(), 3);
  for (std::int64_t p = 0; p < image.pixels(); ++p) {
    for (int c = 0; c < 3; ++c) {
      fm.data(p, c) = (image.data[static_cast<std::size_t>(p) * 3 +
                                  static_cast<std::size_t>(c)] -
                       mean(c)) /
                      std(c);
    }
  }
  return fm;
}

Conv2d Conv2d::from_archive(const TensorArchive& archive,
                            const std::string& name, int stride, int pad) {
  const ArchiveTensor& t = archive.get(name);
  if (t.dtype != Dtype::F32 || t.shape.size() != 4) {
    throw AssetError("conv weight '" + name + "' must be a 4-d f32 tensor");
  }
  Conv2d conv;
  conv.out_ch = static_cast<int>(t.shape[0]);
  conv.in_ch = static_cast<int>(t.shape[1]);
  conv.kh = static_cast<int>(t.shape[2]);
  conv.kw = static_cast<int>(t.shape[3]);
  conv.stride = stride;
  conv.pad = pad;
  const Eigen::Index cols =
      static_cast<Eigen::Index>(conv.in_ch) * conv.kh * conv.kw;
  conv.weight = Eigen::Map<const nn::MatX<float>>(t.f32.data(),
                                                  conv.out_ch, cols);
  return conv;
}

FeatureMap Conv2d::forward(const FeatureMap& x) const {
  if (x.channels() != in_ch) {
    throw ContractViolation("conv input channels mismatch");
  }
  const int oh = (x.height + 2 * pad - kh) / stride + 1;
  const int ow = (x.width + 2 * pad - kw) / stride + 1;
  if (oh < 1 || ow < 1) {
    throw InputError("feature map too small for convolution");
  }
  // im2col, columns ordered channel-major then (ky, kx) to match the
  // flattened weight layout.
  nn::MatX<float> patches(static_cast<Eigen::Index>(oh) * ow,
                          static_cast<Eigen::Index>(in_ch) * kh * kw);
  patches.setZero();
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const Eigen::Index row = static_cast<Eigen::Index>(oy) * ow + ox;
      for (int ky = 0; ky < kh; ++ky) {
        const int iy = oy * stride - pad + ky;
        if (iy < 0 || iy >= x.height) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int ix = ox * stride - pad + kx;
          if (ix < 0 || ix >= x.width) continue;
          const Eigen::Index src = static_cast<Eigen::Index>(iy) * x.width + ix;
          for (int c = 0; c < in_ch; ++c) {
            patches(row, (static_cast<Eigen::Index>(c) * kh + ky) * kw + kx) =
                x.data(src, c);
          }
        }
      }
    }
  }
  FeatureMap out;
  out.height = oh;
  out.width = ow;
  out.data = patches * weight.transpose();
  return out;
}

BatchNorm BatchNorm::from_archive(const TensorArchive& archive,
                                  const std::string& prefix) {
  const Eigen::VectorXf gamma = archive.get(prefix + ".weight").vector_f32();
  const Eigen::VectorXf beta = archive.get(prefix + ".bias").vector_f32();
  const Eigen::VectorXf mean =
      archive.get(prefix + ".running_mean").vector_f32();
  const Eigen::VectorXf var = archive.get(prefix + ".running_var").vector_f32();
  BatchNorm bn;
  bn.scale =
      gamma.array() /
      (var.array() + static_cast<float>(nn::kBatchNormEps)).sqrt();
  bn.shift = beta.array() - mean.array() * bn.scale.array();
  return bn;
}

void BatchNorm::apply_inplace(FeatureMap& x) const {
  if (x.data.cols() != scale.size()) {
    throw ContractViolation("batch norm channel mismatch");
  }
  x.data = (x.data.array().rowwise() * scale.transpose().array()).rowwise() +
           shift.transpose().array();
}

FeatureMap avg_pool(const FeatureMap& x, int k) {
  const int oh = (x.height - k) / k + 1;
  const int ow = (x.width - k) / k + 1;
  if (oh < 1 || ow < 1) throw InputError("feature map too small for pooling");
  FeatureMap out;
  out.height = oh;
  out.width = ow;
  out.data.setZero(static_cast<Eigen::Index>(oh) * ow, x.data.cols());
  const float inv = 1.0f / static_cast<float>(k * k);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const Eigen::Index row = static_cast<Eigen::Index>(oy) * ow + ox;
      for (int dy = 0; dy < k; ++dy) {
        for (int dx = 0; dx < k; ++dx) {
          const Eigen::Index src =
              static_cast<Eigen::Index>(oy * k + dy) * x.width + (ox * k + dx);
          out.data.row(row) += x.data.row(src);
        }
      }
      out.data.row(row) *= inv;
    }
  }
  return out;
}

void relu_inplace(FeatureMap& x) { x.data = x.data.cwiseMax(0.0f); }

nn::MatX<float> resample_position_grid(const nn::MatX<float>& grid, int src_h,
                                       int src_w, int dst_h, int dst_w) {
  if (grid.rows() != static_cast<Eigen::Index>(src_h) * src_w) {
    throw ContractViolation("positional grid rows do not match source size");
  }
  if (src_h == dst_h && src_w == dst_w) return grid;
  nn::MatX<float> out(static_cast<Eigen::Index>(dst_h) * dst_w, grid.cols());
  const double sy = static_cast<double>(src_h) / dst_h;
  const double sx = static_cast<double>(src_w) / dst_w;
  for (int y = 0; y < dst_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::max(0.0, std::min(fy, static_cast<double>(src_h - 1)));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, src_h - 1);
    const float wy = static_cast<float>(fy - y0);
    for (int x = 0; x < dst_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::max(0.0, std::min(fx, static_cast<double>(src_w - 1)));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, src_w - 1);
      const float wx = static_cast<float>(fx - x0);
      const auto row = [&](int yy, int xx) {
        return grid.row(static_cast<Eigen::Index>(yy) * src_w + xx);
      };
      out.row(static_cast<Eigen::Index>(y) * dst_w + x) =
          (1.0f - wy) * ((1.0f - wx) * row(y0, x0) + wx * row(y0, x1)) +
          wy * ((1.0f - wx) * row(y1, x0) + wx * row(y1, x1));
    }
  }
  return out;
}

}  // namespace percept::vision
