#include "percept/degrade.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "percept/metrics.hpp"
#include "percept/parallel.hpp"

namespace percept {

DegradeAttribute degrade_attribute_from_string(const std::string& name) {
  if (name == "brightness") return DegradeAttribute::Brightness;
  if (name == "noisiness") return DegradeAttribute::Noisiness;
  if (name == "colorfulness") return DegradeAttribute::Colorfulness;
  if (name == "sharpness") return DegradeAttribute::Sharpness;
  throw ConfigError("unknown degradation attribute '" + name +
                    "' (brightness/noisiness/colorfulness/sharpness)");
}

std::string to_string(DegradeAttribute attribute) {
  switch (attribute) {
    case DegradeAttribute::Brightness: return "brightness";
    case DegradeAttribute::Noisiness: return "noisiness";
    case DegradeAttribute::Colorfulness: return "colorfulness";
    case DegradeAttribute::Sharpness: return "sharpness";
  }
  throw ConfigError("invalid degradation attribute");
}

namespace {

inline float clip01(double v) {
  return static_cast<float>(std::min(1.0, std::max(0.0, v)));
}

// splitmix64 finalizer; decorrelates (seed, image, level) task streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) +
                    0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Standard normal via Box-Muller on top of mt19937_64. std::normal_distribution
// is implementation-defined, which would break cross-platform reproducibility.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1)
    const double u1 =
        (static_cast<double>(rng_() >> 11) + 1.0) / 9007199254740993.0;
    const double u2 = static_cast<double>(rng_() >> 11) / 9007199254740992.0;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

ImageBuffer adjust_brightness(const ImageBuffer& image, double factor) {
  if (!(factor >= 0.0)) throw InputError("brightness factor must be >= 0");
  if (factor == 1.0) return image;
  ImageBuffer out(image.height, image.width);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    out.data[i] = clip01(image.data[i] * factor);
  }
  return out;
}

ImageBuffer adjust_noise(const ImageBuffer& image, double sigma,
                         std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InputError("noise sigma must be >= 0");
  if (sigma == 0.0) return image;
  ImageBuffer out(image.height, image.width);
  GaussianSource gauss(seed);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    out.data[i] = clip01(image.data[i] + sigma * gauss.next());
  }
  return out;
}

ImageBuffer adjust_colorfulness(const ImageBuffer& image, double factor) {
  if (!(factor >= 0.0)) throw InputError("colorfulness factor must be >= 0");
  if (factor == 1.0) return image;
  ImageBuffer out(image.height, image.width);
  for (std::size_t i = 0; i < image.data.size(); i += 3) {
    const double gray = kLumaR * image.data[i] + kLumaG * image.data[i + 1] +
                        kLumaB * image.data[i + 2];
    for (int c = 0; c < 3; ++c) {
      out.data[i + c] = clip01(gray + factor * (image.data[i + c] - gray));
    }
  }
  return out;
}

ImageBuffer smooth_kernel_blur(const ImageBuffer& image) {
  static const double kernel[3][3] = {{1, 1, 1}, {1, 5, 1}, {1, 1, 1}};
  ImageBuffer out(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = std::min(image.height - 1, std::max(0, y + dy));
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = std::min(image.width - 1, std::max(0, x + dx));
            acc += kernel[dy + 1][dx + 1] * image.at(yy, xx, c);
          }
        }
        out.at(y, x, c) = static_cast<float>(acc / 13.0);
      }
    }
  }
  return out;
}

ImageBuffer adjust_sharpness(const ImageBuffer& image, double factor) {
  if (!(factor >= 0.0)) throw InputError("sharpness factor must be >= 0");
  if (factor == 1.0) return image;
  const ImageBuffer blur = smooth_kernel_blur(image);
  ImageBuffer out(image.height, image.width);
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    out.data[i] =
        clip01(blur.data[i] + factor * (static_cast<double>(image.data[i]) -
                                        blur.data[i]));
  }
  return out;
}

std::vector<double> default_levels(DegradeAttribute attribute) {
  auto linspace = [](double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
  };
  switch (attribute) {
    case DegradeAttribute::Brightness: return linspace(0.2, 2.0, 10);
    // level = -sigma: from sigma 0.45 down to the clean image.
    case DegradeAttribute::Noisiness: return linspace(-0.45, 0.0, 10);
    case DegradeAttribute::Colorfulness: return linspace(0.0, 1.8, 10);
    case DegradeAttribute::Sharpness: return linspace(0.0, 2.0, 10);
  }
  throw ConfigError("invalid degradation attribute");
}

ImageBuffer apply_degradation(const ImageBuffer& image,
                              const DegradationSpec& spec, double level,
                              std::size_t image_index,
                              std::size_t level_index) {
  switch (spec.attribute) {
    case DegradeAttribute::Brightness:
      return adjust_brightness(image, level);
    case DegradeAttribute::Noisiness:
      if (level > 0.0) {
        throw InputError("noisiness level is -sigma and must be <= 0");
      }
      return adjust_noise(image, -level,
                          mix_seed(spec.seed, image_index, level_index));
    case DegradeAttribute::Colorfulness:
      return adjust_colorfulness(image, level);
    case DegradeAttribute::Sharpness:
      return adjust_sharpness(image, level);
  }
  throw ConfigError("invalid degradation attribute");
}

SweepResult run_sweep(const std::vector<ImageBuffer>& images,
                      const DegradationSpec& spec, const ImageScorer& scorer,
                      int workers) {
  if (images.empty()) throw InputError("run_sweep: no images");
  if (spec.levels.empty()) throw InputError("run_sweep: no levels");
  for (std::size_t i = 1; i < spec.levels.size(); ++i) {
    if (!(spec.levels[i] > spec.levels[i - 1])) {
      throw InputError("run_sweep: levels must be strictly increasing");
    }
  }

  SweepResult result;
  result.attribute = spec.attribute;
  result.levels = spec.levels;
  const std::size_t n_levels = spec.levels.size();
  std::vector<std::vector<double>> scores(n_levels,
                                          std::vector<double>(images.size()));
  parallel_for(n_levels * images.size(), workers, [&](std::size_t task) {
    const std::size_t li = task / images.size();
    const std::size_t ii = task % images.size();
    const ImageBuffer degraded =
        apply_degradation(images[ii], spec, spec.levels[li], ii, li);
    scores[li][ii] = scorer(degraded);
  });
  for (std::size_t li = 0; li < n_levels; ++li) {
    result.scores_by_level[spec.levels[li]] = std::move(scores[li]);
  }
  if (n_levels >= 2) {
    result.level_corr = level_correlation(result.scores_by_level);
  } else {
    result.level_corr = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace percept
