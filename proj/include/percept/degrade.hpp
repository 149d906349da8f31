#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "percept/image.hpp"

namespace percept {

enum class DegradeAttribute { Brightness, Noisiness, Colorfulness, Sharpness };

DegradeAttribute degrade_attribute_from_string(const std::string& name);
std::string to_string(DegradeAttribute attribute);

// Per-pixel multiply by factor, clipped. factor == 1 returns the input
// bit-identically.
ImageBuffer adjust_brightness(const ImageBuffer& image, double factor);

// Adds zero-mean Gaussian noise with std sigma (per channel, Box-Muller over
// a fixed PRNG so outputs are reproducible across platforms), clipped.
// sigma == 0 returns the input bit-identically.
ImageBuffer adjust_noise(const ImageBuffer& image, double sigma,
                         std::uint64_t seed);

// out = gray + factor * (in - gray) with Rec. 601 luma gray, clipped.
// factor 0 = grayscale, 1 = identity (bit-identical).
ImageBuffer adjust_colorfulness(const ImageBuffer& image, double factor);

// out = blur + factor * (in - blur), clipped, where blur is a fixed 3x3
// smoothing kernel [[1,1,1],[1,5,1],[1,1,1]]/13 with replicate-edge padding.
// factor 0 = fully blurred, 1 = identity (bit-identical), > 1 sharpens.
ImageBuffer adjust_sharpness(const ImageBuffer& image, double factor);

// The blur used by adjust_sharpness, exposed so tests can oracle against a
// direct convolution.
ImageBuffer smooth_kernel_blur(const ImageBuffer& image);

// Rec. 601 luma weights used for desaturation.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

// A controlled sweep over one attribute. Levels are strictly increasing and
// oriented so a larger level means more of the positive-prompt attribute
// (brighter, cleaner, more colorful, sharper). For Noisiness the level is
// -sigma, so level 0 is the clean image.
struct DegradationSpec {
  DegradeAttribute attribute = DegradeAttribute::Brightness;
  std::vector<double> levels;
  std::uint64_t seed = 0;
};

// Default level grids (10 steps each). These are convenience values, not
// from any published protocol, and are freely configurable.
std::vector<double> default_levels(DegradeAttribute attribute);

// Applies `spec` to `image` at `level` (dispatches to the right adjuster
// with the level translated to that operator's parameter).
ImageBuffer apply_degradation(const ImageBuffer& image,
                              const DegradationSpec& spec, double level,
                              std::size_t image_index, std::size_t level_index);

struct SweepResult {
  DegradeAttribute attribute;
  std::vector<double> levels;
  std::map<double, std::vector<double>> scores_by_level;
  double level_corr = 0.0;
};

using ImageScorer = std::function<double(const ImageBuffer&)>;

// Degrades every image at every level and scores it. The scorer is expected
// to target the attribute's antonym pair (or be a mock in tests). Noise RNG
// is seeded per (seed, image index, level index) so results do not depend on
// evaluation order.
SweepResult run_sweep(const std::vector<ImageBuffer>& images,
                      const DegradationSpec& spec, const ImageScorer& scorer,
                      int workers = 1);

}  // namespace percept
