#include "percept/image.hpp"

#include <cmath>

namespace percept {

void validate_image(const ImageBuffer& image) {
  if (image.height < 1 || image.width < 1) {
    throw InputError("image dimensions must be >= 1");
  }
  if (image.data.size() !=
      static_cast<std::size_t>(image.height) * image.width * 3) {
    throw InputError("image buffer size does not match dimensions");
  }
  for (const float v : image.data) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw InputError("image values must lie in [0, 1]");
    }
  }
}

ImageBuffer resize_bilinear(const ImageBuffer& image, int new_height,
                            int new_width) {
  if (new_height < 1 || new_width < 1) {
    throw InputError("resize target must be >= 1");
  }
  if (new_height == image.height && new_width == image.width) return image;
  ImageBuffer out(new_height, new_width);
  const double sy = static_cast<double>(image.height) / new_height;
  const double sx = static_cast<double>(image.width) / new_width;
  for (int y = 0; y < new_height; ++y) {
    // Half-pixel centers (align_corners=false convention).
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::max(0.0, std::min(fy, static_cast<double>(image.height - 1)));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < new_width; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::max(0.0, std::min(fx, static_cast<double>(image.width - 1)));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * image.at(y0, x0, c) + wx * image.at(y0, x1, c);
        const double bot = (1.0 - wx) * image.at(y1, x0, c) + wx * image.at(y1, x1, c);
        out.at(y, x, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

ImageBuffer resize_shorter_side(const ImageBuffer& image, int target) {
  if (target < 1) throw InputError("shorter-side target must be >= 1");
  const int shorter = std::min(image.height, image.width);
  if (shorter == target) return image;
  const double scale = static_cast<double>(target) / shorter;
  const int nh = std::max(1, static_cast<int>(std::lround(image.height * scale)));
  const int nw = std::max(1, static_cast<int>(std::lround(image.width * scale)));
  return resize_bilinear(image, nh, nw);
}

}  // namespace percept
