#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "percept/errors.hpp"

namespace percept {

// Interleaved RGB float image, values in [0, 1].
struct ImageBuffer {
  int height = 0;
  int width = 0;
  std::vector<float> data;  // size = height * width * 3, index (y*width + x)*3 + c

  ImageBuffer() = default;
  ImageBuffer(int h, int w) : height(h), width(w) {
    if (h < 1 || w < 1) throw InputError("image dimensions must be >= 1");
    data.assign(static_cast<std::size_t>(h) * w * 3, 0.0f);
  }

  static ImageBuffer constant(int h, int w, float r, float g, float b) {
    ImageBuffer img(h, w);
    for (std::size_t i = 0; i < img.data.size(); i += 3) {
      img.data[i] = r;
      img.data[i + 1] = g;
      img.data[i + 2] = b;
    }
    return img;
  }

  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::int64_t pixels() const {
    return static_cast<std::int64_t>(height) * width;
  }

  bool operator==(const ImageBuffer& other) const {
    return height == other.height && width == other.width && data == other.data;
  }
};

// Throws InputError if any value is outside [0, 1] or non-finite.
void validate_image(const ImageBuffer& image);

// Bilinear resize with half-pixel sample centers.
ImageBuffer resize_bilinear(const ImageBuffer& image, int new_height,
                            int new_width);

// Resize so the shorter side equals `target` (aspect preserved). Images whose
// shorter side already equals `target` are returned unchanged.
ImageBuffer resize_shorter_side(const ImageBuffer& image, int target);

}  // namespace percept
