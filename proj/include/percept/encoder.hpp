#pragma once

#include <string>

#include "percept/embedding.hpp"
#include "percept/image.hpp"

namespace percept {

// Anything that can place images and prompt texts in a shared feature space.
// The production implementation is Backbone; tests substitute deterministic
// mocks behind this interface.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual int dim() const = 0;
  virtual Embedding embed_image(const ImageBuffer& image) const = 0;
  virtual Embedding embed_text(const std::string& text) const = 0;
  // Identifies the weights + preprocessing for cache keys.
  virtual std::string fingerprint() const = 0;
};

}  // namespace percept
