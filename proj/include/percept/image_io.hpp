#pragma once

#include <functional>
#include <string>

#include "percept/image.hpp"

namespace percept {

// Maps a manifest path to pixels. Production code uses load_image; tests
// may substitute procedural loaders.
using ImageLoader = std::function<ImageBuffer(const std::string&)>;

// Reads an image file into [0,1] RGB. Binary PPM (P6) is handled natively;
// everything else goes through OpenCV imgcodecs when built with it.
ImageBuffer load_image(const std::string& path);

// Writes binary PPM (8-bit). Simple, dependency-free fixture format.
void save_ppm(const ImageBuffer& image, const std::string& path);

}  // namespace percept
