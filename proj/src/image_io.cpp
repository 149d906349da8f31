#include "percept/image_io.hpp"

#include <algorithm>
#include <fstream>

#ifdef PERCEPT_WITH_OPENCV
#include <opencv2/imgcodecs.hpp>
#endif

namespace percept {

namespace {

bool has_suffix(const std::string& path, const std::string& suffix) {
  if (path.size() < suffix.size()) return false;
  std::string tail = path.substr(path.size() - suffix.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return tail == suffix;
}

ImageBuffer load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AssetError("cannot open image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw AssetError("not a binary PPM: " + path);
  auto next_int = [&]() {
    int v;
    // Skip whitespace and # comments.
    while (true) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      break;
    }
    if (!(in >> v)) throw AssetError("truncated PPM header: " + path);
    return v;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255) {
    throw AssetError("unsupported PPM header in " + path);
  }
  in.get();  // single whitespace byte after maxval
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (!in) throw AssetError("truncated PPM payload: " + path);
  ImageBuffer img(h, w);
  const float scale = 1.0f / static_cast<float>(maxval);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    img.data[i] = static_cast<float>(raw[i]) * scale;
  }
  return img;
}

}  // namespace

ImageBuffer load_image(const std::string& path) {
  if (has_suffix(path, ".ppm")) return load_ppm(path);
#ifdef PERCEPT_WITH_OPENCV
  const cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw AssetError("cannot decode image: " + path);
  ImageBuffer img(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(y, x, 0) = static_cast<float>(row[x][2]) / 255.0f;
      img.at(y, x, 1) = static_cast<float>(row[x][1]) / 255.0f;
      img.at(y, x, 2) = static_cast<float>(row[x][0]) / 255.0f;
    }
  }
  return img;
#else
  throw AssetError("built without OpenCV: only .ppm supported, got " + path);
#endif
}

void save_ppm(const ImageBuffer& image, const std::string& path) {
  validate_image(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AssetError("cannot write image: " + path);
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> raw(image.data.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<unsigned char>(
        std::lround(std::clamp(image.data[i], 0.0f, 1.0f) * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
}

}  // namespace percept
