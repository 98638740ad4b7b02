#include "lowmot/image.hpp"

#include <stdexcept>

namespace lowmot {

ImageFrame::ImageFrame(int width, int height)
    : width(width),
      height(height),
      pixels(static_cast<std::size_t>(width) * height * 3, 0) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("ImageFrame: dimensions must be >= 1");
  }
}

ImageFrame::ImageFrame(int width, int height, std::vector<std::uint8_t> px)
    : width(width), height(height), pixels(std::move(px)) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("ImageFrame: dimensions must be >= 1");
  }
  if (pixels.size() != static_cast<std::size_t>(width) * height * 3) {
    throw std::invalid_argument("ImageFrame: buffer length mismatch");
  }
}

}  // namespace lowmot
