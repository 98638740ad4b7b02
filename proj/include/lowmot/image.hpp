#pragma once

#include <cstdint>
#include <vector>

namespace lowmot {

// Row-major RGB8 frame. Immutable once filled; shared read-only across
// worker threads during batch visual tracking.
struct ImageFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3 bytes

  ImageFrame() = default;
  ImageFrame(int width, int height);
  ImageFrame(int width, int height, std::vector<std::uint8_t> pixels);

  bool empty() const { return width == 0 || height == 0; }

  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  std::uint8_t* at(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

}  // namespace lowmot
