#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fusedrive {

// 8-bit image with interleaved channels (1 = gray, 3 = RGB).
struct Image8 {
  int height = 0;
  int width = 0;
  int channels = 3;
  std::vector<std::uint8_t> data;

  Image8() = default;
  Image8(int h, int w, int ch, std::uint8_t fill = 0)
      : height(h), width(w), channels(ch), data(static_cast<std::size_t>(h) * w * ch, fill) {}

  std::uint8_t& at(int r, int c, int ch) {
    return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }
  std::uint8_t at(int r, int c, int ch) const {
    return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }
  bool operator==(const Image8&) const = default;
};

void write_png(const std::string& path, const Image8& img);
Image8 read_png(const std::string& path);

}  // namespace fusedrive
