#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tubekit/morphology.hpp"
#include "tubekit/tensor.hpp"

namespace tubekit {

struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;  // row-major

  uint8_t at(int r, int c) const {
    return pixels[static_cast<size_t>(r) * static_cast<size_t>(width) + static_cast<size_t>(c)];
  }
};

struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;  // row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int h, int w)
      : height(h), width(w), pixels(static_cast<size_t>(h) * static_cast<size_t>(w) * 3, 0) {}
  void set(int r, int c, uint8_t red, uint8_t green, uint8_t blue) {
    size_t i = (static_cast<size_t>(r) * static_cast<size_t>(width) + static_cast<size_t>(c)) * 3;
    pixels[i] = red;
    pixels[i + 1] = green;
    pixels[i + 2] = blue;
  }
};

// Reads PNG (any color type, converted to 8-bit gray) or binary/ascii PGM,
// chosen by file extension (.png / .pgm).
GrayImage read_gray(const std::filesystem::path& path);
void write_gray_png(const std::filesystem::path& path, const GrayImage& img);
void write_gray_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& img);

// Mask convention: foreground = 255, background = 0; >= 128 reads as foreground.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

// Converts a 1 x 1 x H x W (or H x W) tensor to 8-bit gray, clamping to [0,1].
GrayImage tensor_to_gray(const Tensor& t);
Tensor gray_to_tensor(const GrayImage& img);  // 1 x 1 x H x W scaled to [0,1]

}  // namespace tubekit
