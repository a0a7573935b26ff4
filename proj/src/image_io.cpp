#include "tubekit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace tubekit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

GrayImage read_png_gray(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open PNG: " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if ((png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR) != 0) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  GrayImage img;
  img.height = h;
  img.width = w;
  img.pixels.resize(static_cast<size_t>(h) * static_cast<size_t>(w));
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int r = 0; r < h; ++r) rows[static_cast<size_t>(r)] = img.pixels.data() + static_cast<size_t>(r) * w;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const std::filesystem::path& path, int h, int w, int color_type,
               const uint8_t* data, int bytes_per_pixel) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot open for write: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int r = 0; r < h; ++r) {
    rows[static_cast<size_t>(r)] =
        const_cast<png_bytep>(data + static_cast<size_t>(r) * static_cast<size_t>(w) * bytes_per_pixel);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open PGM: " + path.string());
  std::string magic;
  is >> magic;
  if (magic != "P5" && magic != "P2") throw IoError("not a PGM file: " + path.string());
  auto next_int = [&is, &path]() {
    int v;
    while (true) {
      is >> std::ws;
      if (is.peek() == '#') {
        std::string line;
        std::getline(is, line);
        continue;
      }
      if (!(is >> v)) throw IoError("malformed PGM header: " + path.string());
      return v;
    }
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (maxval <= 0 || maxval > 255) throw IoError("unsupported PGM maxval: " + path.string());
  GrayImage img;
  img.height = h;
  img.width = w;
  img.pixels.resize(static_cast<size_t>(h) * static_cast<size_t>(w));
  if (magic == "P5") {
    is.get();  // single whitespace after maxval
    is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!is) throw IoError("truncated PGM: " + path.string());
  } else {
    for (auto& p : img.pixels) {
      int v;
      if (!(is >> v)) throw IoError("truncated PGM: " + path.string());
      p = static_cast<uint8_t>(std::clamp(v, 0, 255));
    }
  }
  return img;
}

}  // namespace

GrayImage read_gray(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm" || ext == ".PGM") return read_pgm(path);
  return read_png_gray(path);
}

void write_gray_png(const std::filesystem::path& path, const GrayImage& img) {
  write_png(path, img.height, img.width, PNG_COLOR_TYPE_GRAY, img.pixels.data(), 1);
}

void write_gray_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for write: " + path.string());
  os << "P5\n" << img.width << " " << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
  write_png(path, img.height, img.width, PNG_COLOR_TYPE_RGB, img.pixels.data(), 3);
}

BinaryMask read_mask(const std::filesystem::path& path) {
  const GrayImage img = read_gray(path);
  BinaryMask mask(img.height, img.width);
  for (size_t i = 0; i < img.pixels.size(); ++i) mask.pixels[i] = img.pixels[i] >= 128 ? 1 : 0;
  return mask;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  GrayImage img;
  img.height = mask.height;
  img.width = mask.width;
  img.pixels.resize(mask.pixels.size());
  for (size_t i = 0; i < mask.pixels.size(); ++i) img.pixels[i] = mask.pixels[i] ? 255 : 0;
  if (path.extension() == ".pgm") {
    write_gray_pgm(path, img);
  } else {
    write_gray_png(path, img);
  }
}

GrayImage tensor_to_gray(const Tensor& t) {
  int64_t h, w;
  if (t.rank() == 4 && t.dim(0) == 1 && t.dim(1) == 1) {
    h = t.dim(2);
    w = t.dim(3);
  } else if (t.rank() == 2) {
    h = t.dim(0);
    w = t.dim(1);
  } else {
    throw ShapeError("tensor_to_gray: expected 1x1xHxW or HxW, got " + t.shape_str());
  }
  GrayImage img;
  img.height = static_cast<int>(h);
  img.width = static_cast<int>(w);
  img.pixels.resize(static_cast<size_t>(h * w));
  for (int64_t i = 0; i < h * w; ++i) {
    const double v = std::clamp(t.data[static_cast<size_t>(i)], 0.0, 1.0);
    img.pixels[static_cast<size_t>(i)] = static_cast<uint8_t>(std::lround(v * 255.0));
  }
  return img;
}

Tensor gray_to_tensor(const GrayImage& img) {
  Tensor t = Tensor::zeros({1, 1, img.height, img.width});
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    t.data[i] = static_cast<double>(img.pixels[i]) / 255.0;
  }
  return t;
}

}  // namespace tubekit
