#include "tokengan/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "tokengan/errors.hpp"

namespace tokengan {

std::uint8_t to_byte(double x) {
  const double v = std::clamp((x + 1.0) * 127.5, 0.0, 255.0);
  return static_cast<std::uint8_t>(std::nearbyint(v));
}

double from_byte(std::uint8_t v) { return static_cast<double>(v) / 127.5 - 1.0; }

namespace {

struct ImageShape {
  std::size_t c, h, w;
};

ImageShape image_shape(const Tensor& image) {
  if (image.rank() != 3 || (image.dim(0) != 1 && image.dim(0) != 3)) {
    throw DimensionError("expected a [1|3 x H x W] image, got " +
                         shape_str(image.shape()));
  }
  return {image.dim(0), image.dim(1), image.dim(2)};
}

bool ends_with(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == b;
  });
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

void write_png(const std::string& path, const ImageShape& s,
               const std::vector<std::uint8_t>& pixels) {
  File file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(s.w),
               static_cast<png_uint_32>(s.h), 8,
               s.c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < s.h; ++y) {
    png_write_row(png, pixels.data() + y * s.w * s.c);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Tensor read_png(const std::string& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("cannot decode " + path + ": " + img.message);
  }
  const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("cannot decode " + path + ": " + img.message);
  }
  const std::size_t c = gray ? 1 : 3;
  const std::size_t h = img.height;
  const std::size_t w = img.width;
  std::vector<double> values(c * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t k = 0; k < c; ++k) {
        values[(k * h + y) * w + x] = from_byte(pixels[(y * w + x) * c + k]);
      }
    }
  }
  return Tensor::from({c, h, w}, std::move(values));
}

void write_netpbm(const std::string& path, const ImageShape& s,
                  const std::vector<std::uint8_t>& pixels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << (s.c == 3 ? "P6" : "P5") << "\n" << s.w << " " << s.h << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("failed to write " + path);
}

// Next header token, skipping whitespace and '#' comments.
std::string netpbm_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {}
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

Tensor read_netpbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string magic = netpbm_token(in);
  if (magic != "P6" && magic != "P5") throw IoError(path + " is not a binary PPM/PGM");
  std::size_t w = 0, h = 0, maxval = 0;
  try {
    w = std::stoul(netpbm_token(in));
    h = std::stoul(netpbm_token(in));
    maxval = std::stoul(netpbm_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed header in " + path);
  }
  if (maxval != 255 || w == 0 || h == 0) {
    throw IoError(path + ": only 8-bit images are supported");
  }
  const std::size_t c = magic == "P6" ? 3 : 1;
  std::vector<std::uint8_t> pixels(c * h * w);
  if (!in.read(reinterpret_cast<char*>(pixels.data()),
               static_cast<std::streamsize>(pixels.size()))) {
    throw IoError("truncated pixel data in " + path);
  }
  std::vector<double> values(c * h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t k = 0; k < c; ++k) {
        values[(k * h + y) * w + x] = from_byte(pixels[(y * w + x) * c + k]);
      }
    }
  }
  return Tensor::from({c, h, w}, std::move(values));
}

}  // namespace

std::vector<std::uint8_t> to_pixels(const Tensor& image) {
  const ImageShape s = image_shape(image);
  const auto data = image.data();
  std::vector<std::uint8_t> pixels(s.c * s.h * s.w);
  for (std::size_t y = 0; y < s.h; ++y) {
    for (std::size_t x = 0; x < s.w; ++x) {
      for (std::size_t k = 0; k < s.c; ++k) {
        pixels[(y * s.w + x) * s.c + k] = to_byte(data[(k * s.h + y) * s.w + x]);
      }
    }
  }
  return pixels;
}

void write_image(const std::string& path, const Tensor& image) {
  const ImageShape s = image_shape(image);
  const auto pixels = to_pixels(image);
  if (ends_with(path, ".png")) {
    write_png(path, s, pixels);
  } else if (ends_with(path, ".ppm") || ends_with(path, ".pgm")) {
    if ((s.c == 3) != ends_with(path, ".ppm")) {
      throw IoError(path + ": use .ppm for color and .pgm for grayscale");
    }
    write_netpbm(path, s, pixels);
  } else {
    throw IoError("unknown image extension in " + path);
  }
}

Tensor read_image(const std::string& path) {
  if (ends_with(path, ".png")) return read_png(path);
  if (ends_with(path, ".ppm") || ends_with(path, ".pgm")) return read_netpbm(path);
  throw IoError("unknown image extension in " + path);
}

Tensor image_grid(const std::vector<Tensor>& images, std::size_t columns,
                  std::size_t padding) {
  if (images.empty() || columns == 0) throw ContractError("empty image grid");
  const Shape& shape = images.front().shape();
  if (shape.size() != 3) throw DimensionError("grid tiles must be [c x H x W]");
  for (const auto& im : images) {
    if (im.shape() != shape) {
      throw DimensionError("grid tiles differ: " + shape_str(shape) + " vs " +
                           shape_str(im.shape()));
    }
  }
  const std::size_t c = shape[0], h = shape[1], w = shape[2];
  const std::size_t cols = std::min(columns, images.size());
  const std::size_t rows = (images.size() + cols - 1) / cols;
  const std::size_t gh = rows * h + (rows - 1) * padding;
  const std::size_t gw = cols * w + (cols - 1) * padding;
  std::vector<double> out(c * gh * gw, -1.0);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::size_t oy = (i / cols) * (h + padding);
    const std::size_t ox = (i % cols) * (w + padding);
    const auto src = images[i].data();
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t y = 0; y < h; ++y) {
        std::copy_n(src.begin() + (k * h + y) * w, w,
                    out.begin() + (k * gh + oy + y) * gw + ox);
      }
    }
  }
  return Tensor::from({c, gh, gw}, std::move(out));
}

std::vector<Tensor> unbatch(const Tensor& batch) {
  if (batch.rank() != 4) {
    throw DimensionError("expected [B x c x H x W], got " + shape_str(batch.shape()));
  }
  const std::size_t b = batch.dim(0);
  const Shape one{batch.dim(1), batch.dim(2), batch.dim(3)};
  const std::size_t n = shape_numel(one);
  const auto data = batch.data();
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < b; ++i) {
    out.push_back(Tensor::from(
        one, std::vector<double>(data.begin() + i * n, data.begin() + (i + 1) * n)));
  }
  return out;
}

}  // namespace tokengan
