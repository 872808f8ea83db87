#include "surelet/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace surelet {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

SpatialField read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  if (pgm_token(in) != "P5") throw Error(ErrorCode::Io, path.string() + " is not a binary PGM");
  std::size_t width = 0, height = 0, maxval = 0;
  try {
    width = std::stoul(pgm_token(in));
    height = std::stoul(pgm_token(in));
    maxval = std::stoul(pgm_token(in));
  } catch (const std::exception&) {
    throw Error(ErrorCode::Io, "malformed PGM header in " + path.string());
  }
  if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
    throw Error(ErrorCode::Io, "unsupported PGM header in " + path.string());
  }
  const std::size_t bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(width * height * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw Error(ErrorCode::Io, "truncated PGM " + path.string());
  SpatialField out(GridShape{height, width});
  const double scale = 255.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned v = bytes == 1 ? raw[i] : (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1];
    out[i] = bytes == 1 && maxval == 255 ? static_cast<double>(v) : static_cast<double>(v) * scale;
  }
  return out;
}

SpatialField read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(ErrorCode::Io, "cannot read " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::Io, "cannot decode " + path.string() + ": " + msg);
  }
  SpatialField out(GridShape{image.height, image.width});
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i];
  return out;
}

std::vector<unsigned char> to_bytes(const SpatialField& image) {
  std::vector<unsigned char> out(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    out[i] = static_cast<unsigned char>(std::clamp(std::lround(image[i]), 0L, 255L));
  }
  return out;
}

}  // namespace

SpatialField read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Io, "no such file: " + path.string());
  return lower_extension(path) == ".png" ? read_png(path) : read_pgm(path);
}

void write_image(const std::filesystem::path& path, const SpatialField& image) {
  if (image.shape().rank() != 2) throw Error(ErrorCode::InvalidArgument, "only 2D fields can be written as images");
  const auto height = image.shape().dim(0);
  const auto width = image.shape().dim(1);
  const auto bytes = to_bytes(image);
  if (lower_extension(path) == ".png") {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(width);
    img.height = static_cast<png_uint_32>(height);
    img.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&img, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
      throw Error(ErrorCode::Io, "cannot write " + path.string() + ": " + img.message);
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot create " + path.string());
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

SpatialField center_crop(const SpatialField& image, std::size_t size) {
  const GridShape& s = image.shape();
  if (s.rank() != 2) throw Error(ErrorCode::InvalidArgument, "center_crop expects a 2D field");
  if (size == 0 || (size >= s.dim(0) && size >= s.dim(1))) return image;
  const std::size_t h = std::min(size, s.dim(0));
  const std::size_t w = std::min(size, s.dim(1));
  const std::size_t y0 = (s.dim(0) - h) / 2;
  const std::size_t x0 = (s.dim(1) - w) / 2;
  SpatialField out(GridShape{h, w});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) out[y * w + x] = image[(y0 + y) * s.dim(1) + x0 + x];
  }
  return out;
}

}  // namespace surelet
