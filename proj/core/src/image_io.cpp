#include "strotss/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include <jpeglib.h>
#include <png.h>

namespace strotss {
namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool is_png(const std::vector<std::uint8_t>& b) {
  return b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0;
}

bool is_jpeg(const std::vector<std::uint8_t>& b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

// Decodes PNG bytes into interleaved 8-bit pixels of the requested format.
std::vector<std::uint8_t> decode_png(const std::vector<std::uint8_t>& bytes,
                                     std::uint32_t format, Extent& extent,
                                     const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw IoError(path.string() + ": " + img.message);
  }
  img.format = format;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw IoError(path.string() + ": " + msg);
  }
  extent = {img.height, img.width};
  return pixels;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Plain C-style body so longjmp never skips a destructor.
bool decode_jpeg_raw(const std::vector<std::uint8_t>& bytes, std::uint8_t** out,
                     Extent& extent, char* message) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_fail;
  std::uint8_t* volatile buffer = nullptr;
  if (setjmp(err.jump)) {
    std::strcpy(message, err.message);
    jpeg_destroy_decompress(&cinfo);
    std::free(buffer);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
  buffer = static_cast<std::uint8_t*>(std::malloc(stride * cinfo.output_height));
  if (!buffer) {
    std::strcpy(message, "out of memory");
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = const_cast<std::uint8_t*>(buffer) + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  extent = {cinfo.output_height, cinfo.output_width};
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  *out = buffer;
  return true;
}

std::vector<std::uint8_t> decode_jpeg(const std::vector<std::uint8_t>& bytes,
                                      Extent& extent, const std::filesystem::path& path) {
  std::uint8_t* raw = nullptr;
  char message[JMSG_LENGTH_MAX] = {0};
  if (!decode_jpeg_raw(bytes, &raw, extent, message)) {
    throw IoError(path.string() + ": " + message);
  }
  std::unique_ptr<std::uint8_t, decltype(&std::free)> owned(raw, &std::free);
  return {raw, raw + extent.area() * 3};
}

std::vector<std::uint8_t> to_interleaved(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError("expected a [3,H,W] image, got " + shape_string(image.shape()));
  }
  const std::size_t plane = image.dim(1) * image.dim(2);
  std::vector<std::uint8_t> rgb(plane * 3);
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const float v = std::clamp(image[c * plane + i], 0.0f, 1.0f);
      rgb[i * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  }
  return rgb;
}

std::vector<std::uint8_t> encode(const std::uint8_t* pixels, Extent extent,
                                 std::uint32_t format) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(extent.width);
  img.height = static_cast<png_uint_32>(extent.height);
  img.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels, 0, nullptr)) {
    throw IoError(std::string("PNG encoding failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels, 0, nullptr)) {
    throw IoError(std::string("PNG encoding failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

Tensor load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  Extent e;
  std::vector<std::uint8_t> rgb;
  if (is_png(bytes)) {
    rgb = decode_png(bytes, PNG_FORMAT_RGB, e, path);
  } else if (is_jpeg(bytes)) {
    rgb = decode_jpeg(bytes, e, path);
  } else {
    throw IoError(path.string() + ": not a PNG or JPEG file");
  }
  if (e.area() == 0) throw IoError(path.string() + ": empty image");
  Tensor out({3, e.height, e.width});
  const std::size_t plane = e.area();
  for (std::size_t i = 0; i < plane; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      out[c * plane + i] = static_cast<float>(rgb[i * 3 + c]) / 255.0f;
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Tensor& image) {
  const auto rgb = to_interleaved(image);
  return encode(rgb.data(), {image.dim(1), image.dim(2)}, PNG_FORMAT_RGB);
}

void save_png(const std::filesystem::path& path, const Tensor& image) {
  write_bytes(path, encode_png(image));
}

GrayImage load_gray_png(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (!is_png(bytes)) throw IoError(path.string() + ": not a PNG file");
  GrayImage out;
  const auto rgb = decode_png(bytes, PNG_FORMAT_RGB, out.extent, path);
  out.pixels.resize(out.extent.area());
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const std::uint8_t r = rgb[i * 3], g = rgb[i * 3 + 1], b = rgb[i * 3 + 2];
    if (r != g || g != b) {
      throw ValidationError(path.string() + ": mask pixel " + std::to_string(i) +
                            " is not gray");
    }
    out.pixels[i] = r;
  }
  return out;
}

void save_gray_png(const std::filesystem::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.extent.area() || image.extent.area() == 0) {
    throw ShapeError("gray image size does not match its extent");
  }
  write_bytes(path, encode(image.pixels.data(), image.extent, PNG_FORMAT_GRAY));
}

}  // namespace strotss
