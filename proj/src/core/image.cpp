#include "image.hpp"

#include <png.h>
#include <jpeglib.h>

#include <array>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

#include "error.hpp"

namespace fgai {
namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) fail(ErrorCode::Io, "cannot open " + path.string());
  return f;
}

Raster read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    fail(ErrorCode::Io, "cannot decode PNG " + path.string() + ": " + image.message);

  Raster out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  out.channels = color ? 3 : 1;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  out.data.resize(PNG_IMAGE_SIZE(image));
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&image, &black, out.data.data(), 0, nullptr)) {
    png_image_free(&image);
    fail(ErrorCode::Io, "cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  std::array<char, JMSG_LENGTH_MAX> message{};
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message.data());
  std::longjmp(err->jump, 1);
}

Raster read_jpeg(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;

  // Everything touched after setjmp lives outside the jump scope.
  Raster out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorCode::Io, "cannot decode JPEG " + path.string() + ": " + err.message.data());
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.channels = static_cast<int>(cinfo.output_components);
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
  out.data.resize(stride * out.height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

}  // namespace

GrayImage to_gray(const Raster& raster) {
  GrayImage gray(raster.width, raster.height);
  const std::size_t n = gray.pixels.size();
  if (raster.channels == 1) {
    gray.pixels = raster.data;
  } else if (raster.channels == 3) {
    for (std::size_t i = 0; i < n; ++i)
      gray.pixels[i] = rgb_to_gray(raster.data[3 * i], raster.data[3 * i + 1], raster.data[3 * i + 2]);
  } else {
    fail(ErrorCode::InvalidArgument, "unsupported channel count " + std::to_string(raster.channels));
  }
  return gray;
}

Raster read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open image " + path.string());
  std::array<unsigned char, 8> sig{};
  in.read(reinterpret_cast<char*>(sig.data()), sig.size());
  if (in.gcount() < 3) fail(ErrorCode::Io, "image too short: " + path.string());
  in.close();
  if (png_sig_cmp(sig.data(), 0, 8) == 0) return read_png(path);
  if (sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return read_jpeg(path);
  fail(ErrorCode::Io, "unrecognised image format: " + path.string());
}

GrayImage read_gray(const std::filesystem::path& path) { return to_gray(read_raster(path)); }

void write_png(const std::filesystem::path& path, const Raster& raster) {
  if (raster.width <= 0 || raster.height <= 0) fail(ErrorCode::InvalidArgument, "empty raster");
  if (raster.channels != 1 && raster.channels != 3)
    fail(ErrorCode::InvalidArgument, "PNG writer supports 1 or 3 channels");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = raster.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, raster.data.data(), 0, nullptr))
    fail(ErrorCode::Io, "cannot write PNG " + path.string() + ": " + image.message);
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_png(path, Raster{image.width, image.height, 1, image.pixels});
}

}  // namespace fgai
