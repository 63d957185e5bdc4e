#include <cstring>
#include <fstream>
#include <iterator>

#include <png.h>

#include "reenact/conditioning.hpp"
#include "reenact/error.hpp"

namespace reenact {

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != 3 * static_cast<std::size_t>(image.width) * image.height)
    throw Error(ErrorCode::InvalidArgument, "image size does not match its buffer");
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(image.width);
  desc.height = static_cast<png_uint_32>(image.height);
  desc.format = PNG_FORMAT_RGB;
  desc.flags = PNG_IMAGE_FLAG_FAST;

  std::vector<std::uint8_t> out(PNG_IMAGE_PNG_SIZE_MAX(desc));
  png_alloc_size_t size = out.size();
  if (!png_image_write_to_memory(&desc, out.data(), &size, 0, image.rgb.data(), 0, nullptr))
    throw Error(ErrorCode::Io, std::string("png encode: ") + desc.message);
  out.resize(size);
  return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image desc;
  std::memset(&desc, 0, sizeof desc);
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&desc, bytes.data(), bytes.size()))
    throw Error(ErrorCode::BadFormat, std::string("png decode: ") + desc.message);
  desc.format = PNG_FORMAT_RGB;
  Image img;
  img.width = static_cast<int>(desc.width);
  img.height = static_cast<int>(desc.height);
  img.rgb.resize(PNG_IMAGE_SIZE(desc));
  if (!png_image_finish_read(&desc, nullptr, img.rgb.data(), 0, nullptr)) {
    png_image_free(&desc);
    throw Error(ErrorCode::BadFormat, std::string("png decode: ") + desc.message);
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

}  // namespace reenact
