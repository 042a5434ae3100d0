// Copyright 2026 The VesselGrow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vesselgrow/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <sstream>
#include <system_error>

namespace vesselgrow {
namespace {

namespace fs = std::filesystem;

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return bytes;
}

// Writes via a sibling temporary and renames, so readers never observe a
// half-written file.
template <typename WriteFn>
void write_atomically(const fs::path& path, WriteFn&& write) {
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    write(tmp);
    fs::rename(tmp, path);
  } catch (const fs::filesystem_error& e) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot write '" + path.string() + "': " + e.what());
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

// ---------------------------------------------------------------- PNG

struct RawPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<unsigned char> pixels;
  std::vector<png_bytep> rows;
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* raw = static_cast<RawPng*>(png_get_error_ptr(png));
  if (raw) std::snprintf(raw->message, sizeof raw->message, "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct MemoryReader {
  const unsigned char* data;
  std::size_t size;
  std::size_t offset;
};

void read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->offset + length > reader->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, reader->data + reader->offset, length);
  reader->offset += length;
}

// Decodes into `raw`. Only POD and objects owned by the caller live across
// setjmp, so a longjmp never skips a destructor.
bool decode_png_raw(const std::vector<unsigned char>& bytes, RawPng* raw) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, raw, on_png_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  MemoryReader reader{bytes.data(), bytes.size(), 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, read_from_memory);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  // Transparency (alpha channel or tRNS chunk) carries no intensity.
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  raw->width = png_get_image_width(png, info);
  raw->height = png_get_image_height(png, info);
  raw->channels = png_get_channels(png, info);
  raw->bit_depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  raw->pixels.resize(row_bytes * raw->height);
  raw->rows.resize(raw->height);
  for (png_uint_32 y = 0; y < raw->height; ++y) {
    raw->rows[y] = raw->pixels.data() + y * row_bytes;
  }
  png_read_image(png, raw->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

GrayImage decode_png(const std::vector<unsigned char>& bytes, const fs::path& path) {
  RawPng raw;
  if (!decode_png_raw(bytes, &raw)) {
    throw FormatError("invalid PNG '" + path.string() + "': " + raw.message);
  }
  if (raw.channels != 1 && raw.channels != 3) {
    throw FormatError("unsupported PNG channel layout in '" + path.string() + "'");
  }
  if (raw.bit_depth != 8 && raw.bit_depth != 16) {
    throw FormatError("unsupported PNG bit depth in '" + path.string() + "'");
  }
  const int w = static_cast<int>(raw.width);
  const int h = static_cast<int>(raw.height);
  const bool wide = raw.bit_depth == 16;
  auto sample = [&](const unsigned char* row, std::size_t i) -> double {
    if (!wide) return row[i];
    const unsigned v = (static_cast<unsigned>(row[2 * i]) << 8) | row[2 * i + 1];
    return v * 255.0 / 65535.0;
  };
  std::vector<double> data(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const unsigned char* row = raw.rows[y];
    for (int x = 0; x < w; ++x) {
      double v;
      if (raw.channels == 1) {
        v = sample(row, x);
      } else {
        const std::size_t base = static_cast<std::size_t>(x) * 3;
        v = 0.299 * sample(row, base) + 0.587 * sample(row, base + 1) +
            0.114 * sample(row, base + 2);
      }
      data[static_cast<std::size_t>(y) * w + x] = std::clamp(v, 0.0, 255.0);
    }
  }
  return GrayImage(w, h, std::move(data));
}

struct PngWriter {
  std::FILE* file = nullptr;
  char message[256] = {};
};

void on_png_write_error(png_structp png, png_const_charp msg) {
  auto* writer = static_cast<PngWriter*>(png_get_error_ptr(png));
  if (writer) std::snprintf(writer->message, sizeof writer->message, "%s", msg);
  png_longjmp(png, 1);
}

bool encode_png_raw(PngWriter* writer, int width, int height, int bit_depth,
                    std::vector<png_bytep>& rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, writer,
                                            on_png_write_error, on_png_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, writer->file);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

// `bytes` holds big-endian samples, row-major, `bit_depth` 8 or 16.
void write_gray_png(const fs::path& path, int width, int height, int bit_depth,
                    std::vector<unsigned char> bytes) {
  write_atomically(path, [&](const fs::path& tmp) {
    FilePtr file(std::fopen(tmp.string().c_str(), "wb"));
    if (!file) throw IoError("cannot open '" + tmp.string() + "' for writing");
    const std::size_t row_bytes = static_cast<std::size_t>(width) * (bit_depth / 8);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = bytes.data() + y * row_bytes;
    PngWriter writer{file.get(), {}};
    if (!encode_png_raw(&writer, width, height, bit_depth, rows)) {
      throw IoError("PNG encode failed for '" + path.string() + "': " + writer.message);
    }
    if (std::fflush(file.get()) != 0) throw IoError("write failed for '" + path.string() + "'");
  });
}

// ---------------------------------------------------------------- PGM

class PgmHeaderReader {
 public:
  PgmHeaderReader(const std::vector<unsigned char>& bytes, const fs::path& path)
      : bytes_(bytes), path_(path) {}

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw FormatError("malformed PGM header in '" + path_.string() + "'");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000'000L) throw FormatError("PGM value too large in '" + path_.string() + "'");
    }
    return v;
  }

  // After maxval exactly one whitespace byte precedes the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 2;
};

GrayImage decode_pgm(const std::vector<unsigned char>& bytes, const fs::path& path) {
  const bool binary = bytes[1] == '5';
  PgmHeaderReader header(bytes, path);
  const long w = header.next_int();
  const long h = header.next_int();
  const long maxval = header.next_int();
  if (w <= 0 || h <= 0 || w > 65535 || h > 65535) {
    throw FormatError("bad PGM dimensions in '" + path.string() + "'");
  }
  if (maxval <= 0 || maxval > 65535) {
    throw FormatError("bad PGM maxval in '" + path.string() + "'");
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> data(n);
  const double scale = 255.0 / static_cast<double>(maxval);
  auto store = [&](std::size_t i, long v) {
    if (v > maxval) throw FormatError("PGM sample exceeds maxval in '" + path.string() + "'");
    data[i] = maxval == 255 ? static_cast<double>(v) : v * scale;
  };
  if (binary) {
    const std::size_t bps = maxval < 256 ? 1 : 2;
    const std::size_t offset = header.raster_offset();
    if (offset + n * bps > bytes.size()) {
      throw FormatError("truncated PGM raster in '" + path.string() + "'");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned char* p = bytes.data() + offset + i * bps;
      store(i, bps == 1 ? p[0] : (static_cast<long>(p[0]) << 8) | p[1]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) store(i, header.next_int());
  }
  return GrayImage(static_cast<int>(w), static_cast<int>(h), std::move(data));
}

bool is_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".pgm";
}

constexpr std::string_view kTruthSuffix = "_gt";

}  // namespace

GrayImage load_gray(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw IoError("cannot read '" + path.string() + "': no such file");
  }
  const std::vector<unsigned char> bytes = read_all(path);
  static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin())) {
    return decode_png(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
    return decode_pgm(bytes, path);
  }
  throw FormatError("unsupported image encoding in '" + path.string() + "'");
}

void save_mask(const BinaryMask& mask, const fs::path& path) {
  std::vector<unsigned char> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  write_gray_png(path, mask.width(), mask.height(), 8, std::move(bytes));
}

void save_gray8(const GrayImage& img, const fs::path& path) {
  std::vector<unsigned char> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(std::lround(img[i]));
  }
  write_gray_png(path, img.width(), img.height(), 8, std::move(bytes));
}

void save_unit16(const Plane& plane, const fs::path& path) {
  std::vector<unsigned char> bytes(plane.size() * 2);
  for (std::size_t i = 0; i < plane.size(); ++i) {
    const double v = std::isnan(plane[i]) ? 0.0 : std::clamp(plane[i], 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(v * 65535.0));
    bytes[2 * i] = static_cast<unsigned char>(q >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(q & 0xFF);
  }
  write_gray_png(path, plane.width(), plane.height(), 16, std::move(bytes));
}

GrayImage normalize_min_max(const Plane& plane) {
  const auto [lo, hi] = std::minmax_element(plane.data().begin(), plane.data().end());
  const double min = *lo;
  const double range = *hi - *lo;
  Plane out(plane.width(), plane.height());
  if (range > 0.0 && std::isfinite(range)) {
    for (std::size_t i = 0; i < plane.size(); ++i) {
      out[i] = (plane[i] - min) * 255.0 / range;
    }
  }
  return GrayImage::clamped(std::move(out));
}

std::vector<DatasetEntry> load_dataset(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("dataset directory '" + dir.string() + "' does not exist");
  }
  std::map<std::string, fs::path> images;
  std::map<std::string, fs::path> truths;
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file() || !is_image_extension(item.path())) continue;
    const std::string stem = item.path().stem().string();
    const bool is_truth = stem.size() > kTruthSuffix.size() &&
                          stem.ends_with(kTruthSuffix);
    auto& bucket = is_truth ? truths : images;
    const std::string id =
        is_truth ? stem.substr(0, stem.size() - kTruthSuffix.size()) : stem;
    if (!bucket.emplace(id, item.path()).second) {
      throw PairingError("duplicate file for id '" + id + "' in '" + dir.string() + "'");
    }
  }
  for (const auto& [id, path] : images) {
    if (!truths.contains(id)) {
      throw PairingError("image '" + path.string() + "' has no ground truth '" + id +
                         "_gt'");
    }
  }
  for (const auto& [id, path] : truths) {
    if (!images.contains(id)) {
      throw PairingError("ground truth '" + path.string() + "' has no image '" + id + "'");
    }
  }

  std::vector<DatasetEntry> entries;
  entries.reserve(images.size());
  for (const auto& [id, path] : images) {
    GrayImage image = load_gray(path);
    GrayImage truth_gray = load_gray(truths.at(id));
    if (image.width() != truth_gray.width() || image.height() != truth_gray.height()) {
      std::ostringstream msg;
      msg << "size mismatch for '" << id << "': image " << image.width() << "x"
          << image.height() << ", truth " << truth_gray.width() << "x"
          << truth_gray.height();
      throw DimensionError(msg.str());
    }
    entries.push_back({id, std::move(image), threshold(truth_gray, 128.0)});
  }
  return entries;
}

void save_dataset(const std::vector<DatasetEntry>& entries, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& entry : entries) {
    save_gray8(entry.image, dir / (entry.image_id + ".png"));
    save_mask(entry.truth, dir / (entry.image_id + std::string(kTruthSuffix) + ".png"));
  }
}

}  // namespace vesselgrow
