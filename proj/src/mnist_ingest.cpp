#include "wbary/mnist_ingest.hpp"

#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "wbary/errors.hpp"

namespace wbary {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

void expect_magic(std::span<const std::uint8_t> bytes, std::size_t header, std::uint32_t magic,
                  const char* what) {
  if (bytes.size() < header)
    throw FormatError(std::string(what) + ": truncated header (" + std::to_string(bytes.size()) + " bytes)");
  const std::uint32_t found = read_be32(bytes, 0);
  if (found != magic)
    throw FormatError(std::string(what) + ": magic " + hex(found) + ", expected " + hex(magic));
}

void expect_payload(std::size_t have, std::uint64_t want, const char* what) {
  if (have < want)
    throw FormatError(std::string(what) + ": payload has " + std::to_string(have) + " bytes, header promises " +
                      std::to_string(want));
  if (have > want) throw FormatError(std::string(what) + ": " + std::to_string(have - want) + " trailing bytes");
}

}  // namespace

std::span<const std::uint8_t> IdxImages::image(std::size_t index) const {
  if (index >= count) throw std::out_of_range("IdxImages::image: index out of range");
  const std::size_t size = std::size_t{rows} * cols;
  return std::span<const std::uint8_t>(pixels).subspan(index * size, size);
}

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, 16, kIdxImagesMagic, "idx images");
  IdxImages out;
  out.count = read_be32(bytes, 4);
  out.rows = read_be32(bytes, 8);
  out.cols = read_be32(bytes, 12);
  const std::uint64_t want = std::uint64_t{out.count} * out.rows * out.cols;
  expect_payload(bytes.size() - 16, want, "idx images");
  out.pixels.assign(bytes.begin() + 16, bytes.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
  if (images.pixels.size() != std::size_t{images.count} * images.rows * images.cols)
    throw std::invalid_argument("serialize_idx_images: pixel count does not match the header");
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImagesMagic);
  write_be32(out, images.count);
  write_be32(out, images.rows);
  write_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, 8, kIdxLabelsMagic, "idx labels");
  const std::uint32_t count = read_be32(bytes, 4);
  expect_payload(bytes.size() - 8, count, "idx labels");
  return {std::vector<std::uint8_t>(bytes.begin() + 8, bytes.end())};
}

std::vector<std::uint8_t> serialize_idx_labels(const IdxLabels& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.labels.size());
  write_be32(out, kIdxLabelsMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.labels.size()));
  out.insert(out.end(), labels.labels.begin(), labels.labels.end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

SupportGrid pixel_grid(std::uint32_t rows, std::uint32_t cols) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("pixel_grid: empty image");
  Matrix pts(2, static_cast<Eigen::Index>(rows) * cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      const Eigen::Index idx = static_cast<Eigen::Index>(r) * cols + c;
      pts(0, idx) = (c + 0.5) / cols;
      pts(1, idx) = (r + 0.5) / rows;
    }
  return SupportGrid(std::move(pts));
}

PixelMeasure image_to_measure(const IdxImages& images, std::size_t index, bool keep_zero_pixels) {
  const auto px = images.image(index);
  const double total = std::accumulate(px.begin(), px.end(), 0.0);
  if (total <= 0.0)
    throw DegenerateInputError("image " + std::to_string(index) + " has no nonzero pixel");

  std::vector<std::size_t> kept;
  for (std::size_t p = 0; p < px.size(); ++p)
    if (keep_zero_pixels || px[p] != 0) kept.push_back(p);

  PixelMeasure out{Matrix(2, static_cast<Eigen::Index>(kept.size())),
                   Vector(static_cast<Eigen::Index>(kept.size()))};
  for (std::size_t a = 0; a < kept.size(); ++a) {
    const auto r = kept[a] / images.cols;
    const auto c = kept[a] % images.cols;
    const auto col = static_cast<Eigen::Index>(a);
    out.atoms(0, col) = (static_cast<double>(c) + 0.5) / images.cols;
    out.atoms(1, col) = (static_cast<double>(r) + 0.5) / images.rows;
    out.weights(col) = px[kept[a]] / total;
  }
  // Push the rounding residue onto the largest weight so the sum is 1 to machine precision.
  Eigen::Index top = 0;
  out.weights.maxCoeff(&top);
  out.weights(top) += 1.0 - out.weights.sum();
  return out;
}

std::vector<std::size_t> select_digit(const IdxLabels& labels, int digit, int count, std::uint64_t seed) {
  if (digit < 0 || digit > 255) throw std::invalid_argument("select_digit: digit out of range");
  if (count < 1) throw std::invalid_argument("select_digit: count must be >= 1");
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < labels.labels.size(); ++i)
    if (labels.labels[i] == digit) pool.push_back(i);
  if (pool.size() < static_cast<std::size_t>(count))
    throw std::invalid_argument("select_digit: only " + std::to_string(pool.size()) + " images of digit " +
                                std::to_string(digit) + ", need " + std::to_string(count));
  RngStream rng = RngStream::keyed(seed, StreamDomain::preset, static_cast<std::uint64_t>(digit), 1);
  for (std::size_t a = 0; a < static_cast<std::size_t>(count); ++a) {
    const std::size_t b = a + static_cast<std::size_t>(rng.below(pool.size() - a));
    std::swap(pool[a], pool[b]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace wbary
