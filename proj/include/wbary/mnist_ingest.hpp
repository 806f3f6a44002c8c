#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wbary/transport_dual.hpp"

namespace wbary {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Row-major 8-bit images as stored in an IDX3 file.
struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;

  std::span<const std::uint8_t> image(std::size_t index) const;
  bool operator==(const IdxImages&) const = default;
};

struct IdxLabels {
  std::vector<std::uint8_t> labels;
  bool operator==(const IdxLabels&) const = default;
};

/// Big-endian header (magic, count, rows, cols) followed by the pixels.
/// Throws FormatError on a wrong magic, short payload or trailing bytes.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);

IdxLabels parse_idx_labels(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx_labels(const IdxLabels& labels);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Pixel centers ((c + 0.5) / cols, (r + 0.5) / rows) in row-major order.
SupportGrid pixel_grid(std::uint32_t rows, std::uint32_t cols);

struct PixelMeasure {
  Matrix atoms;  // 2 x K
  Vector weights;

  Measure to_measure() const { return Measure::empirical(atoms, weights); }
};

/// Intensities normalized to a probability vector on the pixel centers.
/// Zero pixels are dropped unless keep_zero_pixels is set. Throws
/// DegenerateInputError for an all-zero image.
PixelMeasure image_to_measure(const IdxImages& images, std::size_t index, bool keep_zero_pixels = false);

/// `count` distinct indices with the given label, chosen by a seeded shuffle.
/// Throws std::invalid_argument if fewer such images exist.
std::vector<std::size_t> select_digit(const IdxLabels& labels, int digit, int count, std::uint64_t seed);

}  // namespace wbary
