#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace relpick {

/// Dense m x d matrix of example embeddings, row-major 32-bit floats.
///
/// Immutable once constructed. When `normalized()` is true every row has unit
/// L2 norm (within 1e-6).
class EmbeddingMatrix {
 public:
  /// Validates shape and finiteness; with `normalized` set, also checks that
  /// each row already has unit norm.
  EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> data, bool normalized = false);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool normalized() const noexcept { return normalized_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  /// Copy with every row scaled to unit L2 norm. Zero rows are a data error.
  EmbeddingMatrix normalized_copy() const;

  /// Mean of each run of `k` consecutive rows, L2-normalized.
  EmbeddingMatrix average_groups(std::size_t k) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<float> data_;
  bool normalized_;
};

/// Per-example prediction confidence in [0, 1].
class ConfidenceVector {
 public:
  /// Values below 0 or above 1 by at most 1e-6 are clamped; anything further
  /// out, or non-finite, is a data error.
  explicit ConfidenceVector(std::vector<float> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const float> values() const noexcept { return values_; }

 private:
  std::vector<float> values_;
};

/// Row-stochastic m x c matrix of softmax outputs.
class ProbabilityMatrix {
 public:
  ProbabilityMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<float> data_;
};

/// Noisy class labels, each in [0, class_count).
class LabelVector {
 public:
  LabelVector(std::vector<std::uint32_t> values, std::uint32_t class_count);

  std::size_t size() const noexcept { return values_.size(); }
  std::uint32_t class_count() const noexcept { return class_count_; }
  std::uint32_t operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const std::uint32_t> values() const noexcept { return values_; }

 private:
  std::vector<std::uint32_t> values_;
  std::uint32_t class_count_;
};

/// Ground-truth noise indicators, used only for diagnostics.
using NoiseFlagVector = std::vector<std::uint8_t>;

enum class MatrixFormat { binary, csv };
enum class ConfidenceMetric { maxprob, diffprob };

/// Magic prefix of the binary matrix format: magic, u64 rows, u64 cols, then
/// rows*cols little-endian float32 values.
inline constexpr std::string_view kMatrixMagic = "RELPICK1";

EmbeddingMatrix read_embeddings(const std::filesystem::path& path, MatrixFormat format,
                                std::optional<std::size_t> average_groups = std::nullopt);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& e);
void write_embeddings_csv(const std::filesystem::path& path, const EmbeddingMatrix& e);

/// Reads either the binary matrix format (single column) or text with one
/// value per line; the format is detected from the magic.
ConfidenceVector read_confidences(const std::filesystem::path& path);
void write_confidences(const std::filesystem::path& path, const ConfidenceVector& c);

ProbabilityMatrix read_probabilities(const std::filesystem::path& path);

/// One label per line. With `class_count` unset, c = max label + 1.
LabelVector read_labels(const std::filesystem::path& path, std::optional<std::uint32_t> class_count = std::nullopt);

/// One flag per line: 0/1 or false/true.
NoiseFlagVector read_noise_flags(const std::filesystem::path& path);

ConfidenceVector confidence_from_probs(const ProbabilityMatrix& p, ConfidenceMetric metric);

// Parsers over in-memory text, shared by the file readers.
EmbeddingMatrix parse_embeddings_csv(std::string_view text);
EmbeddingMatrix parse_embeddings_binary(std::span<const std::byte> bytes);

}  // namespace relpick
