#include "relpick/dataspec.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "relpick/error.hpp"

namespace relpick {
namespace {

constexpr double kNormTolerance = 1e-6;
constexpr double kClampTolerance = 1e-6;
constexpr double kRowSumTolerance = 1e-5;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_data("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail_data("write failed: " + path.string());
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits on '\n', dropping blank lines. Line numbers are kept for messages.
std::vector<std::pair<std::size_t, std::string_view>> text_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    if (!line.empty()) out.emplace_back(lineno, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

float parse_float(std::string_view tok, std::size_t lineno) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  float v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail_data("line " + std::to_string(lineno) + ": not a number: '" + std::string(tok) + "'");
  }
  return v;
}

// Parses comma-separated rows into a flat buffer; all rows must agree on width.
std::vector<float> parse_csv_matrix(std::string_view text, std::size_t& rows, std::size_t& cols) {
  std::vector<float> data;
  rows = 0;
  cols = 0;
  for (const auto& [lineno, line] : text_lines(text)) {
    std::size_t width = 0;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      data.push_back(parse_float(rest.substr(0, comma), lineno));
      ++width;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = width;
    } else if (width != cols) {
      fail_data("line " + std::to_string(lineno) + ": expected " + std::to_string(cols) + " columns, got " +
                std::to_string(width));
    }
    ++rows;
  }
  if (rows == 0) fail_data("empty matrix");
  return data;
}

std::uint64_t load_u64_le(const std::byte* p) {
  std::uint64_t v;
  std::memcpy(&v, p, sizeof v);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  return v;
}

void store_u64_le(std::string& out, std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap64(v);
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

std::vector<float> decode_matrix(std::span<const std::byte> bytes, std::size_t& rows, std::size_t& cols) {
  constexpr std::size_t header = kMatrixMagic.size() + 16;
  if (bytes.size() < header ||
      std::memcmp(bytes.data(), kMatrixMagic.data(), kMatrixMagic.size()) != 0) {
    fail_data("bad header: expected " + std::string(kMatrixMagic) + " magic");
  }
  const auto m = load_u64_le(bytes.data() + kMatrixMagic.size());
  const auto d = load_u64_le(bytes.data() + kMatrixMagic.size() + 8);
  const auto payload = bytes.size() - header;
  if (m == 0 || d == 0 || d > payload / sizeof(float) / m || payload != m * d * sizeof(float)) {
    fail_data("shape mismatch: header says " + std::to_string(m) + "x" + std::to_string(d) + " but payload holds " +
              std::to_string(payload / sizeof(float)) + " floats");
  }
  rows = m;
  cols = d;
  std::vector<float> data(m * d);
  std::memcpy(data.data(), bytes.data() + header, payload);
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& f : data) f = std::bit_cast<float>(__builtin_bswap32(std::bit_cast<std::uint32_t>(f)));
  }
  return data;
}

std::string encode_matrix(std::size_t rows, std::size_t cols, std::span<const float> data) {
  std::string out(kMatrixMagic);
  store_u64_le(out, rows);
  store_u64_le(out, cols);
  for (float f : data) {
    auto bits = std::bit_cast<std::uint32_t>(f);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    out.append(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  return out;
}

std::span<const std::byte> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::byte*>(s.data()), s.size()};
}

bool has_magic(const std::string& s) { return s.starts_with(kMatrixMagic); }

}  // namespace

// --- EmbeddingMatrix ---------------------------------------------------------

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> data, bool normalized)
    : rows_(rows), cols_(cols), data_(std::move(data)), normalized_(normalized) {
  if (rows_ == 0 || cols_ == 0) fail_data("embedding matrix must be at least 1x1");
  if (data_.size() != rows_ * cols_) {
    fail_data("embedding data has " + std::to_string(data_.size()) + " values, expected " +
              std::to_string(rows_ * cols_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) fail_data("non-finite embedding value in row " + std::to_string(i / cols_));
  }
  if (normalized_) {
    for (std::size_t i = 0; i < rows_; ++i) {
      double sq = 0;
      for (float v : row(i)) sq += double(v) * v;
      if (std::abs(std::sqrt(sq) - 1.0) > kNormTolerance) {
        fail_data("row " + std::to_string(i) + " is flagged normalized but has norm " + std::to_string(std::sqrt(sq)));
      }
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::normalized_copy() const {
  std::vector<float> out(data_.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    double sq = 0;
    for (float v : row(i)) sq += double(v) * v;
    if (sq == 0) fail_data("row " + std::to_string(i) + " has zero norm");
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t k = 0; k < cols_; ++k) out[i * cols_ + k] = static_cast<float>(data_[i * cols_ + k] * inv);
  }
  return EmbeddingMatrix(rows_, cols_, std::move(out), true);
}

EmbeddingMatrix EmbeddingMatrix::average_groups(std::size_t k) const {
  if (k == 0) fail_config("group size must be positive");
  if (rows_ % k != 0) {
    fail_data("row count " + std::to_string(rows_) + " is not divisible by group size " + std::to_string(k));
  }
  const std::size_t groups = rows_ / k;
  std::vector<float> out(groups * cols_);
  std::vector<double> acc(cols_);
  for (std::size_t g = 0; g < groups; ++g) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t r = g * k; r < (g + 1) * k; ++r) {
      const auto src = row(r);
      for (std::size_t c = 0; c < cols_; ++c) acc[c] += src[c];
    }
    double sq = 0;
    for (double& a : acc) {
      a /= static_cast<double>(k);
      sq += a * a;
    }
    if (sq == 0) fail_data("group " + std::to_string(g) + " averages to a zero row");
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t c = 0; c < cols_; ++c) out[g * cols_ + c] = static_cast<float>(acc[c] * inv);
  }
  return EmbeddingMatrix(groups, cols_, std::move(out), true);
}

// --- ConfidenceVector --------------------------------------------------------

ConfidenceVector::ConfidenceVector(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) fail_data("confidence vector is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    float& v = values_[i];
    if (!std::isfinite(v)) fail_data("non-finite confidence at index " + std::to_string(i));
    if (v < 0.0f) {
      if (v < -kClampTolerance) fail_data("confidence " + std::to_string(v) + " at index " + std::to_string(i) + " below 0");
      v = 0.0f;
    } else if (v > 1.0f) {
      if (v > 1.0 + kClampTolerance) fail_data("confidence " + std::to_string(v) + " at index " + std::to_string(i) + " above 1");
      v = 1.0f;
    }
  }
}

// --- ProbabilityMatrix -------------------------------------------------------

ProbabilityMatrix::ProbabilityMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ == 0 || cols_ == 0) fail_data("probability matrix must be at least 1x1");
  if (data_.size() != rows_ * cols_) fail_data("probability matrix shape mismatch");
  for (std::size_t i = 0; i < rows_; ++i) {
    double sum = 0;
    for (float p : row(i)) {
      if (!std::isfinite(p) || p < 0.0f || p > 1.0f) fail_data("probability out of [0,1] in row " + std::to_string(i));
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      fail_data("probability row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
}

// --- LabelVector -------------------------------------------------------------

LabelVector::LabelVector(std::vector<std::uint32_t> values, std::uint32_t class_count)
    : values_(std::move(values)), class_count_(class_count) {
  if (class_count_ == 0) fail_data("class count must be at least 1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] >= class_count_) {
      fail_data("label " + std::to_string(values_[i]) + " at index " + std::to_string(i) + " is not below class count " +
                std::to_string(class_count_));
    }
  }
}

// --- I/O ---------------------------------------------------------------------

EmbeddingMatrix parse_embeddings_csv(std::string_view text) {
  std::size_t rows, cols;
  auto data = parse_csv_matrix(text, rows, cols);
  return EmbeddingMatrix(rows, cols, std::move(data));
}

EmbeddingMatrix parse_embeddings_binary(std::span<const std::byte> bytes) {
  std::size_t rows, cols;
  auto data = decode_matrix(bytes, rows, cols);
  return EmbeddingMatrix(rows, cols, std::move(data));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path, MatrixFormat format,
                                std::optional<std::size_t> average_groups) {
  const auto text = read_file(path);
  auto e = format == MatrixFormat::binary ? parse_embeddings_binary(as_bytes(text)) : parse_embeddings_csv(text);
  if (average_groups) return e.average_groups(*average_groups);
  return e;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& e) {
  write_file(path, encode_matrix(e.rows(), e.cols(), e.data()));
}

void write_embeddings_csv(const std::filesystem::path& path, const EmbeddingMatrix& e) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < e.rows(); ++i) {
    const auto r = e.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) out += ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r[k]);
      out.append(buf, ptr);
    }
    out += '\n';
  }
  write_file(path, out);
}

ConfidenceVector read_confidences(const std::filesystem::path& path) {
  const auto text = read_file(path);
  if (has_magic(text)) {
    std::size_t rows, cols;
    auto data = decode_matrix(as_bytes(text), rows, cols);
    if (cols != 1) fail_data("confidence matrix must have one column, got " + std::to_string(cols));
    return ConfidenceVector(std::move(data));
  }
  std::vector<float> values;
  for (const auto& [lineno, line] : text_lines(text)) values.push_back(parse_float(line, lineno));
  return ConfidenceVector(std::move(values));
}

void write_confidences(const std::filesystem::path& path, const ConfidenceVector& c) {
  write_file(path, encode_matrix(c.size(), 1, c.values()));
}

ProbabilityMatrix read_probabilities(const std::filesystem::path& path) {
  const auto text = read_file(path);
  std::size_t rows, cols;
  std::vector<float> data = has_magic(text) ? decode_matrix(as_bytes(text), rows, cols)
                                            : parse_csv_matrix(text, rows, cols);
  return ProbabilityMatrix(rows, cols, std::move(data));
}

LabelVector read_labels(const std::filesystem::path& path, std::optional<std::uint32_t> class_count) {
  const auto text = read_file(path);
  std::vector<std::uint32_t> values;
  std::uint32_t max_label = 0;
  for (const auto& [lineno, line] : text_lines(text)) {
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      fail_data("line " + std::to_string(lineno) + ": not a class id: '" + std::string(line) + "'");
    }
    values.push_back(v);
    max_label = std::max(max_label, v);
  }
  if (values.empty()) fail_data("label file is empty: " + path.string());
  return LabelVector(std::move(values), class_count.value_or(max_label + 1));
}

NoiseFlagVector read_noise_flags(const std::filesystem::path& path) {
  const auto text = read_file(path);
  NoiseFlagVector flags;
  for (const auto& [lineno, line] : text_lines(text)) {
    if (line == "1" || line == "true") {
      flags.push_back(1);
    } else if (line == "0" || line == "false") {
      flags.push_back(0);
    } else {
      fail_data("line " + std::to_string(lineno) + ": not a flag: '" + std::string(line) + "'");
    }
  }
  return flags;
}

ConfidenceVector confidence_from_probs(const ProbabilityMatrix& p, ConfidenceMetric metric) {
  if (metric == ConfidenceMetric::diffprob && p.cols() < 2) fail_config("diffprob needs at least two classes");
  std::vector<float> out(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    float top = -1.0f, second = -1.0f;
    for (float v : p.row(i)) {
      if (v > top) {
        second = top;
        top = v;
      } else if (v > second) {
        second = v;
      }
    }
    out[i] = metric == ConfidenceMetric::maxprob ? top : top - second;
  }
  return ConfidenceVector(std::move(out));
}

}  // namespace relpick
