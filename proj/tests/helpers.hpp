#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "relpick/dataspec.hpp"
#include "relpick/error.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("relpick-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline relpick::EmbeddingMatrix rows_of(std::vector<std::vector<float>> rows) {
  std::vector<float> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return relpick::EmbeddingMatrix(rows.size(), rows.front().size(), std::move(data));
}

/// m random unit vectors in d dimensions.
inline relpick::EmbeddingMatrix random_unit_rows(std::mt19937_64& rng, std::size_t m, std::size_t d) {
  std::normal_distribution<double> normal;
  std::vector<float> data(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    double sq = 0;
    std::vector<double> v(d);
    for (auto& x : v) {
      x = normal(rng);
      sq += x * x;
    }
    for (std::size_t k = 0; k < d; ++k) data[i * d + k] = static_cast<float>(v[k] / std::sqrt(sq));
  }
  return relpick::EmbeddingMatrix(m, d, std::move(data));
}

inline relpick::ConfidenceVector random_confidences(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::vector<float> c(m);
  for (auto& v : c) v = unit(rng);
  return relpick::ConfidenceVector(std::move(c));
}

template <class F>
relpick::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const relpick::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected relpick::Error");
}

}  // namespace testing
