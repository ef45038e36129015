#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "relpick/dataspec.hpp"

namespace relpick {

struct Neighbor {
  std::uint32_t index;
  double weight;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Read-only view of the thresholded cosine neighborhood of every example.
///
/// `neighbors(i)` lists (j, cos(e_i, e_j)) for every j with cos >= tau, in
/// increasing j, including the self-loop (i, 1.0). Implementations may fill
/// and return `scratch` instead of stored data.
class NeighborSource {
 public:
  virtual ~NeighborSource() = default;
  virtual std::size_t size() const noexcept = 0;
  virtual double tau() const noexcept = 0;
  virtual std::span<const Neighbor> neighbors(std::size_t i, std::vector<Neighbor>& scratch) const = 0;
};

/// Unit-normalized copy of an embedding matrix held in double precision.
/// Every cosine in the library goes through `cosine()` so that the stored
/// graph and the on-the-fly path produce bit-identical weights.
class UnitRows {
 public:
  explicit UnitRows(const EmbeddingMatrix& e);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  /// Exactly 1 for i == j, otherwise the dot product clamped to [-1, 1].
  double cosine(std::size_t i, std::size_t j) const noexcept;

  /// Appends the thresholded neighbor list of row i to `out`.
  void scan_row(std::size_t i, double tau, std::vector<Neighbor>& out) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Materialized, symmetric neighbor graph in compressed-row form.
class NeighborGraph final : public NeighborSource {
 public:
  /// `offsets` has m+1 entries into `edges`. Validates ordering, weight range,
  /// self-loops, and symmetry.
  NeighborGraph(std::size_t m, double tau, std::vector<std::size_t> offsets, std::vector<Neighbor> edges);

  std::size_t size() const noexcept override { return m_; }
  double tau() const noexcept override { return tau_; }
  std::span<const Neighbor> neighbors(std::size_t i, std::vector<Neighbor>&) const override { return row(i); }

  std::span<const Neighbor> row(std::size_t i) const noexcept {
    return {edges_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  friend bool operator==(const NeighborGraph& a, const NeighborGraph& b) {
    return a.m_ == b.m_ && a.tau_ == b.tau_ && a.offsets_ == b.offsets_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t m_;
  double tau_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> edges_;
};

/// Computes each neighbor row on demand from the embeddings: O(m d) per
/// query, no O(m^2) storage.
class DenseNeighbors final : public NeighborSource {
 public:
  DenseNeighbors(const EmbeddingMatrix& e, double tau);

  std::size_t size() const noexcept override { return rows_.rows(); }
  double tau() const noexcept override { return tau_; }
  std::span<const Neighbor> neighbors(std::size_t i, std::vector<Neighbor>& scratch) const override;

 private:
  UnitRows rows_;
  double tau_;
};

void validate_tau(double tau);

/// Exact O(m^2 d) construction. Rows are split across `threads` workers and
/// merged in index order, so the result does not depend on the worker count.
NeighborGraph build_graph(const EmbeddingMatrix& e, double tau, unsigned threads = 1);

struct DegreeStats {
  std::size_t min = 0;
  double mean = 0;
  std::size_t max = 0;
};

/// Neighbor counts excluding the self-loop.
DegreeStats degree_stats(const NeighborGraph& g);

/// Binary edge list: magic, u64 m, f64 tau, u64 edge count, then one
/// (u32 i, u32 j, f64 w) record per directed edge in row order.
inline constexpr std::string_view kGraphMagic = "RELGRPH1";

void save_graph(const std::filesystem::path& path, const NeighborGraph& g);
NeighborGraph load_graph(const std::filesystem::path& path);

}  // namespace relpick
