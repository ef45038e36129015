#include "relpick/simgraph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "parallel.hpp"
#include "relpick/error.hpp"

namespace relpick {
namespace {

constexpr double kWeightSlack = 1e-9;

static_assert(std::endian::native == std::endian::little, "graph cache I/O assumes a little-endian host");

template <class T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (in.size() - pos < sizeof(T)) fail_data("graph file truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

}  // namespace

void validate_tau(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) fail_config("tau must be in (0, 1], got " + std::to_string(tau));
}

// --- UnitRows ----------------------------------------------------------------

UnitRows::UnitRows(const EmbeddingMatrix& e) : rows_(e.rows()), cols_(e.cols()), data_(e.rows() * e.cols()) {
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto src = e.row(i);
    double sq = 0;
    for (float v : src) sq += double(v) * v;
    if (sq == 0) fail_data("row " + std::to_string(i) + " has zero norm");
    const double norm = std::sqrt(sq);
    for (std::size_t k = 0; k < cols_; ++k) data_[i * cols_ + k] = src[k] / norm;
  }
}

double UnitRows::cosine(std::size_t i, std::size_t j) const noexcept {
  if (i == j) return 1.0;
  const double* a = data_.data() + i * cols_;
  const double* b = data_.data() + j * cols_;
  double dot = 0;
  for (std::size_t k = 0; k < cols_; ++k) dot += a[k] * b[k];
  return std::clamp(dot, -1.0, 1.0);
}

void UnitRows::scan_row(std::size_t i, double tau, std::vector<Neighbor>& out) const {
  for (std::size_t j = 0; j < rows_; ++j) {
    const double w = cosine(i, j);
    if (w >= tau) out.push_back({static_cast<std::uint32_t>(j), w});
  }
}

// --- NeighborGraph -----------------------------------------------------------

NeighborGraph::NeighborGraph(std::size_t m, double tau, std::vector<std::size_t> offsets, std::vector<Neighbor> edges)
    : m_(m), tau_(tau), offsets_(std::move(offsets)), edges_(std::move(edges)) {
  validate_tau(tau_);
  if (m_ == 0) fail_data("graph must have at least one node");
  if (m_ > std::numeric_limits<std::uint32_t>::max()) fail_data("graph too large for 32-bit node ids");
  if (offsets_.size() != m_ + 1 || offsets_.front() != 0 || offsets_.back() != edges_.size()) {
    fail_data("graph offsets do not match edge count");
  }
  for (std::size_t i = 0; i < m_; ++i) {
    if (offsets_[i] > offsets_[i + 1]) fail_data("graph offsets not monotone at row " + std::to_string(i));
    bool self = false;
    const auto r = row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const auto& [j, w] = r[k];
      if (j >= m_) fail_data("edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
      if (k > 0 && r[k - 1].index >= j) fail_data("row " + std::to_string(i) + " is not strictly sorted");
      if (!(w >= tau_ - kWeightSlack && w <= 1.0 + kWeightSlack)) {
        fail_data("edge (" + std::to_string(i) + "," + std::to_string(j) + ") weight " + std::to_string(w) +
                  " outside [tau, 1]");
      }
      if (j == i) {
        self = true;
        continue;
      }
      const auto other = row(j);
      const auto it = std::lower_bound(other.begin(), other.end(), i,
                                       [](const Neighbor& n, std::size_t idx) { return n.index < idx; });
      if (it == other.end() || it->index != i || it->weight != w) {
        fail_data("graph is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
    if (!self) fail_data("row " + std::to_string(i) + " is missing its self-loop");
  }
}

// --- DenseNeighbors ----------------------------------------------------------

DenseNeighbors::DenseNeighbors(const EmbeddingMatrix& e, double tau) : rows_(e), tau_(tau) { validate_tau(tau); }

std::span<const Neighbor> DenseNeighbors::neighbors(std::size_t i, std::vector<Neighbor>& scratch) const {
  scratch.clear();
  rows_.scan_row(i, tau_, scratch);
  return scratch;
}

// --- construction ------------------------------------------------------------

NeighborGraph build_graph(const EmbeddingMatrix& e, double tau, unsigned threads) {
  validate_tau(tau);
  const UnitRows rows(e);
  const std::size_t m = rows.rows();
  std::vector<std::vector<Neighbor>> adjacency(m);
  detail::parallel_chunks(m, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) rows.scan_row(i, tau, adjacency[i]);
  });
  std::vector<std::size_t> offsets(m + 1, 0);
  for (std::size_t i = 0; i < m; ++i) offsets[i + 1] = offsets[i] + adjacency[i].size();
  std::vector<Neighbor> edges;
  edges.reserve(offsets.back());
  for (auto& adj : adjacency) {
    edges.insert(edges.end(), adj.begin(), adj.end());
    std::vector<Neighbor>().swap(adj);
  }
  return NeighborGraph(m, tau, std::move(offsets), std::move(edges));
}

DegreeStats degree_stats(const NeighborGraph& g) {
  DegreeStats s;
  s.min = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t deg = g.row(i).size() - 1;
    s.min = std::min(s.min, deg);
    s.max = std::max(s.max, deg);
    total += deg;
  }
  s.mean = static_cast<double>(total) / static_cast<double>(g.size());
  return s;
}

// --- persistence -------------------------------------------------------------

void save_graph(const std::filesystem::path& path, const NeighborGraph& g) {
  std::string out(kGraphMagic);
  out.reserve(out.size() + 24 + g.edge_count() * 16);
  put<std::uint64_t>(out, g.size());
  put<double>(out, g.tau());
  put<std::uint64_t>(out, g.edge_count());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const auto& [j, w] : g.row(i)) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(i));
      put<std::uint32_t>(out, j);
      put<double>(out, w);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail_data("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail_data("write failed: " + path.string());
}

NeighborGraph load_graph(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_data("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string in = std::move(ss).str();
  if (!in.starts_with(kGraphMagic)) fail_data("bad header: expected " + std::string(kGraphMagic) + " magic");
  std::size_t pos = kGraphMagic.size();
  const auto m = get<std::uint64_t>(in, pos);
  const auto tau = get<double>(in, pos);
  const auto count = get<std::uint64_t>(in, pos);
  if (m == 0 || m > std::numeric_limits<std::uint32_t>::max()) fail_data("bad node count in graph header");
  if ((in.size() - pos) != count * 16) fail_data("graph payload does not match edge count");
  std::vector<std::size_t> offsets(m + 1, 0);
  std::vector<Neighbor> edges(count);
  std::uint32_t prev = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto i = get<std::uint32_t>(in, pos);
    const auto j = get<std::uint32_t>(in, pos);
    const auto w = get<double>(in, pos);
    if (i >= m || i < prev) fail_data("graph edges out of row order at record " + std::to_string(k));
    prev = i;
    ++offsets[i + 1];
    edges[k] = {j, w};
  }
  for (std::size_t i = 0; i < m; ++i) offsets[i + 1] += offsets[i];
  return NeighborGraph(m, tau, std::move(offsets), std::move(edges));
}

}  // namespace relpick
