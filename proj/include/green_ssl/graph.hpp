#pragma once

// Sparse kNN similarity graphs, their Laplacians and connectivity.

#include "green_ssl/core.hpp"
#include "green_ssl/dataio.hpp"

#include <deque>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

namespace green_ssl {

/// Symmetric nonnegative affinity S with zero diagonal and degree d = S 1.
class SparseSimilarity {
 public:
  SparseSimilarity() = default;

  /// Builds from a list of undirected edges (i, j, w) with i != j; each
  /// edge is mirrored. Duplicate edges are an error.
  static SparseSimilarity from_edges(Index n, const std::vector<Triplet>& edges) {
    std::vector<Triplet> both;
    both.reserve(edges.size() * 2);
    for (const auto& e : edges) {
      if (e.row() == e.col()) throw DataError("similarity: self-edge at " + std::to_string(e.row()));
      if (e.row() < 0 || e.col() < 0 || e.row() >= n || e.col() >= n)
        throw DataError("similarity: edge index out of range");
      both.emplace_back(e.row(), e.col(), e.value());
      both.emplace_back(e.col(), e.row(), e.value());
    }
    SparseSimilarity s;
    s.weights_.resize(n, n);
    s.weights_.setFromTriplets(both.begin(), both.end(), [](double, double) -> double {
      throw DataError("similarity: duplicate edge");
    });
    s.weights_.makeCompressed();
    s.finish();
    return s;
  }

  static SparseSimilarity from_matrix(const Matrix& dense) {
    std::vector<Triplet> edges;
    for (Index j = 0; j < dense.cols(); ++j)
      for (Index i = 0; i < j; ++i)
        if (dense(i, j) != 0.0) edges.emplace_back(i, j, dense(i, j));
    return from_edges(dense.rows(), edges);
  }

  Index size() const { return weights_.rows(); }
  const SparseMatrix& weights() const { return weights_; }
  const Vector& degree() const { return degree_; }
  Index edge_count() const { return weights_.nonZeros() / 2; }

  /// Undirected edges (i < j), sorted by (i, j).
  std::vector<Triplet> edges() const {
    std::vector<Triplet> out;
    out.reserve(static_cast<std::size_t>(edge_count()));
    // Column j holds the rows i; walking columns in order and keeping i < j
    // gives a (j, i)-sorted list, re-sorted below.
    for (Index j = 0; j < weights_.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(weights_, j); it; ++it)
        if (it.row() < j) out.emplace_back(it.row(), j, it.value());
    std::sort(out.begin(), out.end(), [](const Triplet& a, const Triplet& b) {
      return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
    });
    return out;
  }

 private:
  void finish() {
    for (Index j = 0; j < weights_.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(weights_, j); it; ++it) {
        const double w = it.value();
        if (!std::isfinite(w) || w < 0.0 || w > 1.0)
          throw DataError("similarity: weight outside [0,1] at (" + std::to_string(it.row()) +
                          ", " + std::to_string(j) + ")");
      }
    degree_ = weights_ * Vector::Ones(size());
  }

  SparseMatrix weights_;
  Vector degree_;
};

/// Graph Laplacian L = D - S, optionally perturbed to
/// L* = L + n mu I - mu 1 1^T. The perturbation is held as the scalar mu and
/// applied on the fly; the rank-one term is never materialized as a matrix.
class Laplacian {
 public:
  explicit Laplacian(std::shared_ptr<const SparseSimilarity> sim, double mu = 0.0)
      : sim_(std::move(sim)), mu_(mu) {}

  Index size() const { return sim_->size(); }
  double mu() const { return mu_; }
  bool is_perturbed() const { return mu_ != 0.0; }
  const SparseSimilarity& similarity() const { return *sim_; }
  std::shared_ptr<const SparseSimilarity> similarity_ptr() const { return sim_; }

  /// L v computed as D v - S v (+ n mu v - mu 1 (1^T v) when perturbed).
  Matrix apply(const Matrix& v) const {
    Matrix out = sim_->degree().asDiagonal() * v;
    out.noalias() -= sim_->weights() * v;
    if (is_perturbed()) {
      const auto n = static_cast<double>(size());
      const Eigen::RowVectorXd column_sums = v.colwise().sum();
      out += (n * mu_) * v;
      out.rowwise() -= mu_ * column_sums;
    }
    return out;
  }

  /// D - S (+ n mu I) as a sparse matrix; excludes the rank-one term.
  SparseMatrix sparse_shifted() const {
    SparseMatrix l = -sim_->weights();
    const double shift = static_cast<double>(size()) * mu_;
    Vector diag = sim_->degree().array() + shift;
    SparseMatrix d(size(), size());
    d.reserve(Eigen::VectorXi::Constant(size(), 1));
    for (Index i = 0; i < size(); ++i) d.insert(i, i) = diag(i);
    l += d;
    l.makeCompressed();
    return l;
  }

  /// Full matrix including the perturbation; guarded by kMaxDenseSize.
  Matrix to_dense() const {
    guard_dense(size(), "Laplacian::to_dense");
    Matrix l = -Matrix(sim_->weights());
    l.diagonal() += sim_->degree();
    if (is_perturbed()) {
      l.diagonal().array() += static_cast<double>(size()) * mu_;
      l.array() -= mu_;
    }
    return l;
  }

 private:
  std::shared_ptr<const SparseSimilarity> sim_;
  double mu_ = 0.0;
};

inline Laplacian laplacian(std::shared_ptr<const SparseSimilarity> sim) {
  return Laplacian(std::move(sim), 0.0);
}

inline Laplacian laplacian(SparseSimilarity sim) {
  return laplacian(std::make_shared<const SparseSimilarity>(std::move(sim)));
}

inline constexpr double kDefaultMu = 1e-5;

/// Adds uniform similarity mu between every pair of samples. The result is
/// perturbed relative to the base graph; an existing perturbation is replaced.
inline Laplacian perturbed_laplacian(const Laplacian& lap, double mu = kDefaultMu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("perturbation mu must be > 0");
  return Laplacian(lap.similarity_ptr(), mu);
}

// ---------------------------------------------------------------------------
// kNN Gaussian graph
// ---------------------------------------------------------------------------

enum class BandwidthPopulation {
  all_pairs,  // every pair i < j
  knn_edges,  // distinct retained kNN edges
};

struct KnnGraphOptions {
  int k = 20;
  BandwidthPopulation bandwidth = BandwidthPopulation::all_pairs;
};

/// Indices of the k nearest samples of every sample by squared Euclidean
/// distance, excluding the sample itself. Ties go to the lower index.
inline std::vector<std::vector<Index>> knn_indices(const Matrix& x, int k) {
  const Index n = x.rows();
  if (k < 1 || k >= n)
    throw ConfigError("kNN: need 1 <= k < n (k = " + std::to_string(k) + ", n = " +
                      std::to_string(n) + ")");
  const Matrix columns = x.transpose();  // contiguous samples
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  parallel_for(n, [&](Index i) {
    std::vector<std::pair<double, Index>> dist;
    dist.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j)
      if (j != i) dist.emplace_back((columns.col(i) - columns.col(j)).squaredNorm(), j);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    auto& row = out[static_cast<std::size_t>(i)];
    row.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) row.push_back(dist[static_cast<std::size_t>(t)].second);
  });
  return out;
}

/// Undirected kNN edge set under the "j in knn(i) or i in knn(j)" rule,
/// as sorted (i < j) pairs with their squared distance.
inline std::vector<std::tuple<Index, Index, double>> knn_edge_list(const Matrix& x, int k) {
  const auto nbrs = knn_indices(x, k);
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j : nbrs[static_cast<std::size_t>(i)]) pairs.emplace_back(std::min(i, j), std::max(i, j));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<std::tuple<Index, Index, double>> out;
  out.reserve(pairs.size());
  for (auto [i, j] : pairs) out.emplace_back(i, j, (x.row(i) - x.row(j)).squaredNorm());
  return out;
}

/// Streaming population mean/variance of the nonzero values added.
struct NonzeroVariance {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    if (v == 0.0) return;
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }
  void merge(const NonzeroVariance& o) {
    if (o.count == 0) return;
    const auto total = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / total;
    mean += delta * static_cast<double>(o.count) / total;
    count += o.count;
  }
  double variance() const { return count ? m2 / static_cast<double>(count) : 0.0; }
};

/// The Gaussian width 2 sigma^2: population variance of the nonzero squared
/// distances divided by d. When that variance vanishes, the mean of the
/// nonzero values is used instead.
inline double bandwidth_from(const NonzeroVariance& acc, Index dim) {
  if (acc.count == 0) throw NumericError("degenerate bandwidth: all points identical");
  const double width = acc.variance() / static_cast<double>(dim);
  if (width > 0.0 && std::isfinite(width)) return width;
  return acc.mean;
}

inline double bandwidth_from_distances(const std::vector<double>& squared, Index dim) {
  NonzeroVariance acc;
  for (double v : squared) acc.add(v);
  return bandwidth_from(acc, dim);
}

/// Bandwidth over every pair i < j; rows are accumulated independently and
/// merged in row order so the result does not depend on the thread count.
inline double all_pairs_bandwidth(const Matrix& x) {
  const Index n = x.rows();
  const Matrix columns = x.transpose();
  std::vector<NonzeroVariance> rows(static_cast<std::size_t>(n));
  parallel_for(n, [&](Index i) {
    auto& acc = rows[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < n; ++j) acc.add((columns.col(i) - columns.col(j)).squaredNorm());
  });
  NonzeroVariance total;
  for (const auto& r : rows) total.merge(r);
  return bandwidth_from(total, x.cols());
}

/// S_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)) on the symmetrized kNN edges.
inline SparseSimilarity build_knn_gaussian(const Dataset& ds, const KnnGraphOptions& opts = {}) {
  const auto edges = knn_edge_list(ds.features, opts.k);
  double width = 0.0;
  if (opts.bandwidth == BandwidthPopulation::knn_edges) {
    std::vector<double> squared;
    squared.reserve(edges.size());
    for (const auto& e : edges) squared.push_back(std::get<2>(e));
    width = bandwidth_from_distances(squared, ds.dim());
  } else {
    width = all_pairs_bandwidth(ds.features);
  }
  std::vector<Triplet> weighted;
  weighted.reserve(edges.size());
  for (const auto& [i, j, d2] : edges) {
    const double w = std::exp(-d2 / width);
    if (w > 0.0) weighted.emplace_back(i, j, w);
  }
  return SparseSimilarity::from_edges(ds.size(), weighted);
}

// ---------------------------------------------------------------------------
// Connectivity
// ---------------------------------------------------------------------------

struct Components {
  int count = 0;
  std::vector<int> assignment;  // 1..count per sample
  std::vector<Index> sizes;     // sizes[id-1]
};

/// Connected components over edges with positive weight. Ids are ordered by
/// the smallest sample index they contain.
inline Components connected_components(const SparseSimilarity& sim) {
  const Index n = sim.size();
  const SparseMatrix& w = sim.weights();
  Components comp;
  comp.assignment.assign(static_cast<std::size_t>(n), 0);
  std::deque<Index> queue;
  for (Index start = 0; start < n; ++start) {
    if (comp.assignment[static_cast<std::size_t>(start)] != 0) continue;
    const int id = ++comp.count;
    Index members = 0;
    comp.assignment[static_cast<std::size_t>(start)] = id;
    queue.push_back(start);
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      ++members;
      for (SparseMatrix::InnerIterator it(w, v); it; ++it) {
        auto& slot = comp.assignment[static_cast<std::size_t>(it.row())];
        if (it.value() > 0.0 && slot == 0) {
          slot = id;
          queue.push_back(it.row());
        }
      }
    }
    comp.sizes.push_back(members);
  }
  return comp;
}

// ---------------------------------------------------------------------------
// Text format: first line "n <count>", then one "i j w" line per edge with
// 0-based i < j, sorted by (i, j), w printed with 17 significant digits.
// ---------------------------------------------------------------------------

inline void save_graph(const SparseSimilarity& sim, std::ostream& out) {
  out << "n " << sim.size() << '\n' << std::setprecision(17);
  for (const auto& e : sim.edges()) out << e.row() << ' ' << e.col() << ' ' << e.value() << '\n';
}

inline void save_graph(const SparseSimilarity& sim, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  save_graph(sim, out);
}

inline SparseSimilarity load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string tag;
  Index n = 0;
  if (!(in >> tag >> n) || tag != "n" || n < 1) throw DataError(path + ": missing 'n <count>' header");
  std::vector<Triplet> edges;
  Index i = 0;
  Index j = 0;
  double w = 0.0;
  while (in >> i >> j >> w) {
    if (!(i < j)) throw DataError(path + ": edge must satisfy i < j");
    edges.emplace_back(i, j, w);
  }
  if (!in.eof()) throw DataError(path + ": malformed edge line");
  return SparseSimilarity::from_edges(n, edges);
}

}  // namespace green_ssl
