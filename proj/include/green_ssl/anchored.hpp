#pragma once

// Anchored graphs: balanced hierarchical 2-means anchors, the parameter-free
// sample-to-anchor affinity Z, the factor B = Z Lambda^{-1/2} (so that
// S = B B^T has unit degrees) and the low-rank solve of the perturbed
// Green-function system in O(n m^2).

#include "green_ssl/core.hpp"
#include "green_ssl/dataio.hpp"
#include "green_ssl/dense_solvers.hpp"
#include "green_ssl/labels.hpp"

#include <Eigen/LU>

#include <bit>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace green_ssl {

/// m anchor points, one per row, in feature space.
struct AnchorSet {
  Matrix points;

  Index size() const { return points.rows(); }
};

// ---------------------------------------------------------------------------
// BKHK
// ---------------------------------------------------------------------------

struct BkhkOptions {
  std::uint64_t seed = 0;
  int max_iterations = 100;
};

struct BkhkResult {
  AnchorSet anchors;
  std::vector<int> leaf;  // anchor row owning each sample
  /// Child sizes of every internal node, root first (breadth-first order).
  std::vector<std::pair<Index, Index>> splits;
};

namespace detail {

/// One balanced 2-means split. Returns the two halves; the first holds
/// ceil(s/2) samples, ranked by ||x - c1||^2 - ||x - c2||^2.
inline std::pair<std::vector<Index>, std::vector<Index>> balanced_two_means(
    const Matrix& columns, const std::vector<Index>& members, Rng& rng, int max_iterations) {
  const auto s = static_cast<Index>(members.size());
  const Index first_size = (s + 1) / 2;
  const auto a = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(s)));
  auto b = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(s - 1)));
  if (b >= a) ++b;
  Vector c1 = columns.col(members[static_cast<std::size_t>(a)]);
  Vector c2 = columns.col(members[static_cast<std::size_t>(b)]);

  std::vector<char> in_first(members.size(), 0);
  std::vector<char> previous;
  std::vector<std::pair<double, Index>> score(members.size());
  for (int iter = 0; iter < max_iterations; ++iter) {
    for (Index p = 0; p < s; ++p) {
      const auto x = columns.col(members[static_cast<std::size_t>(p)]);
      score[static_cast<std::size_t>(p)] = {(x - c1).squaredNorm() - (x - c2).squaredNorm(), p};
    }
    std::nth_element(score.begin(), score.begin() + first_size, score.end());
    std::fill(in_first.begin(), in_first.end(), 0);
    for (Index r = 0; r < first_size; ++r) in_first[static_cast<std::size_t>(score[static_cast<std::size_t>(r)].second)] = 1;
    if (in_first == previous) break;
    previous = in_first;
    c1.setZero();
    c2.setZero();
    for (Index p = 0; p < s; ++p) {
      const auto x = columns.col(members[static_cast<std::size_t>(p)]);
      if (in_first[static_cast<std::size_t>(p)]) c1 += x; else c2 += x;
    }
    c1 /= static_cast<double>(first_size);
    c2 /= static_cast<double>(s - first_size);
  }
  std::pair<std::vector<Index>, std::vector<Index>> halves;
  for (Index p = 0; p < s; ++p)
    (in_first[static_cast<std::size_t>(p)] ? halves.first : halves.second)
        .push_back(members[static_cast<std::size_t>(p)]);
  return halves;
}

}  // namespace detail

/// Recursive balanced 2-means until m = 2^t leaves; anchors are the leaf
/// centroids. Node i of the implicit binary tree (root 1) draws its initial
/// centers from a generator seeded by (seed, i).
inline BkhkResult bkhk_tree(const Matrix& x, Index m, const BkhkOptions& opts = {}) {
  const Index n = x.rows();
  if (m < 2 || !std::has_single_bit(static_cast<std::uint64_t>(m))) {
    const auto below = std::bit_floor(static_cast<std::uint64_t>(std::max<Index>(m, 2)));
    throw ConfigError("anchor count " + std::to_string(m) + " is not a power of two (try " +
                      std::to_string(below) + " or " + std::to_string(below * 2) + ")");
  }
  if (m > n)
    throw ConfigError("anchor count " + std::to_string(m) + " exceeds sample count " + std::to_string(n));
  const int depth = std::countr_zero(static_cast<std::uint64_t>(m));

  const Matrix columns = x.transpose();
  BkhkResult result;
  result.anchors.points.resize(m, x.cols());
  result.leaf.assign(static_cast<std::size_t>(n), -1);

  std::vector<std::vector<Index>> level(1);
  level[0].resize(static_cast<std::size_t>(n));
  std::iota(level[0].begin(), level[0].end(), Index{0});
  for (int d = 0; d < depth; ++d) {
    std::vector<std::vector<Index>> next;
    next.reserve(level.size() * 2);
    for (std::size_t node = 0; node < level.size(); ++node) {
      const std::uint64_t node_id = (std::uint64_t{1} << d) + node;
      Rng rng(mix_seed(opts.seed, node_id));
      auto [left, right] = detail::balanced_two_means(columns, level[node], rng, opts.max_iterations);
      result.splits.emplace_back(static_cast<Index>(left.size()), static_cast<Index>(right.size()));
      next.push_back(std::move(left));
      next.push_back(std::move(right));
    }
    level = std::move(next);
  }
  for (std::size_t a = 0; a < level.size(); ++a) {
    Vector centroid = Vector::Zero(x.cols());
    for (Index i : level[a]) {
      centroid += columns.col(i);
      result.leaf[static_cast<std::size_t>(i)] = static_cast<int>(a);
    }
    result.anchors.points.row(static_cast<Index>(a)) = centroid / static_cast<double>(level[a].size());
  }
  return result;
}

inline AnchorSet bkhk(const Dataset& ds, Index m, const BkhkOptions& opts = {}) {
  return bkhk_tree(ds.features, m, opts).anchors;
}

/// Debugging alternative: m distinct samples drawn uniformly.
inline AnchorSet random_anchors(const Dataset& ds, Index m, std::uint64_t seed) {
  const Index n = ds.size();
  if (m < 1 || m > n)
    throw ConfigError("anchor count " + std::to_string(m) + " must be in [1, " + std::to_string(n) + "]");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  AnchorSet out;
  out.points.resize(m, ds.dim());
  for (Index a = 0; a < m; ++a) {
    const auto pick = a + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n - a)));
    std::swap(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(pick)]);
    out.points.row(a) = ds.features.row(order[static_cast<std::size_t>(a)]);
  }
  return out;
}

/// One anchor per line, coordinates comma-separated.
inline void save_anchors(const AnchorSet& anchors, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write anchors to '" + path + "'");
  out.precision(17);
  for (Index a = 0; a < anchors.size(); ++a) {
    for (Index j = 0; j < anchors.points.cols(); ++j) out << (j ? "," : "") << anchors.points(a, j);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Sample-to-anchor affinity
// ---------------------------------------------------------------------------

/// Row-stochastic n x m affinity with at most k nonzeros per row.
struct AnchorAffinity {
  RowSparseMatrix z;
  int k = 0;
};

/// Closed-form row weights from sorted squared distances e_(1) <= ... :
/// z_l = (e_(k+1) - e_l) / (k e_(k+1) - sum_{j<=k} e_(j)) for the k nearest.
/// A non-positive denominator (the k+1 nearest are equidistant) yields the
/// uniform 1/k limit.
inline std::vector<std::pair<Index, double>> anchor_row_weights(const Vector& squared, int k) {
  const Index m = squared.size();
  if (k < 1 || k >= m)
    throw ConfigError("anchor affinity: need 1 <= k < m (k = " + std::to_string(k) +
                      ", m = " + std::to_string(m) + ")");
  std::vector<std::pair<double, Index>> order(static_cast<std::size_t>(m));
  for (Index l = 0; l < m; ++l) order[static_cast<std::size_t>(l)] = {squared(l), l};
  std::partial_sort(order.begin(), order.begin() + k + 1, order.end());
  const double kth1 = order[static_cast<std::size_t>(k)].first;
  double nearest_sum = 0.0;
  for (int j = 0; j < k; ++j) nearest_sum += order[static_cast<std::size_t>(j)].first;
  const double denom = static_cast<double>(k) * kth1 - nearest_sum;

  std::vector<std::pair<Index, double>> row;
  row.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const auto [e, l] = order[static_cast<std::size_t>(j)];
    if (!(denom > 0.0)) {
      row.emplace_back(l, 1.0 / k);
    } else if (e < kth1) {
      row.emplace_back(l, (kth1 - e) / denom);
    }
  }
  std::sort(row.begin(), row.end());
  return row;
}

inline constexpr int kDefaultAnchorNeighbors = 20;

inline AnchorAffinity anchor_affinity(const Matrix& x, const AnchorSet& anchors,
                                      int k = kDefaultAnchorNeighbors) {
  const Index n = x.rows();
  const Index m = anchors.size();
  require(anchors.points.cols() == x.cols(), "anchor affinity: anchor dimension mismatch");
  require(anchors.points.allFinite(), "anchor affinity: non-finite anchor");
  if (k < 1 || k >= m)
    throw ConfigError("anchor affinity: need 1 <= k < m (k = " + std::to_string(k) +
                      ", m = " + std::to_string(m) + ")");
  const Matrix columns = x.transpose();
  const Matrix anchor_columns = anchors.points.transpose();
  std::vector<std::vector<std::pair<Index, double>>> rows(static_cast<std::size_t>(n));
  parallel_for(n, [&](Index i) {
    Vector e(m);
    for (Index l = 0; l < m; ++l) e(l) = (columns.col(i) - anchor_columns.col(l)).squaredNorm();
    rows[static_cast<std::size_t>(i)] = anchor_row_weights(e, k);
  });
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i)
    for (const auto& [l, w] : rows[static_cast<std::size_t>(i)]) entries.emplace_back(i, l, w);
  AnchorAffinity aff;
  aff.k = k;
  aff.z.resize(n, m);
  aff.z.setFromTriplets(entries.begin(), entries.end());
  aff.z.makeCompressed();
  return aff;
}

inline AnchorAffinity anchor_affinity(const Dataset& ds, const AnchorSet& anchors,
                                      int k = kDefaultAnchorNeighbors) {
  return anchor_affinity(ds.features, anchors, k);
}

// ---------------------------------------------------------------------------
// Anchor graph and solver
// ---------------------------------------------------------------------------

/// B = Z Lambda^{-1/2} with Lambda = Diag(Z^T 1); S = B B^T has unit degree.
struct AnchorGraph {
  RowSparseMatrix b;
  double mu = kDefaultMu;
  double theta = 1.0;  // 1 + n mu

  Index samples() const { return b.rows(); }
  Index anchors() const { return b.cols(); }
};

inline AnchorGraph build_anchor_graph(const AnchorAffinity& aff, double mu = kDefaultMu) {
  require(mu > 0.0 && std::isfinite(mu), "anchor graph: mu must be > 0");
  const Index n = aff.z.rows();
  const Index m = aff.z.cols();
  Vector lambda = Vector::Zero(m);
  for (Index i = 0; i < n; ++i)
    for (RowSparseMatrix::InnerIterator it(aff.z, i); it; ++it) lambda(it.col()) += it.value();
  std::string orphans;
  for (Index l = 0; l < m; ++l)
    if (!(lambda(l) > 0.0)) orphans += (orphans.empty() ? "" : ", ") + std::to_string(l);
  if (!orphans.empty())
    throw DataError("anchor graph: anchors claimed by no sample: " + orphans +
                    " (re-run anchor selection or drop these anchors)");
  AnchorGraph g;
  g.b = aff.z * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
  g.b.makeCompressed();
  g.mu = mu;
  g.theta = 1.0 + static_cast<double>(n) * mu;
  return g;
}

/// F = Y - [B 1] M^{-1} [B^T; 1^T] Y with
/// M = [[B^T B - theta I, B^T 1], [1^T B, n]].
/// This is theta times the solution of (theta I - B B^T + eta 1 1^T) F = Y
/// in the limit eta -> infinity; the positive factor does not change the
/// argmax. Only n x m and (m+1) x (m+1) intermediates are formed.
inline SolverReport gf_anchored(const AnchorGraph& g, const LabelMatrix& y) {
  const Index n = g.samples();
  const Index m = g.anchors();
  require(y.rows() == n, "gfa: label matrix rows do not match sample count");
  Stopwatch clock;

  const Matrix b = Matrix(g.b);
  Matrix inner(m + 1, m + 1);
  inner.topLeftCorner(m, m).noalias() = b.transpose() * b;
  inner.topLeftCorner(m, m).diagonal().array() -= g.theta;
  const Vector b_sums = b.colwise().sum().transpose();
  inner.topRightCorner(m, 1) = b_sums;
  inner.bottomLeftCorner(1, m) = b_sums.transpose();
  inner(m, m) = static_cast<double>(n);

  Matrix projected(m + 1, y.classes());
  projected.topRows(m).noalias() = b.transpose() * y.values;
  projected.bottomRows(1) = y.values.colwise().sum();

  const Eigen::PartialPivLU<Matrix> lu(inner);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14))
    throw NumericError("gfa: inner (m+1)x(m+1) system is singular (reciprocal condition " +
                       std::to_string(rcond) + ")");
  const Matrix x = lu.solve(projected);

  SolverReport report;
  report.soft_labels = y.values;
  report.soft_labels.noalias() -= b * x.topRows(m);
  report.soft_labels.rowwise() -= x.row(m);
  if (!report.soft_labels.allFinite()) throw NumericError("gfa: non-finite soft labels");
  report.method = Method::gfa;
  report.params = {1.0, g.mu, std::numeric_limits<double>::infinity()};
  report.seconds = clock.seconds();
  return report;
}

}  // namespace green_ssl
