#pragma once

// Solvers on explicit kNN graphs: the Green-function method through the
// Laplacian pseudo-inverse, its perturbed form solved by Gaussian
// elimination, LLGC, the harmonic function method and a 1-NN baseline.

#include "green_ssl/core.hpp"
#include "green_ssl/dataio.hpp"
#include "green_ssl/graph.hpp"
#include "green_ssl/labels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include <string>
#include <vector>

namespace green_ssl {

enum class Method {
  gf,    // pseudo-inverse of L
  gfg,   // perturbed system by Gaussian elimination
  llgc,  // local and global consistency
  hf,    // harmonic function
  nn1,   // nearest labeled sample
  gfa,   // anchored graph
};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::gf: return "gf";
    case Method::gfg: return "gfg";
    case Method::llgc: return "llgc";
    case Method::hf: return "hf";
    case Method::nn1: return "1nn";
    case Method::gfa: return "gfa";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::gf, Method::gfg, Method::llgc, Method::hf, Method::nn1, Method::gfa})
    if (s == to_string(m)) return m;
  throw ConfigError("unknown method '" + s + "' (expected gf, gfg, llgc, hf, 1nn or gfa)");
}

inline constexpr double kDefaultEta = 1e6;
inline constexpr double kDefaultGamma = 1.0;

struct SolverParams {
  double gamma = kDefaultGamma;
  double mu = kDefaultMu;
  double eta = kDefaultEta;
};

struct SolverReport {
  SoftLabels soft_labels;
  Method method = Method::gf;
  double seconds = 0.0;
  SolverParams params;
};

// ---------------------------------------------------------------------------
// Eigensystem and pseudo-inverse
// ---------------------------------------------------------------------------

/// Eigenvalues at or below this fraction of the largest one are zero modes.
inline constexpr double kZeroModeTolerance = 1e-9;

struct EigenSystem {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
  Index zero_mode_count = 0;
};

inline EigenSystem eigensystem(const Laplacian& lap, double relative_tolerance = kZeroModeTolerance) {
  const Matrix dense = lap.to_dense();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense);
  if (solver.info() != Eigen::Success) throw NumericError("eigensystem: decomposition failed");
  EigenSystem es;
  es.values = solver.eigenvalues();
  es.vectors = solver.eigenvectors();
  const double largest = es.values.size() > 0 ? es.values(es.values.size() - 1) : 0.0;
  const double cutoff = relative_tolerance * std::max(largest, 0.0);
  while (es.zero_mode_count < es.values.size() && es.values(es.zero_mode_count) <= cutoff)
    ++es.zero_mode_count;
  return es;
}

/// Moore-Penrose inverse sum_{i > h} u_i u_i^T / sigma_i from an eigensystem.
inline Matrix pseudo_inverse(const EigenSystem& es) {
  const Index h = es.zero_mode_count;
  const Index r = es.values.size() - h;
  const auto u = es.vectors.rightCols(r);
  const Vector inv = es.values.tail(r).cwiseInverse();
  return u * inv.asDiagonal() * u.transpose();
}

/// F = L^+ Y with zero modes discarded. The zero-mode count must agree with
/// the number of connected components (1 when the Laplacian is perturbed).
inline SolverReport gf_pinv(const Laplacian& lap, const LabelMatrix& y) {
  require(y.rows() == lap.size(), "gf: label matrix rows do not match graph size");
  Stopwatch clock;
  const EigenSystem es = eigensystem(lap);
  const Index expected =
      lap.is_perturbed() ? 1 : static_cast<Index>(connected_components(lap.similarity()).count);
  if (es.zero_mode_count != expected)
    throw NumericError("gf: " + std::to_string(es.zero_mode_count) +
                       " zero eigenvalues but the graph has " + std::to_string(expected) +
                       " connected component(s)");
  const Index r = es.values.size() - es.zero_mode_count;
  const auto u = es.vectors.rightCols(r);
  const Vector inv = es.values.tail(r).cwiseInverse();
  SolverReport report;
  report.soft_labels = u * (inv.asDiagonal() * (u.transpose() * y.values));
  report.method = Method::gf;
  report.params = {1.0, lap.mu(), 0.0};
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Gaussian elimination on the perturbed system
// ---------------------------------------------------------------------------

/// Solves (L + n mu I + eta 1 1^T) F = Y with partial pivoting. Uses the
/// unperturbed graph of `lap`; mu is taken from the argument.
inline SolverReport gf_gauss(const Laplacian& lap, const LabelMatrix& y, double mu = kDefaultMu,
                             double eta = kDefaultEta) {
  require(mu > 0.0, "gfg: mu must be > 0");
  require(eta > 0.0, "gfg: eta must be > 0");
  require(y.rows() == lap.size(), "gfg: label matrix rows do not match graph size");
  Stopwatch clock;
  const Index n = lap.size();
  guard_dense(n, "gfg");
  Matrix a = Laplacian(lap.similarity_ptr()).to_dense();
  a.diagonal().array() += static_cast<double>(n) * mu;
  a.array() += eta;
  const Eigen::PartialPivLU<Matrix> lu(a);
  SolverReport report;
  report.soft_labels = lu.solve(y.values);
  if (!report.soft_labels.allFinite()) throw NumericError("gfg: singular system after pivoting");
  report.method = Method::gfg;
  report.params = {1.0, mu, eta};
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// LLGC
// ---------------------------------------------------------------------------

/// F = (L + gamma I)^{-1} Y by sparse Cholesky.
inline SolverReport llgc(const Laplacian& lap, const LabelMatrix& y, double gamma = kDefaultGamma) {
  require(gamma > 0.0, "llgc: gamma must be > 0");
  require(!lap.is_perturbed(), "llgc: expects an unperturbed Laplacian");
  require(y.rows() == lap.size(), "llgc: label matrix rows do not match graph size");
  Stopwatch clock;
  SparseMatrix a = lap.sparse_shifted();
  for (Index i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += gamma;
  Eigen::SimplicialLDLT<SparseMatrix> chol(a);
  if (chol.info() != Eigen::Success) throw NumericError("llgc: factorization failed");
  SolverReport report;
  report.soft_labels = chol.solve(y.values);
  report.method = Method::llgc;
  report.params = {gamma, 0.0, 0.0};
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// Harmonic function
// ---------------------------------------------------------------------------

/// Clamps labeled rows to their one-hot values and solves
/// (D_uu - S_uu) F_u = S_ul F_l for the unlabeled block.
inline SolverReport harmonic(const Laplacian& lap, const LabelMatrix& y, const LabeledSplit& split) {
  require(y.encoding == LabelEncoding::onehot, "hf: requires one-hot labels");
  require(!lap.is_perturbed(), "hf: expects an unperturbed Laplacian");
  require(y.rows() == lap.size(), "hf: label matrix rows do not match graph size");
  Stopwatch clock;
  const Index n = lap.size();
  const auto labeled = split.mask(n);

  const Components comp = connected_components(lap.similarity());
  std::vector<bool> has_label(static_cast<std::size_t>(comp.count), false);
  for (Index i = 0; i < n; ++i)
    if (labeled[static_cast<std::size_t>(i)])
      has_label[static_cast<std::size_t>(comp.assignment[static_cast<std::size_t>(i)] - 1)] = true;
  for (int c = 0; c < comp.count; ++c)
    if (!has_label[static_cast<std::size_t>(c)])
      throw DataError("hf: connected component " + std::to_string(c + 1) + " (" +
                      std::to_string(comp.sizes[static_cast<std::size_t>(c)]) +
                      " samples) contains no labeled sample");

  std::vector<Index> position(static_cast<std::size_t>(n), -1);
  Index u = 0;
  for (Index i = 0; i < n; ++i)
    if (!labeled[static_cast<std::size_t>(i)]) position[static_cast<std::size_t>(i)] = u++;

  const SparseMatrix& w = lap.similarity().weights();
  const Vector& degree = lap.similarity().degree();
  std::vector<Triplet> entries;
  Matrix rhs = Matrix::Zero(u, y.classes());
  for (Index j = 0; j < n; ++j) {
    const Index pj = position[static_cast<std::size_t>(j)];
    if (pj < 0) continue;
    entries.emplace_back(pj, pj, degree(j));
    for (SparseMatrix::InnerIterator it(w, j); it; ++it) {
      const Index pi = position[static_cast<std::size_t>(it.row())];
      if (pi >= 0)
        entries.emplace_back(pi, pj, -it.value());
      else
        rhs.row(pj) += it.value() * y.values.row(it.row());
    }
  }
  SparseMatrix a(u, u);
  a.setFromTriplets(entries.begin(), entries.end());

  SolverReport report;
  report.soft_labels = y.values;
  if (u > 0) {
    Eigen::SimplicialLDLT<SparseMatrix> chol(a);
    if (chol.info() != Eigen::Success) throw NumericError("hf: factorization failed");
    const Matrix fu = chol.solve(rhs);
    for (Index i = 0; i < n; ++i) {
      const Index p = position[static_cast<std::size_t>(i)];
      if (p >= 0) report.soft_labels.row(i) = fu.row(p);
    }
  }
  report.method = Method::hf;
  report.params = {0.0, 0.0, 0.0};
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------
// 1-NN
// ---------------------------------------------------------------------------

/// Each sample takes the class of its nearest labeled sample (Euclidean);
/// equidistant labeled samples resolve to the lower sample index. Labeled
/// samples keep their own label.
inline std::vector<ClassId> baseline_1nn(const Dataset& ds, const LabeledSplit& split) {
  require(split.labeled_count() >= 1, "1nn: need at least one labeled sample");
  const Matrix columns = ds.features.transpose();
  std::vector<ClassId> out(static_cast<std::size_t>(ds.size()));
  parallel_for(ds.size(), [&](Index i) {
    double best = std::numeric_limits<double>::infinity();
    ClassId label = split.labels.front();
    for (std::size_t j = 0; j < split.labeled_indices.size(); ++j) {
      const double d = (columns.col(i) - columns.col(split.labeled_indices[j])).squaredNorm();
      if (d < best) {
        best = d;
        label = split.labels[j];
      }
    }
    out[static_cast<std::size_t>(i)] = label;
  });
  return out;
}

}  // namespace green_ssl
