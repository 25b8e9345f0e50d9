#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cstdlib>
#include <set>
#include <sstream>

using namespace green_ssl;

namespace {

Dataset points_1d(std::initializer_list<double> xs) {
  Dataset ds;
  ds.features.resize(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) ds.features(i++, 0) = x;
  ds.truth.assign(xs.size(), 1);
  ds.class_count = 1;
  return ds;
}

/// Random graph made of `blocks` connected chains with extra random edges.
SparseSimilarity random_block_graph(Index n, int blocks, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Triplet> edges;
  std::set<std::pair<Index, Index>> used;
  auto add = [&](Index a, Index b) {
    if (a == b) return;
    const auto key = std::make_pair(std::min(a, b), std::max(a, b));
    if (used.insert(key).second) edges.emplace_back(key.first, key.second, 0.05 + 0.95 * rng.uniform01());
  };
  for (Index i = 0; i < n; ++i) {
    if (i + blocks < n) add(i, i + blocks);  // chain inside block i % blocks
    for (int t = 0; t < 2; ++t) {
      const auto j = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      if (j % blocks == i % blocks) add(i, j);
    }
  }
  return SparseSimilarity::from_edges(n, edges);
}

}  // namespace

TEST(KnnGaussian, HandComputedThreePoints) {
  const Dataset ds = points_1d({0.0, 1.0, 3.0});
  const SparseSimilarity s = build_knn_gaussian(ds, {1, BandwidthPopulation::knn_edges});
  const auto e = s.edges();
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].row(), 0);
  EXPECT_EQ(e[0].col(), 1);
  EXPECT_EQ(e[1].row(), 1);
  EXPECT_EQ(e[1].col(), 2);
  EXPECT_NEAR(e[0].value(), std::exp(-1.0 / 2.25), 1e-15);
  EXPECT_NEAR(e[0].value(), 0.6412, 1e-4);
  EXPECT_NEAR(e[1].value(), std::exp(-4.0 / 2.25), 1e-15);
}

TEST(KnnGaussian, AllPairsBandwidthOnThreePoints) {
  const Dataset ds = points_1d({0.0, 1.0, 3.0});
  const SparseSimilarity s = build_knn_gaussian(ds, {1, BandwidthPopulation::all_pairs});
  const double width = oracle::nonzero_variance({1.0, 9.0, 4.0});
  EXPECT_NEAR(s.edges()[0].value(), std::exp(-1.0 / width), 1e-15);
}

TEST(KnnGaussian, TwoPointsFallBackToMean) {
  const Dataset ds = points_1d({0.0, 2.0});
  for (auto pop : {BandwidthPopulation::knn_edges, BandwidthPopulation::all_pairs}) {
    const SparseSimilarity s = build_knn_gaussian(ds, {1, pop});
    ASSERT_EQ(s.edge_count(), 1);
    EXPECT_NEAR(s.edges()[0].value(), std::exp(-1.0), 1e-15);
  }
}

TEST(KnnGaussian, IdenticalPointsAreDegenerate) {
  const Dataset ds = points_1d({5.0, 5.0, 5.0});
  try {
    build_knn_gaussian(ds, {1, BandwidthPopulation::knn_edges});
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate bandwidth"), std::string::npos);
  }
  EXPECT_THROW(build_knn_gaussian(ds, {1, BandwidthPopulation::all_pairs}), NumericError);
}

TEST(KnnGaussian, RejectsBadK) {
  const Dataset ds = points_1d({0.0, 1.0, 3.0});
  EXPECT_THROW(build_knn_gaussian(ds, {3}), ConfigError);
  EXPECT_THROW(build_knn_gaussian(ds, {0}), ConfigError);
}

TEST(KnnGaussian, DefaultNeighborCount) { EXPECT_EQ(KnnGraphOptions{}.k, 20); }

TEST(KnnGaussian, TiesGoToLowerIndex) {
  // Sample 1 is equidistant from 0 and 2.
  const Dataset ds = points_1d({0.0, 1.0, 2.0, 10.0});
  const auto nbrs = knn_indices(ds.features, 1);
  EXPECT_EQ(nbrs[1][0], 0);
}

TEST(KnnGaussian, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Dataset ds = gen_blobs({40 + 7 * static_cast<Index>(seed), 3, 3, 1.0, 2.5, seed});
    for (bool all_pairs : {false, true}) {
      const int k = 3 + static_cast<int>(seed);
      const auto pop = all_pairs ? BandwidthPopulation::all_pairs : BandwidthPopulation::knn_edges;
      const Matrix got = oracle::dense_similarity(build_knn_gaussian(ds, {k, pop}));
      const Matrix want = oracle::knn_gaussian(ds.features, k, all_pairs);
      EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12) << "seed " << seed;
    }
  }
}

TEST(KnnGaussian, StructuralInvariants) {
  const Dataset ds = gen_blobs({120, 4, 5, 1.0, 2.0, 3});
  const SparseSimilarity s = build_knn_gaussian(ds, {7});
  const Matrix w = oracle::dense_similarity(s);
  EXPECT_EQ(w, w.transpose());
  EXPECT_TRUE(w.diagonal().isZero(0.0));
  EXPECT_GE(w.minCoeff(), 0.0);
  EXPECT_LE(w.maxCoeff(), 1.0);
  EXPECT_LT((s.degree() - w.rowwise().sum()).cwiseAbs().maxCoeff(), 1e-12);
  const auto nbrs = oracle::knn(ds.features, 7);
  for (Index i = 0; i < ds.size(); ++i)
    for (Index j : nbrs[static_cast<std::size_t>(i)]) EXPECT_GT(w(i, j), 0.0);
}

TEST(KnnGaussian, ThreadCountDoesNotChangeResult) {
  const Dataset ds = gen_blobs({300, 3, 4, 1.0, 2.0, 5});
  ::setenv("GREEN_SSL_THREADS", "1", 1);
  const Matrix one = oracle::dense_similarity(build_knn_gaussian(ds, {10}));
  ::setenv("GREEN_SSL_THREADS", "4", 1);
  const Matrix four = oracle::dense_similarity(build_knn_gaussian(ds, {10}));
  ::unsetenv("GREEN_SSL_THREADS");
  EXPECT_EQ(one, four);
}

TEST(SparseSimilarityTest, RejectsInvalidEdges) {
  EXPECT_THROW(SparseSimilarity::from_edges(3, {Triplet(1, 1, 0.5)}), DataError);
  EXPECT_THROW(SparseSimilarity::from_edges(3, {Triplet(0, 1, 1.5)}), DataError);
  EXPECT_THROW(SparseSimilarity::from_edges(3, {Triplet(0, 1, -0.1)}), DataError);
  EXPECT_THROW(SparseSimilarity::from_edges(3, {Triplet(0, 5, 0.5)}), DataError);
  EXPECT_THROW(SparseSimilarity::from_edges(3, {Triplet(0, 1, 0.5), Triplet(1, 0, 0.5)}), DataError);
}

TEST(LaplacianTest, TwoNodeDefinition) {
  const Laplacian lap = laplacian(SparseSimilarity::from_matrix((Matrix(2, 2) << 0, 1, 1, 0).finished()));
  const Matrix expected = (Matrix(2, 2) << 1, -1, -1, 1).finished();
  EXPECT_EQ(lap.to_dense(), expected);
}

TEST(LaplacianTest, EmptyGraphIsZero) {
  const Laplacian lap = laplacian(SparseSimilarity::from_edges(3, {}));
  EXPECT_TRUE(lap.to_dense().isZero(0.0));
}

TEST(LaplacianTest, RowSumsVanishAndMatchOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SparseSimilarity sim = random_block_graph(60, 1 + static_cast<int>(seed % 3), seed);
    const Laplacian lap = laplacian(sim);
    const Vector ones = Vector::Ones(sim.size());
    EXPECT_LT(lap.apply(ones).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, sim.degree().maxCoeff()));
    EXPECT_LT((lap.to_dense() - oracle::laplacian(oracle::dense_similarity(sim))).cwiseAbs().maxCoeff(), 1e-14);
    Rng rng(seed);
    Vector v(sim.size());
    for (Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    EXPECT_LT(std::abs(lap.apply(v).sum()), 1e-9 * v.norm());
  }
}

TEST(PerturbedLaplacian, TwoIsolatedNodes) {
  const Laplacian lap = perturbed_laplacian(laplacian(SparseSimilarity::from_edges(2, {})), 0.1);
  const Matrix expected = (Matrix(2, 2) << 0.1, -0.1, -0.1, 0.1).finished();
  EXPECT_LT((lap.to_dense() - expected).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Matrix> es(lap.to_dense());
  EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-15);
  EXPECT_NEAR(es.eigenvalues()(1), 0.2, 1e-15);
}

TEST(PerturbedLaplacian, RejectsNonPositiveMu) {
  const Laplacian lap = laplacian(SparseSimilarity::from_edges(2, {}));
  EXPECT_THROW(perturbed_laplacian(lap, 0.0), ConfigError);
  EXPECT_THROW(perturbed_laplacian(lap, -1e-5), ConfigError);
  EXPECT_DOUBLE_EQ(kDefaultMu, 1e-5);
}

TEST(PerturbedLaplacian, ZeroMuOperatorIsPlain) {
  const SparseSimilarity sim = random_block_graph(40, 2, 3);
  const Laplacian plain = laplacian(sim);
  const Laplacian zero(plain.similarity_ptr(), 0.0);
  Matrix v = Matrix::Random(40, 3);
  EXPECT_LT((plain.apply(v) - zero.apply(v)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PerturbedLaplacian, SpectrumShift) {
  // {0} u {n mu repeated h-1 times} u {sigma_i + n mu}.
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int h = 1 + static_cast<int>(seed % 4);
    const Index n = 20 + static_cast<Index>(seed) * 2;
    const double mu = 1e-3 * static_cast<double>(1 + seed % 3);
    const SparseSimilarity sim = random_block_graph(n, h, seed + 100);
    ASSERT_EQ(connected_components(sim).count, h);
    const Laplacian lap = laplacian(sim);
    Eigen::SelfAdjointEigenSolver<Matrix> plain(lap.to_dense());
    Eigen::SelfAdjointEigenSolver<Matrix> pert(perturbed_laplacian(lap, mu).to_dense());
    std::vector<double> expected{0.0};
    for (int i = 1; i < h; ++i) expected.push_back(static_cast<double>(n) * mu);
    for (Index i = h; i < n; ++i) expected.push_back(plain.eigenvalues()(i) + static_cast<double>(n) * mu);
    std::sort(expected.begin(), expected.end());
    for (Index i = 0; i < n; ++i)
      EXPECT_NEAR(pert.eigenvalues()(i), expected[static_cast<std::size_t>(i)], 1e-8) << "seed " << seed;
  }
}

TEST(PerturbedLaplacian, ImplicitMatchesDense) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Index n = 50 + 37 * static_cast<Index>(seed);
    const Laplacian lap = perturbed_laplacian(laplacian(random_block_graph(n, 2, seed)), 1e-3);
    const Matrix v = Matrix::Random(n, 4);
    EXPECT_LT((lap.apply(v) - lap.to_dense() * v).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Components, ChainAndEmpty) {
  std::vector<Triplet> chain;
  for (Index i = 0; i + 1 < 5; ++i) chain.emplace_back(i, i + 1, 1.0);
  EXPECT_EQ(connected_components(SparseSimilarity::from_edges(5, chain)).count, 1);
  const Components empty = connected_components(SparseSimilarity::from_edges(4, {}));
  EXPECT_EQ(empty.count, 4);
  EXPECT_EQ(empty.assignment, (std::vector<int>{1, 2, 3, 4}));
}

TEST(Components, IdsOrderedBySmallestMember) {
  const SparseSimilarity s = SparseSimilarity::from_edges(5, {Triplet(1, 4, 0.5), Triplet(0, 3, 0.5)});
  const Components c = connected_components(s);
  EXPECT_EQ(c.assignment, (std::vector<int>{1, 2, 3, 1, 2}));
  EXPECT_EQ(c.sizes, (std::vector<Index>{2, 2, 1}));
}

TEST(Components, MatchUnionFindOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SparseSimilarity sim = random_block_graph(70, 1 + static_cast<int>(seed % 5), seed + 7);
    const Components c = connected_components(sim);
    EXPECT_EQ(c.assignment, oracle::components(oracle::dense_similarity(sim)));
    Index total = 0;
    for (Index s : c.sizes) total += s;
    EXPECT_EQ(total, 70);
  }
}

TEST(Components, SeparatedTwoRingHasTwoPieces) {
  const Dataset ds = gen_two_ring({});
  const SparseSimilarity sim = build_knn_gaussian(ds, {10});
  const Components c = connected_components(sim);
  EXPECT_EQ(c.count, 2);
  for (Index i = 0; i < ds.size(); ++i)
    EXPECT_EQ(c.assignment[static_cast<std::size_t>(i)], ds.truth[static_cast<std::size_t>(i)]);
}

TEST(GraphFile, RoundTrip) {
  oracle::TempDir dir("graph");
  const SparseSimilarity sim = build_knn_gaussian(gen_blobs({50, 2, 3, 1.0, 2.0, 1}), {5});
  save_graph(sim, dir.file("g.txt"));
  const SparseSimilarity back = load_graph(dir.file("g.txt"));
  EXPECT_EQ(oracle::dense_similarity(back), oracle::dense_similarity(sim));
  std::istringstream lines(oracle::slurp(dir.file("g.txt")));
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "n 50");
  Index pi = -1, pj = -1, i, j;
  double w;
  while (lines >> i >> j >> w) {
    EXPECT_LT(i, j);
    EXPECT_TRUE(i > pi || (i == pi && j > pj));
    pi = i;
    pj = j;
  }
}

TEST(GraphFile, MalformedInput) {
  oracle::TempDir dir("graph");
  EXPECT_THROW(load_graph(dir.write("a.txt", "3\n0 1 0.5\n")), DataError);
  EXPECT_THROW(load_graph(dir.write("b.txt", "n 3\n1 0 0.5\n")), DataError);
  EXPECT_THROW(load_graph(dir.write("c.txt", "n 3\n0 1 x\n")), DataError);
  EXPECT_THROW(load_graph(dir.file("missing.txt")), DataError);
}
