#pragma once

// Metrics over the unlabeled samples and the seeded trial runner.

#include "green_ssl/anchored.hpp"
#include "green_ssl/core.hpp"
#include "green_ssl/dataio.hpp"
#include "green_ssl/dense_solvers.hpp"
#include "green_ssl/graph.hpp"
#include "green_ssl/labels.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace green_ssl {

namespace detail {

inline void check_lengths(std::span<const ClassId> pred, std::span<const ClassId> truth) {
  require(pred.size() == truth.size(), "metrics: prediction and truth lengths differ");
}

inline std::vector<bool> evaluation_mask(std::size_t n, const LabeledSplit& split) {
  std::vector<bool> unlabeled(n, true);
  for (Index i : split.labeled_indices) unlabeled.at(static_cast<std::size_t>(i)) = false;
  bool any = false;
  for (bool u : unlabeled) any = any || u;
  if (!any) throw DataError("metrics: every sample is labeled, nothing to evaluate");
  return unlabeled;
}

}  // namespace detail

/// Fraction of unlabeled samples predicted correctly.
inline double accuracy(std::span<const ClassId> pred, std::span<const ClassId> truth,
                       const LabeledSplit& split) {
  detail::check_lengths(pred, truth);
  const auto unlabeled = detail::evaluation_mask(pred.size(), split);
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!unlabeled[i]) continue;
    ++total;
    if (pred[i] == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

/// 2 P R / (P + R) where P and R are the one-vs-rest precision and recall
/// averaged over classes, on unlabeled samples. A class never predicted has
/// precision 0; a class absent from the evaluation set has recall 0.
inline double f1_macro(std::span<const ClassId> pred, std::span<const ClassId> truth,
                       const LabeledSplit& split) {
  detail::check_lengths(pred, truth);
  const auto unlabeled = detail::evaluation_mask(pred.size(), split);
  ClassId classes = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) classes = std::max({classes, pred[i], truth[i]});
  std::vector<double> tp(static_cast<std::size_t>(classes), 0.0);
  std::vector<double> predicted(tp.size(), 0.0);
  std::vector<double> actual(tp.size(), 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!unlabeled[i]) continue;
    const auto p = static_cast<std::size_t>(pred[i] - 1);
    const auto t = static_cast<std::size_t>(truth[i] - 1);
    predicted[p] += 1.0;
    actual[t] += 1.0;
    if (p == t) tp[p] += 1.0;
  }
  double precision = 0.0;
  double recall = 0.0;
  for (std::size_t c = 0; c < tp.size(); ++c) {
    precision += predicted[c] > 0.0 ? tp[c] / predicted[c] : 0.0;
    recall += actual[c] > 0.0 ? tp[c] / actual[c] : 0.0;
  }
  precision /= static_cast<double>(tp.size());
  recall /= static_cast<double>(tp.size());
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

struct LabelMargin {
  double labeled = 0.0;
  double unlabeled = 0.0;
};

/// Average over classes j of mean(F_ij | class j) - mean(F_ij | not class j),
/// computed separately over labeled samples (given labels) and unlabeled
/// samples (ground truth).
inline LabelMargin label_margin(const SoftLabels& f, std::span<const ClassId> truth,
                                const LabeledSplit& split) {
  const Index n = f.rows();
  const Index c = f.cols();
  require(c >= 2, "label margin: need at least two classes");
  require(static_cast<Index>(truth.size()) == n, "label margin: truth length differs from F");
  const auto labeled = split.mask(n);

  auto margin = [&](bool use_labeled, const char* group) {
    double total = 0.0;
    for (Index j = 0; j < c; ++j) {
      double in_sum = 0.0, out_sum = 0.0;
      Index in_count = 0, out_count = 0;
      for (Index i = 0; i < n; ++i) {
        if (labeled[static_cast<std::size_t>(i)] != use_labeled) continue;
        if (truth[static_cast<std::size_t>(i)] == j + 1) {
          in_sum += f(i, j);
          ++in_count;
        } else {
          out_sum += f(i, j);
          ++out_count;
        }
      }
      if (in_count == 0 || out_count == 0)
        throw DataError(std::string("label margin: class ") + std::to_string(j + 1) +
                        " has no " + group + " samples on one side");
      total += in_sum / static_cast<double>(in_count) - out_sum / static_cast<double>(out_count);
    }
    return total / static_cast<double>(c);
  };
  return {margin(true, "labeled"), margin(false, "unlabeled")};
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct MethodConfig {
  Method method = Method::gfg;
  int k = 20;
  SolverParams params;
  Index anchors = 1024;
  int anchor_k = kDefaultAnchorNeighbors;
  LabelEncoding encoding = LabelEncoding::pm1;
  BandwidthPopulation bandwidth = BandwidthPopulation::all_pairs;
  bool random_anchors = false;  // debugging: sampled instead of BKHK anchors
};

struct TrialResult {
  Method method = Method::gf;
  std::uint64_t seed = 0;
  Index per_class = 0;
  double accuracy = 0.0;
  double f1_macro = 0.0;
  double lm_labeled = 0.0;
  double lm_unlabeled = 0.0;
  double seconds = 0.0;        // graph construction + solve
  double solve_seconds = 0.0;  // solve only
  std::vector<ClassId> predictions;
  std::string error;  // non-empty when the trial failed

  bool ok() const { return error.empty(); }
};

struct SolvedTrial {
  LabeledSplit split;
  SolverReport report;
  double seconds = 0.0;
};

inline SoftLabels one_hot_scores(std::span<const ClassId> pred, int classes) {
  SoftLabels f = SoftLabels::Zero(static_cast<Index>(pred.size()), classes);
  for (std::size_t i = 0; i < pred.size(); ++i) f(static_cast<Index>(i), pred[i] - 1) = 1.0;
  return f;
}

/// Builds the graph required by `cfg.method` and solves one seeded split.
inline SolvedTrial solve_trial(const Dataset& ds, const MethodConfig& cfg, Index per_class,
                               std::uint64_t seed) {
  Stopwatch clock;
  SolvedTrial out;
  out.split = sample_split(ds, per_class, seed);
  const Index n = ds.size();
  switch (cfg.method) {
    case Method::nn1: {
      Stopwatch solve;
      const auto pred = baseline_1nn(ds, out.split);
      out.report.soft_labels = one_hot_scores(pred, ds.class_count);
      out.report.method = Method::nn1;
      out.report.seconds = solve.seconds();
      break;
    }
    case Method::gfa: {
      const AnchorSet anchors =
          cfg.random_anchors ? random_anchors(ds, cfg.anchors, seed) : bkhk(ds, cfg.anchors, {seed, 100});
      const AnchorGraph g = build_anchor_graph(anchor_affinity(ds, anchors, cfg.anchor_k), cfg.params.mu);
      out.report = gf_anchored(g, encode(out.split, n, ds.class_count, cfg.encoding));
      break;
    }
    default: {
      const Laplacian lap = laplacian(build_knn_gaussian(ds, {cfg.k, cfg.bandwidth}));
      const LabelEncoding enc = cfg.method == Method::hf ? LabelEncoding::onehot : cfg.encoding;
      const LabelMatrix y = encode(out.split, n, ds.class_count, enc);
      if (cfg.method == Method::gf)
        out.report = gf_pinv(cfg.params.mu > 0.0 ? perturbed_laplacian(lap, cfg.params.mu) : lap, y);
      else if (cfg.method == Method::gfg) out.report = gf_gauss(lap, y, cfg.params.mu, cfg.params.eta);
      else if (cfg.method == Method::llgc) out.report = llgc(lap, y, cfg.params.gamma);
      else out.report = harmonic(lap, y, out.split);
      break;
    }
  }
  out.seconds = clock.seconds();
  return out;
}

inline TrialResult run_trial(const Dataset& ds, const MethodConfig& cfg, Index per_class,
                             std::uint64_t seed) {
  TrialResult r;
  r.method = cfg.method;
  r.seed = seed;
  r.per_class = per_class;
  try {
    const SolvedTrial t = solve_trial(ds, cfg, per_class, seed);
    r.predictions = predict(t.report.soft_labels);
    r.accuracy = accuracy(r.predictions, ds.truth, t.split);
    r.f1_macro = f1_macro(r.predictions, ds.truth, t.split);
    if (ds.class_count >= 2) {
      const LabelMargin lm = label_margin(t.report.soft_labels, ds.truth, t.split);
      r.lm_labeled = lm.labeled;
      r.lm_unlabeled = lm.unlabeled;
    }
    r.seconds = t.seconds;
    r.solve_seconds = t.report.seconds;
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population deviation
};

inline MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

struct TrialSummary {
  Method method = Method::gf;
  Index per_class = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  MeanStd accuracy;
  MeanStd f1_macro;
  MeanStd lm_labeled;
  MeanStd lm_unlabeled;
  MeanStd seconds;
  MeanStd solve_seconds;
};

inline TrialSummary summarize(std::span<const TrialResult> results) {
  TrialSummary s;
  std::vector<double> acc, f1, lml, lmu, sec, solve;
  for (const auto& r : results) {
    s.method = r.method;
    s.per_class = r.per_class;
    ++s.trials;
    if (!r.ok()) {
      ++s.failures;
      continue;
    }
    acc.push_back(r.accuracy);
    f1.push_back(r.f1_macro);
    lml.push_back(r.lm_labeled);
    lmu.push_back(r.lm_unlabeled);
    sec.push_back(r.seconds);
    solve.push_back(r.solve_seconds);
  }
  s.accuracy = mean_std(acc);
  s.f1_macro = mean_std(f1);
  s.lm_labeled = mean_std(lml);
  s.lm_unlabeled = mean_std(lmu);
  s.seconds = mean_std(sec);
  s.solve_seconds = mean_std(solve);
  return s;
}

/// One trial per seed, run sequentially so timings do not interfere. A
/// failing trial is recorded and the remaining seeds still run.
inline std::vector<TrialResult> run_trials(const Dataset& ds, const MethodConfig& cfg,
                                           Index per_class, std::span<const std::uint64_t> seeds) {
  std::vector<TrialResult> out;
  out.reserve(seeds.size());
  for (std::uint64_t seed : seeds) out.push_back(run_trial(ds, cfg, per_class, seed));
  return out;
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

inline constexpr const char* kLedgerHeader =
    "method,dataset,seed,per_class,accuracy,f1,lm_l,lm_u,seconds";

/// Appends successful trials to a CSV ledger, writing the header first when
/// the file is new or empty.
inline void append_ledger(const std::string& path, const std::string& dataset,
                          std::span<const TrialResult> results) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot write ledger: " + path);
  if (fresh) out << kLedgerHeader << '\n';
  out << std::setprecision(10);
  for (const auto& r : results) {
    if (!r.ok()) continue;
    out << to_string(r.method) << ',' << dataset << ',' << r.seed << ',' << r.per_class << ','
        << r.accuracy << ',' << r.f1_macro << ',' << r.lm_labeled << ',' << r.lm_unlabeled << ','
        << r.seconds << '\n';
  }
}

}  // namespace green_ssl
