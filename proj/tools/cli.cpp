#include "cli.hpp"

#include "green_ssl/green_ssl.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace green_ssl::cli {

namespace {

using nlohmann::ordered_json;

struct DataOptions {
  std::string csv;
  std::string libsvm;
  std::string toy;
  std::string name;
  int label_column = -1;
  TwoRingParams ring;
  BlobParams blobs;
};

struct MethodOptions {
  std::string method = "gfg";
  std::string encoding = "pm1";
  std::string bandwidth = "all-pairs";
  MethodConfig config;
};

struct TrialOptions {
  Index per_class = 10;
  std::size_t seeds = 5;
  std::uint64_t first_seed = 0;
};

void add_data_options(CLI::App& app, DataOptions& o) {
  auto* group = app.add_option_group("dataset");
  auto* csv = group->add_option("--data", o.csv, "CSV file (class label in --label-column)");
  auto* svm = group->add_option("--libsvm", o.libsvm, "LIBSVM text file");
  auto* toy = group->add_option("--toy", o.toy, "synthetic dataset")
                  ->check(CLI::IsMember({"two-ring", "blobs"}));
  csv->excludes(svm)->excludes(toy);
  svm->excludes(toy);
  group->require_option(1);
  app.add_option("--label-column", o.label_column, "label column for --data; negative counts from the end");
  app.add_option("--name", o.name, "dataset name recorded in outputs");
  app.add_option("--inner", o.ring.n_inner, "two-ring: inner ring size");
  app.add_option("--outer", o.ring.n_outer, "two-ring: outer ring size");
  app.add_option("--r-inner", o.ring.r_inner, "two-ring: inner radius");
  app.add_option("--r-outer", o.ring.r_outer, "two-ring: outer radius");
  app.add_option("--noise", o.ring.noise, "two-ring: radial noise deviation");
  app.add_option("--seed", o.ring.seed, "synthetic data seed");
  app.add_option("--n", o.blobs.n, "blobs: sample count");
  app.add_option("--classes", o.blobs.classes, "blobs: class count");
  app.add_option("--dim", o.blobs.dim, "blobs: dimension");
}

void add_method_options(CLI::App& app, MethodOptions& o, bool with_method) {
  if (with_method)
    app.add_option("--method", o.method, "gf, gfg, llgc, hf, 1nn or gfa")
        ->check(CLI::IsMember({"gf", "gfg", "llgc", "hf", "1nn", "gfa"}));
  app.add_option("--k", o.config.k, "neighbors per sample in the kNN graph");
  app.add_option("--gamma", o.config.params.gamma, "LLGC regularization");
  app.add_option("--mu", o.config.params.mu, "uniform perturbation (0 keeps the original GF)");
  app.add_option("--eta", o.config.params.eta, "constant-mode penalty for gfg");
  app.add_option("--anchors", o.config.anchors, "anchor count for gfa (power of two)");
  app.add_option("--anchor-k", o.config.anchor_k, "anchors per sample for gfa");
  app.add_flag("--random-anchors", o.config.random_anchors, "gfa: sample anchors instead of BKHK");
  app.add_option("--encoding", o.encoding, "label coding")->check(CLI::IsMember({"pm1", "onehot"}));
  app.add_option("--bandwidth", o.bandwidth, "pairs entering the kernel width")
      ->check(CLI::IsMember({"all-pairs", "knn-edges"}));
}

void add_trial_options(CLI::App& app, TrialOptions& o) {
  app.add_option("--per-class", o.per_class, "labeled samples per class")->check(CLI::PositiveNumber);
  app.add_option("--seeds", o.seeds, "number of trials")->check(CLI::PositiveNumber);
  app.add_option("--first-seed", o.first_seed, "seed of the first trial");
}

MethodConfig resolve(const MethodOptions& o) {
  MethodConfig cfg = o.config;
  cfg.method = parse_method(o.method);
  cfg.encoding = parse_encoding(o.encoding);
  cfg.bandwidth = o.bandwidth == "knn-edges" ? BandwidthPopulation::knn_edges
                                             : BandwidthPopulation::all_pairs;
  require(cfg.k >= 1, "--k must be >= 1");
  require(cfg.params.gamma > 0.0, "--gamma must be > 0");
  require(cfg.params.mu >= 0.0, "--mu must be >= 0");
  require(cfg.params.eta > 0.0, "--eta must be > 0");
  if (cfg.method == Method::gfg || cfg.method == Method::gfa)
    require(cfg.params.mu > 0.0, "--mu must be > 0 for " + std::string(to_string(cfg.method)));
  return cfg;
}

Dataset load_dataset(DataOptions& o) {
  Dataset ds;
  if (!o.csv.empty()) {
    ds = load_csv(o.csv, o.label_column);
    if (o.name.empty()) o.name = std::filesystem::path(o.csv).stem().string();
  } else if (!o.libsvm.empty()) {
    ds = load_libsvm(o.libsvm);
    if (o.name.empty()) o.name = std::filesystem::path(o.libsvm).stem().string();
  } else if (o.toy == "two-ring") {
    ds = gen_two_ring(o.ring);
    if (o.name.empty()) o.name = "two-ring";
  } else {
    o.blobs.seed = o.ring.seed;
    ds = gen_blobs(o.blobs);
    if (o.name.empty()) o.name = "blobs";
  }
  ds.validate();
  return ds;
}

void check_per_class(const Dataset& ds, Index per_class) {
  const auto sizes = ds.class_sizes();
  const Index smallest = *std::min_element(sizes.begin(), sizes.end());
  if (per_class > smallest)
    throw ConfigError("--per-class " + std::to_string(per_class) + " exceeds the smallest class (" +
                      std::to_string(smallest) + " samples)");
}

void check_anchors(const Dataset& ds, const MethodConfig& cfg) {
  if (cfg.method != Method::gfa) return;
  if (cfg.anchors < 2 || !std::has_single_bit(static_cast<unsigned long long>(cfg.anchors)))
    throw ConfigError("--anchors " + std::to_string(cfg.anchors) + " is not a power of two >= 2");
  if (cfg.anchors > ds.size())
    throw ConfigError("--anchors " + std::to_string(cfg.anchors) + " exceeds the sample count " +
                      std::to_string(ds.size()));
  if (cfg.anchor_k < 1 || cfg.anchor_k >= cfg.anchors)
    throw ConfigError("--anchor-k must be in [1, anchors) (anchor-k = " + std::to_string(cfg.anchor_k) +
                      ", anchors = " + std::to_string(cfg.anchors) + ")");
}

ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json to_json(const MeanStd& s) { return {{"mean", finite_or_null(s.mean)}, {"std", finite_or_null(s.std)}}; }

ordered_json params_json(const MethodConfig& cfg) {
  ordered_json p;
  p["k"] = cfg.k;
  p["gamma"] = cfg.params.gamma;
  p["mu"] = cfg.params.mu;
  p["eta"] = cfg.method == Method::gfa ? ordered_json(nullptr) : ordered_json(cfg.params.eta);
  p["anchors"] = cfg.anchors;
  p["anchor_k"] = cfg.anchor_k;
  p["random_anchors"] = cfg.random_anchors;
  p["encoding"] = cfg.method == Method::hf ? "onehot" : to_string(cfg.encoding);
  p["bandwidth"] = cfg.bandwidth == BandwidthPopulation::knn_edges ? "knn-edges" : "all-pairs";
  return p;
}

void write_json(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void write_predictions(const std::string& path, const Dataset& ds, const std::vector<ClassId>& pred) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "sample_index,predicted_class,true_class\n";
  for (std::size_t i = 0; i < pred.size(); ++i) out << i << ',' << pred[i] << ',' << ds.truth[i] << '\n';
}

std::string percent(const MeanStd& s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * s.mean << " +- " << 100.0 * s.std << " %";
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct BuildGraphCommand {
  DataOptions data;
  MethodOptions method;
  std::string out_path;

  int execute(std::ostream& out) {
    const Dataset ds = load_dataset(data);
    const MethodConfig cfg = resolve(method);
    const SparseSimilarity sim = build_knn_gaussian(ds, {cfg.k, cfg.bandwidth});
    save_graph(sim, out_path);
    const Components comp = connected_components(sim);
    out << data.name << ": n = " << sim.size() << ", edges = " << sim.edge_count()
        << ", components = " << comp.count << " -> " << out_path << '\n';
    return kSuccess;
  }
};

struct RunCommand {
  DataOptions data;
  MethodOptions method;
  TrialOptions trials;
  std::string ledger;
  std::string summary;
  std::string predictions;
  std::string anchors_out;

  int execute(std::ostream& out, std::ostream& err) {
    const Dataset ds = load_dataset(data);
    const MethodConfig cfg = resolve(method);
    check_per_class(ds, trials.per_class);
    check_anchors(ds, cfg);
    const auto seeds = seed_range(trials.first_seed, trials.seeds);

    if (!anchors_out.empty()) {
      require(cfg.method == Method::gfa, "--anchors-out requires --method gfa");
      const AnchorSet a = cfg.random_anchors ? random_anchors(ds, cfg.anchors, seeds.front())
                                             : bkhk(ds, cfg.anchors, {seeds.front(), 100});
      save_anchors(a, anchors_out);
    }

    const auto results = run_trials(ds, cfg, trials.per_class, seeds);
    const TrialSummary s = summarize(results);

    for (const auto& r : results)
      if (!r.ok()) err << "seed " << r.seed << ": " << r.error << '\n';
    if (!ledger.empty()) append_ledger(ledger, data.name, results);
    if (!predictions.empty() && results.front().ok())
      write_predictions(predictions, ds, results.front().predictions);
    if (!summary.empty()) {
      ordered_json j;
      j["command"] = "run";
      j["dataset"] = data.name;
      j["samples"] = ds.size();
      j["classes"] = ds.class_count;
      j["method"] = to_string(cfg.method);
      j["params"] = params_json(cfg);
      j["per_class"] = trials.per_class;
      j["seeds"] = seeds;
      ordered_json list = ordered_json::array();
      for (const auto& r : results) {
        ordered_json t;
        t["seed"] = r.seed;
        t["ok"] = r.ok();
        t["accuracy"] = finite_or_null(r.accuracy);
        t["f1"] = finite_or_null(r.f1_macro);
        t["lm_l"] = finite_or_null(r.lm_labeled);
        t["lm_u"] = finite_or_null(r.lm_unlabeled);
        t["seconds"] = r.seconds;
        t["solve_seconds"] = r.solve_seconds;
        t["error"] = r.error;
        list.push_back(std::move(t));
      }
      j["trials"] = std::move(list);
      j["summary"] = {{"trials", s.trials},       {"failures", s.failures},
                      {"accuracy", to_json(s.accuracy)}, {"f1", to_json(s.f1_macro)},
                      {"lm_l", to_json(s.lm_labeled)},   {"lm_u", to_json(s.lm_unlabeled)},
                      {"seconds", to_json(s.seconds)},   {"solve_seconds", to_json(s.solve_seconds)}};
      write_json(summary, j);
    }

    out << to_string(cfg.method) << " on " << data.name << " (" << trials.per_class
        << " labels/class, " << s.trials - s.failures << '/' << s.trials
        << " trials): accuracy " << percent(s.accuracy) << ", f1 " << percent(s.f1_macro) << '\n';
    return s.failures > 0 ? kRuntimeError : kSuccess;
  }
};

struct BenchAnchorsCommand {
  DataOptions data;
  MethodOptions method;
  TrialOptions trials;
  std::string m_list = "64,128,256,512";
  std::string out_path;
  std::string svg;

  int execute(std::ostream& out) {
    const auto ms = parse_int_list(m_list);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      if (ms[i] < 2 || !std::has_single_bit(static_cast<unsigned long long>(ms[i])))
        throw ConfigError("--m-list: " + std::to_string(ms[i]) + " is not a power of two >= 2");
      if (i > 0 && ms[i] <= ms[i - 1]) throw ConfigError("--m-list must be strictly ascending");
    }
    const Dataset ds = load_dataset(data);
    method.method = "gfa";
    MethodConfig cfg = resolve(method);
    check_per_class(ds, trials.per_class);
    for (long long m : ms) {
      cfg.anchors = static_cast<Index>(m);
      check_anchors(ds, cfg);
    }
    const auto seeds = seed_range(trials.first_seed, trials.seeds);

    std::ofstream csv(out_path);
    if (!csv) throw DataError("cannot write '" + out_path + "'");
    csv << "m,accuracy,solve_seconds\n" << std::setprecision(10);
    Series acc{"accuracy", {}, {}};
    Series time{"solve seconds", {}, {}};
    for (long long m : ms) {
      cfg.anchors = static_cast<Index>(m);
      const auto results = run_trials(ds, cfg, trials.per_class, seeds);
      const TrialSummary s = summarize(results);
      if (s.failures > 0) {
        for (const auto& r : results)
          if (!r.ok()) throw NumericError("m = " + std::to_string(m) + ", seed " + std::to_string(r.seed) + ": " + r.error);
      }
      csv << m << ',' << s.accuracy.mean << ',' << s.solve_seconds.mean << '\n';
      acc.x.push_back(static_cast<double>(m));
      acc.y.push_back(s.accuracy.mean);
      time.x.push_back(static_cast<double>(m));
      time.y.push_back(s.solve_seconds.mean);
      out << "m = " << m << ": accuracy " << percent(s.accuracy) << ", solve " << s.solve_seconds.mean << " s\n";
    }
    if (!svg.empty())
      write_svg(svg, {{"Accuracy", "anchors m", "accuracy", {acc}},
                      {"Solve time", "anchors m", "seconds", {time}}});
    return kSuccess;
  }
};

struct LabelCurveCommand {
  DataOptions data;
  MethodOptions method;
  TrialOptions trials;
  std::string per_class_list = "1-20";
  std::string methods = "gf,gfg,llgc,hf";
  std::string out_path;
  std::string svg;

  int execute(std::ostream& out) {
    const auto counts = parse_int_list(per_class_list);
    std::vector<std::string> names;
    {
      std::stringstream ss(methods);
      for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) names.push_back(item);
    }
    require(!names.empty(), "--methods must list at least one method");
    std::vector<MethodConfig> configs;
    for (const auto& name : names) {
      method.method = name;
      configs.push_back(resolve(method));
    }
    const Dataset ds = load_dataset(data);
    for (long long q : counts) {
      require(q >= 1, "--per-class-list entries must be >= 1");
      check_per_class(ds, static_cast<Index>(q));
    }
    for (const auto& c : configs) check_anchors(ds, c);
    const auto seeds = seed_range(trials.first_seed, trials.seeds);

    std::ofstream csv(out_path);
    if (!csv) throw DataError("cannot write '" + out_path + "'");
    csv << "per_class";
    for (const auto& name : names) csv << ',' << name;
    csv << '\n' << std::setprecision(10);
    std::vector<Series> curves;
    for (const auto& name : names) curves.push_back({name, {}, {}});
    for (long long q : counts) {
      csv << q;
      out << "per_class = " << q << ':';
      for (std::size_t mi = 0; mi < configs.size(); ++mi) {
        const auto results = run_trials(ds, configs[mi], static_cast<Index>(q), seeds);
        const TrialSummary s = summarize(results);
        for (const auto& r : results)
          if (!r.ok()) throw NumericError(names[mi] + ", per_class " + std::to_string(q) + ", seed " + std::to_string(r.seed) + ": " + r.error);
        csv << ',' << s.accuracy.mean;
        curves[mi].x.push_back(static_cast<double>(q));
        curves[mi].y.push_back(s.accuracy.mean);
        out << ' ' << names[mi] << ' ' << percent(s.accuracy);
      }
      csv << '\n';
      out << '\n';
    }
    if (!svg.empty()) write_svg(svg, {{"Accuracy vs labels", "labels per class", "accuracy", curves}});
    return kSuccess;
  }
};

struct ToyCommand {
  TwoRingParams ring;
  MethodOptions method;
  Index per_class = 20;
  std::uint64_t split_seed = 0;
  std::string out_path;
  std::string summary;
  std::string svg;

  int execute(std::ostream& out) {
    const Dataset ds = gen_two_ring(ring);
    const MethodConfig cfg = resolve(method);
    require(cfg.params.mu > 0.0, "toy: --mu must be > 0");
    check_per_class(ds, per_class);
    const Laplacian lap = laplacian(build_knn_gaussian(ds, {cfg.k, cfg.bandwidth}));
    const Components comp = connected_components(lap.similarity());
    const LabeledSplit split = sample_split(ds, per_class, split_seed);
    const LabelMatrix y = encode(split, ds.size(), ds.class_count, cfg.encoding);
    const auto original = predict(gf_pinv(lap, y).soft_labels);
    const auto improved = predict(gf_gauss(lap, y, cfg.params.mu, cfg.params.eta).soft_labels);

    // Predicted-class counts inside each connected component.
    auto per_component = [&](const std::vector<ClassId>& pred) {
      ordered_json rows = ordered_json::array();
      for (int c = 1; c <= comp.count; ++c) {
        std::vector<Index> counts(static_cast<std::size_t>(ds.class_count), 0);
        for (std::size_t i = 0; i < pred.size(); ++i)
          if (comp.assignment[i] == c) ++counts[static_cast<std::size_t>(pred[i] - 1)];
        rows.push_back(counts);
      }
      return rows;
    };
    const double acc_gf = accuracy(original, ds.truth, split);
    const double acc_gfg = accuracy(improved, ds.truth, split);

    if (!out_path.empty()) {
      std::ofstream csv(out_path);
      if (!csv) throw DataError("cannot write '" + out_path + "'");
      csv << "sample_index,x,y,true_class,gf_class,gfg_class,labeled\n" << std::setprecision(17);
      const auto mask = split.mask(ds.size());
      for (Index i = 0; i < ds.size(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        csv << i << ',' << ds.features(i, 0) << ',' << ds.features(i, 1) << ',' << ds.truth[u] << ','
            << original[u] << ',' << improved[u] << ',' << (mask[u] ? 1 : 0) << '\n';
      }
    }
    if (!summary.empty()) {
      ordered_json j;
      j["command"] = "toy";
      j["samples"] = ds.size();
      j["components"] = comp.count;
      j["component_sizes"] = comp.sizes;
      j["per_class"] = per_class;
      j["seed"] = split_seed;
      j["params"] = params_json(cfg);
      j["gf"] = {{"accuracy", acc_gf}, {"component_class_counts", per_component(original)}};
      j["gfg"] = {{"accuracy", acc_gfg}, {"component_class_counts", per_component(improved)}};
      write_json(summary, j);
    }
    if (!svg.empty()) {
      std::vector<Panel> panels;
      for (const auto* pred : {&original, &improved}) {
        Panel p{pred == &original ? "Original GF" : "Improved GF", "x", "y", {}};
        for (int c = 1; c <= ds.class_count; ++c) {
          Series s{"class " + std::to_string(c), {}, {}};
          for (Index i = 0; i < ds.size(); ++i)
            if ((*pred)[static_cast<std::size_t>(i)] == c) {
              s.x.push_back(ds.features(i, 0));
              s.y.push_back(ds.features(i, 1));
            }
          p.series.push_back(std::move(s));
        }
        panels.push_back(std::move(p));
      }
      write_svg(svg, panels);
    }
    out << "two-ring: n = " << ds.size() << ", components = " << comp.count << '\n'
        << "  original GF accuracy " << std::fixed << std::setprecision(2) << 100.0 * acc_gf << " %\n"
        << "  improved GF accuracy " << 100.0 * acc_gfg << " %\n";
    return kSuccess;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Green-function semi-supervised classification"};
  app.set_config("--config", "", "TOML/INI file; command-line flags take precedence");
  app.require_subcommand(1);

  BuildGraphCommand build;
  auto* build_cmd = app.add_subcommand("build-graph", "build a kNN Gaussian graph and save it");
  add_data_options(*build_cmd, build.data);
  build_cmd->add_option("--k", build.method.config.k, "neighbors per sample");
  build_cmd->add_option("--bandwidth", build.method.bandwidth, "pairs entering the kernel width")
      ->check(CLI::IsMember({"all-pairs", "knn-edges"}));
  build_cmd->add_option("--out", build.out_path, "graph text file")->required();

  RunCommand run_opts;
  auto* run_cmd = app.add_subcommand("run", "seeded trials of one method");
  add_data_options(*run_cmd, run_opts.data);
  add_method_options(*run_cmd, run_opts.method, true);
  add_trial_options(*run_cmd, run_opts.trials);
  run_cmd->add_option("--ledger", run_opts.ledger, "CSV ledger to append to");
  run_cmd->add_option("--summary", run_opts.summary, "JSON summary of the run");
  run_cmd->add_option("--predictions", run_opts.predictions, "CSV predictions of the first trial");
  run_cmd->add_option("--anchors-out", run_opts.anchors_out, "CSV of the anchors of the first trial");

  BenchAnchorsCommand bench;
  auto* bench_cmd = app.add_subcommand("bench-anchors", "accuracy and solve time versus anchor count");
  add_data_options(*bench_cmd, bench.data);
  add_method_options(*bench_cmd, bench.method, false);
  add_trial_options(*bench_cmd, bench.trials);
  bench_cmd->add_option("--m-list", bench.m_list, "ascending powers of two");
  bench_cmd->add_option("--out", bench.out_path, "CSV table")->required();
  bench_cmd->add_option("--svg", bench.svg, "optional SVG chart");

  LabelCurveCommand curve;
  auto* curve_cmd = app.add_subcommand("label-curve", "accuracy versus labeled samples per class");
  add_data_options(*curve_cmd, curve.data);
  add_method_options(*curve_cmd, curve.method, false);
  add_trial_options(*curve_cmd, curve.trials);
  curve_cmd->add_option("--per-class-list", curve.per_class_list, "e.g. 1-20 or 1,5,10");
  curve_cmd->add_option("--methods", curve.methods, "comma-separated methods");
  curve_cmd->add_option("--out", curve.out_path, "CSV table")->required();
  curve_cmd->add_option("--svg", curve.svg, "optional SVG chart");

  ToyCommand toy;
  auto* toy_cmd = app.add_subcommand("toy", "original versus improved GF on two rings");
  toy_cmd->add_option("--inner", toy.ring.n_inner, "inner ring size");
  toy_cmd->add_option("--outer", toy.ring.n_outer, "outer ring size");
  toy_cmd->add_option("--r-inner", toy.ring.r_inner, "inner radius");
  toy_cmd->add_option("--r-outer", toy.ring.r_outer, "outer radius");
  toy_cmd->add_option("--noise", toy.ring.noise, "radial noise deviation");
  toy_cmd->add_option("--seed", toy.ring.seed, "ring noise seed");
  toy_cmd->add_option("--split-seed", toy.split_seed, "labeled split seed");
  toy_cmd->add_option("--per-class", toy.per_class, "labeled samples per ring")->check(CLI::PositiveNumber);
  add_method_options(*toy_cmd, toy.method, false);
  toy_cmd->add_option("--out", toy.out_path, "CSV of points and both predictions");
  toy_cmd->add_option("--summary", toy.summary, "JSON summary");
  toy_cmd->add_option("--svg", toy.svg, "optional SVG scatter of both predictions");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*build_cmd) return build.execute(out);
    if (*run_cmd) return run_opts.execute(out, err);
    if (*bench_cmd) return bench.execute(out);
    if (*curve_cmd) return curve.execute(out);
    return toy.execute(out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

std::vector<long long> parse_int_list(const std::string& text) {
  std::vector<long long> values;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    item = detail::trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-', 1);
    try {
      std::size_t used = 0;
      if (dash == std::string::npos) {
        values.push_back(std::stoll(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } else {
        const long long lo = std::stoll(item.substr(0, dash));
        const long long hi = std::stoll(item.substr(dash + 1), &used);
        if (used != item.size() - dash - 1 || hi < lo) throw std::invalid_argument(item);
        for (long long v = lo; v <= hi; ++v) values.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("malformed integer list entry '" + item + "'");
    }
  }
  if (values.empty()) throw ConfigError("empty integer list '" + text + "'");
  return values;
}

void write_svg(const std::string& path, const std::vector<Panel>& panels) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  constexpr double w = 420, h = 320, left = 60, right = 20, top = 30, bottom = 45;
  std::ofstream svg(path);
  if (!svg) throw DataError("cannot write '" + path + "'");
  svg << std::setprecision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * static_cast<double>(panels.size())
      << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : panel.series)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]);
        y1 = std::max(y1, s.y[i]);
      }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pw = w - left - right, ph = h - top - bottom;
    auto sx = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
    auto sy = [&](double v) { return top + (1.0 - (v - y0) / (y1 - y0)) * ph; };
    const bool scatter = panel.x_label == "x";

    svg << "<g transform=\"translate(" << w * static_cast<double>(p) << ",0)\">\n";
    svg << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << panel.title << "</text>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"" << top + ph + 14 << "\">" << x0 << "</text>\n";
    svg << "<text x=\"" << left + pw << "\" y=\"" << top + ph + 14 << "\" text-anchor=\"end\">" << x1 << "</text>\n";
    svg << "<text x=\"" << left - 4 << "\" y=\"" << top + ph << "\" text-anchor=\"end\">" << y0 << "</text>\n";
    svg << "<text x=\"" << left - 4 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << y1 << "</text>\n";
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\">" << panel.x_label << "</text>\n";
    svg << "<text transform=\"translate(14," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
        << panel.y_label << "</text>\n";
    for (std::size_t k = 0; k < panel.series.size(); ++k) {
      const Series& s = panel.series[k];
      const char* colour = palette[k % std::size(palette)];
      if (scatter) {
        for (std::size_t i = 0; i < s.x.size(); ++i)
          svg << "<circle cx=\"" << sx(s.x[i]) << "\" cy=\"" << sy(s.y[i]) << "\" r=\"1.5\" fill=\"" << colour << "\"/>\n";
      } else {
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) svg << (i ? " " : "") << sx(s.x[i]) << ',' << sy(s.y[i]);
        svg << "\"/>\n";
      }
      svg << "<text x=\"" << left + 6 << "\" y=\"" << top + 14 + 13 * static_cast<double>(k) << "\" fill=\"" << colour
          << "\">" << s.name << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
}

}  // namespace green_ssl::cli
