#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mmo/algorithms/registry.hpp"
#include "mmo/data.hpp"
#include "mmo/harness/ranking.hpp"
#include "mmo/metrics.hpp"

namespace mmo {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

struct DatasetDescriptor {
  ProblemKind kind = ProblemKind::synthetic_two_ps;
  std::string name;
  fs::path path;
  fs::path reference;  // location only; built and written here when missing
  std::optional<std::size_t> label_column;
};

inline ProblemKind parse_problem_kind(std::string_view s) {
  for (ProblemKind k : {ProblemKind::feature_selection, ProblemKind::location_selection, ProblemKind::synthetic_two_ps}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown dataset kind '" + std::string(s) +
                    "' (expected feature_selection, location_selection or synthetic)");
}

struct ExperimentConfig {
  std::vector<std::string> algorithms;
  std::vector<DatasetDescriptor> datasets;
  std::size_t runs = 21;
  std::size_t population_size = 200;
  std::size_t max_evaluations = 20000;
  std::uint64_t master_seed = 0;
  std::size_t grid_n = 300;
  double test_fraction = 0.30;
  std::size_t knn_k = 5;
  std::size_t folds = 5;

  AlgorithmConfig algorithm_config() const {
    AlgorithmConfig c;
    c.population_size = population_size;
    c.max_evaluations = max_evaluations;
    return c;
  }

  /// Throws NotImplementedError for unknown algorithms, ConfigError otherwise.
  void validate() const {
    if (algorithms.empty()) throw ConfigError("no algorithms configured");
    for (const auto& a : algorithms) require_registered(a);
    if (datasets.empty()) throw ConfigError("no datasets configured");
    if (runs < 1) throw ConfigError("runs must be at least 1");
    if (grid_n < 2) throw ConfigError("grid_n must be at least 2");
    algorithm_config().validate();
    std::set<std::string> names, algs(algorithms.begin(), algorithms.end());
    if (algs.size() != algorithms.size()) throw ConfigError("duplicate algorithm name");
    for (const auto& d : datasets) {
      if (d.name.empty()) throw ConfigError("dataset without a name");
      if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");
      if (d.kind != ProblemKind::synthetic_two_ps && d.path.empty()) {
        throw ConfigError("dataset '" + d.name + "' needs a path");
      }
    }
  }
};

/// Relative dataset paths resolve against `base_dir` (normally the config file's directory).
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const fs::path& base_dir = {}) {
  ExperimentConfig c;
  try {
    c.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    c.runs = j.value("runs", c.runs);
    c.population_size = j.value("population_size", c.population_size);
    c.max_evaluations = j.value("max_evaluations", c.max_evaluations);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.grid_n = j.value("grid_n", c.grid_n);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.knn_k = j.value("k", c.knn_k);
    c.folds = j.value("folds", c.folds);
    auto resolve = [&](const std::string& p) -> fs::path {
      if (p.empty()) return {};
      fs::path path(p);
      return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
    };
    for (const auto& d : j.at("datasets")) {
      DatasetDescriptor desc;
      desc.kind = parse_problem_kind(d.at("kind").get<std::string>());
      desc.path = resolve(d.value("path", std::string{}));
      desc.reference = resolve(d.value("reference", std::string{}));
      if (d.contains("label_column")) desc.label_column = d.at("label_column").get<std::size_t>();
      desc.name = d.value("name", std::string{});
      if (desc.name.empty()) desc.name = desc.path.empty() ? std::string(to_string(desc.kind)) : desc.path.stem().string();
      c.datasets.push_back(std::move(desc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_experiment_config(const fs::path& path) {
  return experiment_config_from_json(detail::read_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Seeds

inline std::uint64_t run_seed(std::uint64_t master, std::string_view algorithm, std::string_view dataset,
                              std::size_t run) {
  std::string label(algorithm);
  label += '\x1f';
  label += dataset;
  return derive_seed(master, label, run);
}

inline std::uint64_t split_seed(std::uint64_t master, std::string_view dataset) {
  return derive_seed(master, std::string("split\x1f") + std::string(dataset));
}

inline std::uint64_t fold_seed(std::uint64_t master, std::string_view dataset) {
  return derive_seed(master, std::string("folds\x1f") + std::string(dataset));
}

// ---------------------------------------------------------------------------
// Datasets ready to run

struct PreparedDataset {
  std::string name;
  ProblemKind kind = ProblemKind::synthetic_two_ps;
  std::shared_ptr<const TabularDataset> train;
  std::shared_ptr<const TabularDataset> test;
  FoldPlan folds;
  std::size_t knn_k = 5;
  std::shared_ptr<const LocationInstance> location;
  std::optional<ReferenceSet> reference;

  /// A fresh problem instance; feature-selection caches are per run.
  AnyProblem make_problem() const {
    switch (kind) {
      case ProblemKind::feature_selection: return FeatureSelectionProblem(train, folds, knn_k);
      case ProblemKind::location_selection: return LocationProblem(location);
      case ProblemKind::synthetic_two_ps: break;
    }
    return SyntheticTwoPsProblem{};
  }
};

inline PreparedDataset prepare_dataset(const DatasetDescriptor& d, const ExperimentConfig& cfg) {
  const std::string ctx = "dataset '" + d.name + "': ";
  PreparedDataset p;
  p.name = d.name;
  p.kind = d.kind;
  p.knn_k = cfg.knn_k;
  try {
    switch (d.kind) {
      case ProblemKind::feature_selection: {
        const auto full = load_tabular_csv(d.path, d.label_column);
        auto split = train_test_split(full, cfg.test_fraction, split_seed(cfg.master_seed, d.name));
        p.train = std::make_shared<const TabularDataset>(std::move(split.train));
        p.test = std::make_shared<const TabularDataset>(std::move(split.test));
        p.folds = FoldPlan::make(p.train->rows, cfg.folds, fold_seed(cfg.master_seed, d.name));
        break;
      }
      case ProblemKind::location_selection: {
        p.location = std::make_shared<const LocationInstance>(load_location_json(d.path));
        if (!d.reference.empty() && fs::exists(d.reference)) {
          p.reference = load_reference_json(d.reference);
        } else {
          p.reference = build_location_reference(*p.location, cfg.grid_n);
          p.reference->dataset = d.name;
          if (!d.reference.empty()) save_reference_json(*p.reference, d.reference);
        }
        break;
      }
      case ProblemKind::synthetic_two_ps:
        p.reference = synthetic_reference();
        break;
    }
  } catch (const LoadError& e) {
    throw LoadError(e.kind(), ctx + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(ctx + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + e.what());
  } catch (const fs::filesystem_error& e) {
    throw ConfigError(ctx + e.what());
  }
  return p;
}

/// Feature selection: 1/HV and equivalent subsets; location: IGDX and IGD;
/// synthetic: IGDX, IGD and 1/HV.
inline MetricReport compute_metrics(const PreparedDataset& d, const Population& archive) {
  MetricReport m;
  switch (d.kind) {
    case ProblemKind::feature_selection:
      m.inv_hv = inv_hv(archive);
      m.equivalent_count = equivalent_subset_count(archive);
      break;
    case ProblemKind::location_selection:
      m.igdx = igdx(archive, *d.reference);
      m.igd = igd(archive, *d.reference);
      break;
    case ProblemKind::synthetic_two_ps:
      m.igdx = igdx(archive, *d.reference);
      m.igd = igd(archive, *d.reference);
      m.inv_hv = inv_hv(archive);
      break;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Records

struct RunRecord {
  std::string algorithm;
  std::string dataset;
  std::string kind;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t evaluations_used = 0;
  std::size_t generations = 0;
  std::size_t min_population = 0;
  std::size_t max_population = 0;
  double wall_time = 0.0;
  MetricReport metrics;
  Population archive;
};

namespace detail {

inline nlohmann::json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

inline double real_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
    throw SchemaError("unexpected numeric string '" + s + "'");
  }
  return j.get<double>();
}

inline nlohmann::json reals_to_json(const std::vector<double>& v) {
  auto out = nlohmann::json::array();
  for (double x : v) out.push_back(real_to_json(x));
  return out;
}

inline std::vector<double> reals_from_json(const nlohmann::json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(real_from_json(x));
  return v;
}

}  // namespace detail

inline nlohmann::json metrics_to_json(const MetricReport& m) {
  auto j = nlohmann::json::object();
  if (m.inv_hv) j["inv_hv"] = detail::real_to_json(*m.inv_hv);
  if (m.equivalent_count) j["equiv_count"] = *m.equivalent_count;
  if (m.igdx) j["igdx"] = detail::real_to_json(*m.igdx);
  if (m.igd) j["igd"] = detail::real_to_json(*m.igd);
  return j;
}

inline nlohmann::json record_to_json(const RunRecord& r) {
  nlohmann::json j;
  j["algorithm"] = r.algorithm;
  j["dataset"] = r.dataset;
  j["kind"] = r.kind;
  j["run"] = r.run;
  j["seed"] = r.seed;
  j["evaluations_used"] = r.evaluations_used;
  j["generations"] = r.generations;
  j["population"] = {{"min", r.min_population}, {"max", r.max_population}};
  j["wall_time_s"] = r.wall_time;
  j["metrics"] = metrics_to_json(r.metrics);
  auto arch = nlohmann::json::array();
  for (const auto& s : r.archive) {
    arch.push_back({{"x", detail::reals_to_json(s.decision)},
                    {"f", detail::reals_to_json(s.objectives)},
                    {"aux", detail::reals_to_json(s.aux)}});
  }
  j["archive"] = std::move(arch);
  return j;
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  RunRecord r;
  try {
    r.algorithm = j.at("algorithm").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.kind = j.value("kind", std::string{});
    r.run = j.at("run").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.evaluations_used = j.at("evaluations_used").get<std::size_t>();
    r.generations = j.value("generations", std::size_t{0});
    if (j.contains("population")) {
      r.min_population = j["population"].value("min", std::size_t{0});
      r.max_population = j["population"].value("max", std::size_t{0});
    }
    r.wall_time = j.value("wall_time_s", 0.0);
    const auto& m = j.at("metrics");
    if (m.contains("inv_hv")) r.metrics.inv_hv = detail::real_from_json(m["inv_hv"]);
    if (m.contains("equiv_count")) r.metrics.equivalent_count = m["equiv_count"].get<std::size_t>();
    if (m.contains("igdx")) r.metrics.igdx = detail::real_from_json(m["igdx"]);
    if (m.contains("igd")) r.metrics.igd = detail::real_from_json(m["igd"]);
    for (const auto& s : j.at("archive")) {
      Solution sol;
      sol.decision = detail::reals_from_json(s.at("x"));
      sol.objectives = detail::reals_from_json(s.at("f"));
      if (s.contains("aux")) sol.aux = detail::reals_from_json(s["aux"]);
      r.archive.push_back(std::move(sol));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("run record: ") + e.what());
  }
  return r;
}

inline std::string record_file_name(const RunRecord& r) {
  auto clean = [](std::string s) {
    for (auto& c : s) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
    }
    return s;
  };
  char run[16];
  std::snprintf(run, sizeof run, "%03zu", r.run);
  return clean(r.dataset) + "__" + clean(r.algorithm) + "__r" + run + ".json";
}

// ---------------------------------------------------------------------------
// Orchestration

struct ExperimentOptions {
  std::optional<fs::path> out_dir;  // records/, references/ and manifest.json
  std::size_t workers = 1;
  std::function<void(const RunRecord&)> on_record;  // called under a lock
};

inline RunRecord execute_run(const PreparedDataset& d, std::string_view algorithm, std::size_t run,
                             const ExperimentConfig& cfg) {
  const auto problem = d.make_problem();
  const std::uint64_t seed = run_seed(cfg.master_seed, algorithm, d.name, run);
  auto res = run_algorithm(algorithm, problem, cfg.algorithm_config(), seed);
  RunRecord r;
  r.algorithm = std::string(algorithm);
  r.dataset = d.name;
  r.kind = std::string(to_string(d.kind));
  r.run = run;
  r.seed = seed;
  r.evaluations_used = res.evaluations_used;
  r.generations = res.generations;
  r.min_population = res.min_population;
  r.max_population = res.max_population;
  r.wall_time = res.wall_time;
  r.metrics = compute_metrics(d, res.final_archive);
  r.archive = std::move(res.final_archive);
  return r;
}

/// Runs |algorithms| x |datasets| x runs independent runs on a worker pool.
/// Records come back ordered by dataset, algorithm, run; with an output
/// directory each record is written to its own file as soon as it completes.
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const ExperimentOptions& opt = {}) {
  cfg.validate();
  std::vector<DatasetDescriptor> descs = cfg.datasets;
  if (opt.out_dir) {
    for (auto& d : descs) {
      if (d.kind == ProblemKind::location_selection && d.reference.empty()) {
        d.reference = *opt.out_dir / "references" / (d.name + ".json");
      }
    }
  }
  std::vector<PreparedDataset> prepared;
  for (const auto& d : descs) prepared.push_back(prepare_dataset(d, cfg));

  struct Task {
    std::size_t dataset, algorithm, run;
  };
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < prepared.size(); ++d) {
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
      for (std::size_t r = 0; r < cfg.runs; ++r) tasks.push_back({d, a, r});
    }
  }

  if (opt.out_dir) {
    nlohmann::json manifest;
    manifest["algorithms"] = cfg.algorithms;
    auto ds = nlohmann::json::array();
    for (const auto& p : prepared) ds.push_back({{"name", p.name}, {"kind", std::string(to_string(p.kind))}});
    manifest["datasets"] = std::move(ds);
    manifest["runs"] = cfg.runs;
    manifest["population_size"] = cfg.population_size;
    manifest["max_evaluations"] = cfg.max_evaluations;
    manifest["master_seed"] = cfg.master_seed;
    fs::create_directories(*opt.out_dir / "records");
    detail::write_text_atomically(*opt.out_dir / "manifest.json", manifest.dump(2) + "\n");
  }

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      try {
        const auto& task = tasks[t];
        RunRecord rec = execute_run(prepared[task.dataset], cfg.algorithms[task.algorithm], task.run, cfg);
        if (opt.out_dir) {
          detail::write_text_atomically(*opt.out_dir / "records" / record_file_name(rec), record_to_json(rec).dump() + "\n");
        }
        std::lock_guard lock(mu);
        if (opt.on_record) opt.on_record(rec);
        records[t] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(opt.workers, 1, std::max<std::size_t>(tasks.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return records;
}

// ---------------------------------------------------------------------------
// Persisted records

struct RecordSet {
  std::vector<RunRecord> records;
  std::vector<std::string> algorithm_order;
  std::vector<std::string> dataset_order;
};

/// Accepts an experiment directory (with records/ and manifest.json) or the
/// records directory itself. Files are read in name order.
inline RecordSet load_records(const fs::path& dir) {
  fs::path rec_dir = fs::is_directory(dir / "records") ? dir / "records" : dir;
  if (!fs::is_directory(rec_dir)) throw LoadError(LoadError::Kind::missing_file, "no records directory at " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(rec_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "manifest.json") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  RecordSet set;
  for (const auto& f : files) {
    try {
      set.records.push_back(record_from_json(detail::read_json_file(f)));
    } catch (const SchemaError& e) {
      throw SchemaError(f.string() + ": " + e.what());
    }
  }
  if (set.records.empty()) throw LoadError(LoadError::Kind::empty, "no run records in " + rec_dir.string());
  for (const fs::path& m : {rec_dir / "manifest.json", rec_dir.parent_path() / "manifest.json"}) {
    if (!fs::exists(m)) continue;
    const auto j = detail::read_json_file(m);
    set.algorithm_order = j.value("algorithms", std::vector<std::string>{});
    for (const auto& d : j.value("datasets", nlohmann::json::array())) set.dataset_order.push_back(d.value("name", ""));
    break;
  }
  return set;
}

// ---------------------------------------------------------------------------
// Tables

struct MetricSpec {
  std::string name;
  Direction direction;
  Rounding rounding;
};

/// inv_hv: 2 decimals, smaller is better; igdx/igd: 3 significant digits,
/// smaller is better; equiv_count: integers, larger is better.
inline MetricSpec metric_spec(std::string_view name) {
  if (name == "inv_hv") return {"inv_hv", Direction::minimize, Rounding::decimals(2)};
  if (name == "equiv_count") return {"equiv_count", Direction::maximize, Rounding::decimals(0)};
  if (name == "igdx") return {"igdx", Direction::minimize, Rounding::significant(3)};
  if (name == "igd") return {"igd", Direction::minimize, Rounding::significant(3)};
  throw ConfigError("unknown metric '" + std::string(name) + "' (expected inv_hv, equiv_count, igdx or igd)");
}

inline std::optional<double> metric_value(const MetricReport& m, std::string_view name) {
  if (name == "inv_hv") return m.inv_hv;
  if (name == "equiv_count") {
    if (m.equivalent_count) return static_cast<double>(*m.equivalent_count);
    return std::nullopt;
  }
  if (name == "igdx") return m.igdx;
  if (name == "igd") return m.igd;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

/// Table over the datasets that report `metric`. Every algorithm present in
/// the records must have at least one record on each of those datasets.
inline RankTable table_for_metric(const std::vector<RunRecord>& records, std::string_view metric,
                                  const std::vector<std::string>& algorithm_order = {},
                                  const std::vector<std::string>& dataset_order = {}) {
  const auto spec = metric_spec(metric);
  std::vector<Observation> obs;
  std::set<std::string> algorithms, with_metric;
  for (const auto& r : records) {
    algorithms.insert(r.algorithm);
    if (auto v = metric_value(r.metrics, metric)) {
      obs.push_back({r.algorithm, r.dataset, *v});
      with_metric.insert(r.dataset);
    }
  }
  if (obs.empty()) throw AggregationError("no records report metric '" + spec.name + "'");
  for (const auto& d : with_metric) {
    for (const auto& a : algorithms) {
      const bool present = std::any_of(obs.begin(), obs.end(), [&](const Observation& o) {
        return o.dataset == d && o.algorithm == a;
      });
      if (!present) {
        throw AggregationError("metric '" + spec.name + "': no records for algorithm '" + a + "' on dataset '" + d + "'");
      }
    }
  }
  return aggregate_rank_table(obs, spec.name, spec.direction, spec.rounding, algorithm_order, dataset_order);
}

// ---------------------------------------------------------------------------
// Baselines

/// Non-dominated subset of `samples` uniform random decisions, evaluated
/// outside any budget.
template <MultiobjectiveProblem P>
Population random_sampling_archive(const P& problem, std::size_t samples, std::uint64_t seed) {
  RandomStream rng(seed);
  Population pop;
  pop.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    auto x = detail::random_decision(problem, rng);
    auto ev = problem.evaluate(x);
    pop.push_back({std::move(x), std::move(ev.objectives), std::move(ev.aux)});
  }
  return non_dominated_filter(pop);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw ContractViolation("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Median IGDX of `runs` random-sampling archives of `samples` points each.
template <MultiobjectiveProblem P>
double random_sampling_igdx_median(const P& problem, const ReferenceSet& ref, std::size_t samples, std::size_t runs,
                                   std::uint64_t master_seed) {
  std::vector<double> vals;
  for (std::size_t r = 0; r < runs; ++r) {
    vals.push_back(igdx(random_sampling_archive(problem, samples, derive_seed(master_seed, "random_sampling", r)), ref));
  }
  return median(std::move(vals));
}

}  // namespace mmo
