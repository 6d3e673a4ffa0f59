// Command-line front end: run experiments, generate location instances,
// build reference sets and render ranking tables.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mmo/harness/experiment.hpp"

namespace {

std::array<std::size_t, 4> parse_counts(const std::string& s) {
  std::array<std::size_t, 4> out{};
  std::stringstream ss(s);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i == 4) throw mmo::ConfigError("--counts takes exactly four values P,M,S,U");
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      throw mmo::ConfigError("--counts: '" + item + "' is not an integer");
    }
    if (pos != item.size() || v < 1) throw mmo::ConfigError("--counts: every count must be a positive integer");
    out[i++] = static_cast<std::size_t>(v);
  }
  if (i != 4) throw mmo::ConfigError("--counts takes exactly four values P,M,S,U");
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, std::size_t workers, bool quiet) {
  const auto cfg = mmo::load_experiment_config(config_path);
  mmo::ExperimentOptions opt;
  opt.out_dir = out_dir;
  opt.workers = workers;
  const std::size_t total = cfg.algorithms.size() * cfg.datasets.size() * cfg.runs;
  std::size_t done = 0;
  if (!quiet) {
    opt.on_record = [&](const mmo::RunRecord& r) {
      ++done;
      std::fprintf(stderr, "[%zu/%zu] %s on %s run %zu: %zu evaluations, %.2fs\n", done, total, r.algorithm.c_str(),
                   r.dataset.c_str(), r.run, r.evaluations_used, r.wall_time);
    };
  }
  const auto records = mmo::run_experiment(cfg, opt);
  if (!quiet) std::fprintf(stderr, "wrote %zu records to %s\n", records.size(), out_dir.c_str());
  return 0;
}

int cmd_gen_location(std::string name, const std::string& counts, const std::string& district, std::uint64_t seed,
                     double radius, const std::string& out) {
  mmo::LocationDatasetSpec spec;
  if (!district.empty()) {
    const auto preset = mmo::find_district_preset(district);
    if (!preset) throw mmo::ConfigError("unknown district '" + district + "'");
    spec.counts = preset->counts;
    if (name.empty()) name = std::string(preset->id);
  }
  if (!counts.empty()) spec.counts = parse_counts(counts);
  if (spec.counts[0] == 0) throw mmo::ConfigError("give --counts or --district");
  spec.name = name.empty() ? std::filesystem::path(out).stem().string() : name;
  spec.seed = seed;
  spec.radius = radius;
  mmo::save_location_json(mmo::generate_location_dataset(spec), out);
  return 0;
}

int cmd_reference(const std::string& dataset, std::size_t grid, const std::string& out) {
  const auto inst = mmo::load_location_json(dataset);
  auto ref = mmo::build_location_reference(inst, grid);
  ref.dataset = inst.name;
  mmo::save_reference_json(ref, out);
  std::fprintf(stderr, "%zu reference points\n", ref.s_dec.size());
  return 0;
}

int cmd_table(const std::string& records_dir, const std::string& metric, const std::string& format,
              const std::string& out) {
  const auto set = mmo::load_records(records_dir);
  const auto table = mmo::table_for_metric(set.records, metric, set.algorithm_order, set.dataset_order);
  const auto text = mmo::render_table(table, format == "csv" ? mmo::TableFormat::csv : mmo::TableFormat::markdown);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    mmo::detail::write_text_atomically(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal multiobjective optimization experiments"};
  app.require_subcommand(1);

  std::string config, out_dir;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory for records")->required();
  run->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_flag("--quiet", quiet, "No progress output");

  std::string name, counts, district, gen_out;
  std::uint64_t seed = 1;
  double radius = mmo::kDefaultRadius;
  auto* gen = app.add_subcommand("gen-location", "Generate a location instance with uniform facilities");
  gen->add_option("--name", name, "Instance name");
  gen->add_option("--counts", counts, "Facility counts P,M,S,U (primary, middle, shopping, subway)");
  gen->add_option("--district", district, "Preset counts: LS-D1..LS-D4 or tianhe, haizhu, yuexiu, panyu");
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--radius", radius, "Region radius in meters")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output JSON file")->required();

  std::string ref_dataset, ref_out;
  std::size_t grid = 300;
  auto* ref = app.add_subcommand("reference", "Build the grid reference set of a location instance");
  ref->add_option("--dataset", ref_dataset, "Location instance (JSON)")->required()->check(CLI::ExistingFile);
  ref->add_option("--grid", grid, "Lattice points per axis")->check(CLI::Range(2, 100000));
  ref->add_option("--out", ref_out, "Output JSON file")->required();

  std::string records_dir, metric, format = "markdown", table_out;
  auto* table = app.add_subcommand("table", "Aggregate run records into a ranking table");
  table->add_option("--records", records_dir, "Experiment or records directory")->required();
  table->add_option("--metric", metric, "Metric")
      ->required()
      ->check(CLI::IsMember({"inv_hv", "equiv_count", "igdx", "igd"}));
  table->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "markdown"}));
  table->add_option("--out", table_out, "Output file ('-' for stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, out_dir, workers, quiet);
    if (*gen) return cmd_gen_location(name, counts, district, seed, radius, gen_out);
    if (*ref) return cmd_reference(ref_dataset, grid, ref_out);
    if (*table) return cmd_table(records_dir, metric, format, table_out);
  } catch (const mmo::NotImplementedError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
