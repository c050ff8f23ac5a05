// nvmfp: command-line front end for the NVM latency fingerprinting toolkit.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "nvmfp/chipsim.hpp"
#include "nvmfp/classifiers.hpp"
#include "nvmfp/detector.hpp"
#include "nvmfp/error.hpp"
#include "nvmfp/parallel.hpp"
#include "nvmfp/protocol.hpp"
#include "nvmfp/text_io.hpp"
#include "options.hpp"

namespace fs = std::filesystem;
using namespace nvmfp;
using namespace nvmfp::cli;

namespace {

struct Globals {
  std::size_t jobs = 0;
  std::string out_dir;
};

fs::path output_dir(const Globals& g) {
  fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_out(const fs::path& p, const std::string& content) {
  text::write_file_atomic(p, content);
  std::cerr << "wrote " << p.string() << '\n';
}

void write_manifest(const CLI::App& app, const CLI::App& sub, const fs::path& artifact) {
  write_out(with_suffix(artifact, "", ".manifest"), manifest_text(app, sub));
}

// ---------------------------------------------------------------------------

struct CatalogCmd {
  std::string catalog = "builtin";
  std::string output;

  void run(const Globals& g) const {
    const auto specs = load_catalog(catalog);
    const std::string text = format_catalog(specs);
    if (output.empty()) std::cout << text;
    else write_out(resolve_output(output_dir(g), output), text);
  }
};

struct SimulateCmd {
  std::string catalog = "builtin";
  int class_tag = -1;
  std::uint64_t seed = 0;
  std::uint32_t addr = 0;
  std::uint64_t cycles = 0;
  bool stats = false;
  std::uint32_t chips = 2;
  std::uint32_t locations = 5;
  std::vector<std::uint64_t> stats_checkpoints = {1000, 6000, 16000, 36000};
  std::uint32_t span = 50;
  std::string output;

  void run(const Globals& g, const CLI::App& app, const CLI::App& sub) const {
    const auto specs = load_catalog(catalog);
    const fs::path dir = output_dir(g);
    if (stats) {
      StatsParams p;
      p.seed = seed;
      p.chips = chips;
      p.locations = locations;
      p.checkpoints = stats_checkpoints;
      p.span = span;
      std::vector<ChipClassSpec> chosen = specs;
      if (class_tag >= 0) chosen = {find_class(specs, class_tag)};
      const fs::path out = resolve_output(dir, output.empty() ? "latency_stats.csv" : output);
      write_out(out, format_stats_csv(latency_stats(chosen, p)));
      write_manifest(app, sub, out);
      return;
    }
    if (class_tag < 0) throw ValidationError("--class is required unless --stats is given");
    if (cycles < 1) throw ValidationError("--cycles must be >= 1");
    const auto trace = collect_trace(find_class(specs, class_tag), seed, addr, cycles);
    const fs::path out = resolve_output(
        dir, output.empty() ? "trace_class" + std::to_string(class_tag) + "_seed" + std::to_string(seed) + ".csv"
                            : output);
    write_out(out, format_trace_csv(trace));
    write_manifest(app, sub, out);
  }
};

struct DatasetCmd {
  std::string catalog = "builtin";
  std::uint64_t seed = 0;
  std::uint32_t chips_per_class = 3;
  std::uint32_t locations = 12;
  std::vector<std::uint64_t> checkpoints = {0, 1000, 5000, 10000, 15000, 30000, 50000};
  std::uint32_t group = 100;
  double split_fraction = 0.0;
  std::string output = "dataset.csv";

  void run(const Globals& g, const CLI::App& app, const CLI::App& sub) const {
    DatasetParams p;
    p.seed = seed;
    p.chips_per_class = chips_per_class;
    p.locations_per_chip = locations;
    p.checkpoints = checkpoints;
    p.group = group;
    const Dataset ds = build_dataset(load_catalog(catalog), p);
    const fs::path out = resolve_output(output_dir(g), output);
    write_out(out, format_dataset_csv(ds));
    if (split_fraction > 0.0) {
      const auto [train, test] = split(ds, split_fraction, seed);
      write_out(with_suffix(out, "_train", ".csv"), format_dataset_csv(train));
      write_out(with_suffix(out, "_test", ".csv"), format_dataset_csv(test));
    }
    write_manifest(app, sub, out);
    std::cout << ds.size() << " samples, " << ds.classes().size() << " classes, " << ds.arity() << " features\n";
  }
};

struct TrainCmd {
  std::string train;
  PipelineOptions pipe;
  std::string output = "model.txt";

  void run(const Globals& g, const CLI::App& app, const CLI::App& sub) const {
    const Dataset ds = load_dataset(train, std::nullopt);
    TrainTiming t;
    const TrainedModel model = train_model(ds, make_config(pipe), &t);
    const fs::path out = resolve_output(output_dir(g), output);
    write_out(out, format_model(model));
    write_manifest(app, sub, out);
    std::cout << "trained " << to_string(model.kind) << " on " << ds.size() << " samples, " << model.model_arity()
              << " features (selection " << text::fixed(t.select_s, 4) << " s, training " << text::fixed(t.train_s, 4)
              << " s)\n";
  }
};

struct EvalCmd {
  std::string model;
  std::string test;
  std::string output = "report";

  void run(const Globals& g) const {
    const TrainedModel m = load_model(model);
    const Dataset ds = load_dataset(test, std::nullopt);
    const EvalReport r = evaluate(m, ds);
    const fs::path base = resolve_output(output_dir(g), output);
    write_out(with_suffix(base, "", ".txt"), format_report_text(r));
    write_out(with_suffix(base, "", ".csv"), format_report_csv(r));
    std::cout << format_report_text(r) << '\n' << table_row_header() << '\n' << format_table_row(r) << '\n';
  }
};

struct CrossvalCmd {
  std::string data;
  PipelineOptions pipe;
  int folds = 8;
  std::uint64_t seed = 1;
  std::string output = "crossval.csv";

  void run(const Globals& g, const CLI::App& app, const CLI::App& sub) const {
    const Dataset ds = load_dataset(data, std::nullopt);
    std::ostringstream csv;
    csv << "model,selector,num_features,hyperparameters,mean_accuracy";
    for (int f = 0; f < folds; ++f) csv << ",fold" << f + 1;
    csv << '\n';
    for (const PipelineConfig& config : expand_grid(pipe)) {
      const auto cv = cross_validate(config, ds, folds, seed);
      const std::size_t nf = config.selector == SelectorKind::None ? ds.arity() : config.select_k;
      csv << to_string(config.kind) << ',' << to_string(config.selector) << ',' << nf << ','
          << describe_hyperparameters(config) << ',' << text::fixed(cv.mean_accuracy, 6);
      for (double a : cv.fold_accuracy) csv << ',' << text::fixed(a, 6);
      csv << '\n';
      std::cout << to_string(config.kind) << ' ' << describe_hyperparameters(config)
                << "  mean accuracy " << text::fixed(100.0 * cv.mean_accuracy, 2) << "%\n";
    }
    const fs::path out = resolve_output(output_dir(g), output);
    write_out(out, csv.str());
    write_manifest(app, sub, out);
  }
};

struct SweepCmd {
  std::string train;
  std::string test;
  PipelineOptions pipe;
  std::string output = "sweep.csv";

  void run(const Globals& g, const CLI::App& app, const CLI::App& sub) const {
    const Dataset tr = load_dataset(train, std::nullopt);
    const Dataset te = load_dataset(test, std::nullopt);
    const fs::path out = resolve_output(output_dir(g), output);
    std::ostringstream table;
    table << table_row_header() << '\n';
    for (const char* sel : {"none", "mrmr", "nca"}) {
      PipelineOptions o = pipe;
      o.selector = sel;
      std::optional<FeatureRanking> ranking;
      double select_s = 0.0;
      for (const char* kind : {"tree", "knn", "svm"}) {
        o.model = kind;
        const PipelineConfig config = make_config(o);
        // The ranking does not depend on the classifier, so it is computed once per selector.
        if (config.selector != SelectorKind::None && !ranking) {
          const auto start = std::chrono::steady_clock::now();
          ranking = run_selection(tr, config);
          select_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        TrainTiming t;
        const TrainedModel m = ranking ? train_model_with_selection(tr, config, *ranking, &t)
                                       : train_model(tr, config, &t);
        EvalReport r = evaluate(m, te);
        r.select_time_s = select_s;
        r.train_time_s = t.train_s;
        table << format_table_row(r) << '\n';
        write_out(with_suffix(out, std::string("_") + kind + "_" + sel, ".csv"), format_report_csv(r));
        std::cout << format_table_row(r) << std::endl;
      }
    }
    write_out(out, table.str());
    write_manifest(app, sub, out);
  }
};

struct PredictCmd {
  std::string model;
  std::string probe;
  std::string catalog = "builtin";
  std::string baseline = "catalog";
  std::uint64_t stats_seed = 1;
  double fresh_max = 1.1;
  double used_min = 1.3;
  std::string output = "detection";

  void run(const Globals& g) const {
    const TrainedModel m = load_model(model);
    const auto values = load_probe(probe);
    const auto specs = load_catalog(catalog);
    DetectionReport report;
    report.identification = identify_manufacturer(values, m);
    report.has_identification = true;
    BaselineTable table;
    if (baseline == "catalog") {
      table = fresh_baseline_from_catalog(specs);
    } else {
      StatsParams p;
      p.seed = stats_seed;
      p.checkpoints = {0};
      table = fresh_baseline_from_stats(latency_stats(specs, p));
    }
    report.recycle = detect_recycled(values, report.identification.class_tag, table, {fresh_max, used_min});
    report.has_recycle = true;
    const fs::path base = resolve_output(output_dir(g), output);
    write_out(with_suffix(base, "", ".txt"), format_detection_text(report));
    write_out(with_suffix(base, "", ".csv"), format_detection_csv(report));
    std::cout << format_detection_text(report);
  }
};

struct ScanCmd {
  std::string map;
  std::string catalog = "builtin";
  int class_tag = -1;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> spots = kDefaultUsedSpotCycles;
  double flag_ratio = 1.5;
  std::string output = "scan";

  void run(const Globals& g, const CLI::App& app, const CLI::App& sub) const {
    const fs::path base = resolve_output(output_dir(g), output);
    SpatialLatencyMap m;
    if (!map.empty()) {
      m = load_map(map);
    } else {
      if (class_tag < 0) throw ValidationError("give either --map or --class to scan a simulated chip");
      UsedChipScenario sc = simulate_used_chip(find_class(load_catalog(catalog), class_tag), seed, spots);
      m = sc.chip.full_chip_scan();
      m.class_tag = class_tag;
      std::ostringstream truth;
      truth << "addr,cycles,true_elevation\n";
      for (const auto& s : sc.spots) truth << s.addr << ',' << s.cycles << ',' << text::fixed(s.true_elevation, 6) << '\n';
      write_out(with_suffix(base, "_map", ".csv"), format_map_csv(m));
      write_out(with_suffix(base, "_truth", ".csv"), truth.str());
      write_manifest(app, sub, base);
    }
    DetectionReport report;
    report.flag_ratio = flag_ratio;
    report.map_size = m.latencies.size();
    report.used_regions = locate_used_regions(m, flag_ratio);
    write_out(with_suffix(base, "", ".txt"), format_detection_text(report));
    write_out(with_suffix(base, "", ".csv"), format_detection_csv(report));
    std::cout << format_detection_text(report);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("NVM chip forensics: latency fingerprinting, recycled-chip and used-location detection", "nvmfp");
  app.set_version_flag("--version", "nvmfp 0.1.0");
  app.set_config("--config", "", "Read option values from an INI/TOML file (command-line flags take precedence)");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Globals g;
  if (const char* env = std::getenv("NVMFP_OUT_DIR")) g.out_dir = env;
  app.add_option("-j,--jobs", g.jobs, "Worker threads (0 = one per core)");
  app.add_option("--out-dir", g.out_dir, "Directory for relative output paths (default: $NVMFP_OUT_DIR or .)");

  CatalogCmd catalog;
  auto* c_catalog = app.add_subcommand("catalog", "Print or save the chip-class catalog");
  c_catalog->add_option("--catalog", catalog.catalog, "'builtin' or a catalog CSV file");
  c_catalog->add_option("-o,--output", catalog.output, "Output file (default: stdout)");

  SimulateCmd sim;
  auto* c_sim = app.add_subcommand("simulate", "Cycle one location and write its latency trace, or window statistics");
  c_sim->add_option("--catalog", sim.catalog, "'builtin' or a catalog CSV file");
  c_sim->add_option("--class", sim.class_tag, "Chip class tag");
  c_sim->add_option("--seed", sim.seed, "Chip seed")->required();
  c_sim->add_option("--addr", sim.addr, "Location address");
  c_sim->add_option("--cycles", sim.cycles, "Number of program/erase cycles to record");
  c_sim->add_flag("--stats", sim.stats, "Write BEFORE/AFTER window statistics instead of a trace");
  c_sim->add_option("--chips", sim.chips, "Chips per class (--stats)");
  c_sim->add_option("--locations", sim.locations, "Locations per chip (--stats)");
  c_sim->add_option("--checkpoints", sim.stats_checkpoints, "Window checkpoints (--stats)")->delimiter(',');
  c_sim->add_option("--span", sim.span, "Cycles per window (--stats)");
  c_sim->add_option("-o,--output", sim.output, "Output CSV");

  DatasetCmd dataset;
  auto* c_ds = app.add_subcommand("dataset", "Build a labelled 100-feature dataset and its manifest");
  c_ds->add_option("--catalog", dataset.catalog, "'builtin' or a catalog CSV file");
  c_ds->add_option("--seed", dataset.seed, "Root seed")->required();
  c_ds->add_option("--chips-per-class", dataset.chips_per_class, "Chips per class");
  c_ds->add_option("--locations", dataset.locations, "Random locations per chip");
  c_ds->add_option("--checkpoints", dataset.checkpoints, "Wear checkpoints")->delimiter(',');
  c_ds->add_option("--group", dataset.group, "Consecutive latencies per sample");
  c_ds->add_option("--split", dataset.split_fraction, "Also write stratified train/test files (train fraction, 0 = off)")
      ->check(CLI::Range(0.0, 1.0));
  c_ds->add_option("-o,--output", dataset.output, "Dataset CSV");

  TrainCmd train;
  auto* c_train = app.add_subcommand("train", "Train a model (optional feature selection) and save it");
  c_train->add_option("--train", train.train, "Training dataset CSV")->required();
  add_pipeline_options(c_train, train.pipe, true, false);
  c_train->add_option("-o,--output", train.output, "Model file");

  EvalCmd eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a saved model on a test set");
  c_eval->add_option("--model", eval.model, "Model file")->required();
  c_eval->add_option("--test", eval.test, "Test dataset CSV")->required();
  c_eval->add_option("-o,--output", eval.output, "Report path prefix (.txt and .csv are written)");

  CrossvalCmd cv;
  auto* c_cv = app.add_subcommand("crossval", "Stratified k-fold cross-validation over a hyperparameter grid");
  c_cv->add_option("--data", cv.data, "Dataset CSV")->required();
  add_pipeline_options(c_cv, cv.pipe, true, true);
  c_cv->add_option("--folds", cv.folds, "Number of folds")->check(CLI::Range(2, 1 << 20));
  c_cv->add_option("--seed", cv.seed, "Fold assignment seed");
  c_cv->add_option("-o,--output", cv.output, "CV table CSV");

  SweepCmd sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Train and evaluate all 3 classifiers x {none, mrmr, nca}");
  c_sweep->add_option("--train", sweep.train, "Training dataset CSV")->required();
  c_sweep->add_option("--test", sweep.test, "Test dataset CSV")->required();
  add_pipeline_options(c_sweep, sweep.pipe, false, false);
  c_sweep->add_option("-o,--output", sweep.output, "Table CSV; per-cell reports are written next to it");

  PredictCmd pred;
  auto* c_pred = app.add_subcommand("predict", "Identify the chip class of a 100-cycle probe and check for recycling");
  c_pred->add_option("--model", pred.model, "Model file")->required();
  c_pred->add_option("--probe", pred.probe, "Probe CSV (cycle,latency_us or latency_us)")->required();
  c_pred->add_option("--catalog", pred.catalog, "Catalog supplying fresh baselines");
  c_pred->add_option("--baseline", pred.baseline, "Fresh baseline source: catalog or stats")
      ->check(CLI::IsMember({"catalog", "stats"}));
  c_pred->add_option("--stats-seed", pred.stats_seed, "Seed for simulated fresh statistics (--baseline stats)");
  c_pred->add_option("--fresh-max", pred.fresh_max, "Elevation ratio at or below which a probe is FRESH");
  c_pred->add_option("--used-min", pred.used_min, "Elevation ratio at or above which a probe is USED");
  c_pred->add_option("-o,--output", pred.output, "Report path prefix");

  ScanCmd scan;
  auto* c_scan = app.add_subcommand("scan", "Locate used regions in a spatial latency map");
  c_scan->add_option("--map", scan.map, "Map CSV (addr,latency_us)");
  c_scan->add_option("--catalog", scan.catalog, "'builtin' or a catalog CSV file");
  c_scan->add_option("--class", scan.class_tag, "Simulate a chip of this class instead of reading --map");
  c_scan->add_option("--seed", scan.seed, "Chip seed for the simulated chip");
  c_scan->add_option("--spots", scan.spots, "Cycle counts of the artificially used locations")->delimiter(',');
  c_scan->add_option("--flag-ratio", scan.flag_ratio, "Flag addresses at or above this multiple of the median");
  c_scan->add_option("-o,--output", scan.output, "Report path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    set_max_jobs(g.jobs);
    if (c_catalog->parsed()) catalog.run(g);
    else if (c_sim->parsed()) sim.run(g, app, *c_sim);
    else if (c_ds->parsed()) dataset.run(g, app, *c_ds);
    else if (c_train->parsed()) train.run(g, app, *c_train);
    else if (c_eval->parsed()) eval.run(g);
    else if (c_cv->parsed()) cv.run(g, app, *c_cv);
    else if (c_sweep->parsed()) sweep.run(g, app, *c_sweep);
    else if (c_pred->parsed()) pred.run(g);
    else if (c_scan->parsed()) scan.run(g, app, *c_scan);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
