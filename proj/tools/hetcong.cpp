// Batch front end: ingest, synth, label, train, eval, predict, heatmap, graph-stats.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetcong/config.hpp"
#include "hetcong/error.hpp"
#include "hetcong/features.hpp"
#include "hetcong/heatmap.hpp"
#include "hetcong/netlist_io.hpp"
#include "hetcong/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hetcong;

namespace {

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << bytes;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create directory '" + dir + "': " + ec.message());
}

Design read_design(const std::string& path) {
  std::vector<std::string> warnings;
  Design d = parse_design(read_input(path), &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return d;
}

/// --config and repeated --set key=value, applied in that order.
struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "key=value config file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override one key, e.g. --set model.hidden=64 (repeatable)");
  }
  RunConfig resolve() const {
    RunConfig rc;
    if (!file.empty()) rc.merge_file(file);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + s + "'");
      rc.set(s.substr(0, eq), s.substr(eq + 1));
    }
    rc.validate();
    return rc;
  }
};

void echo_config(const std::string& dir, const RunConfig& rc) { write_output((fs::path(dir) / "config.txt").string(), rc.to_text()); }

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

/// Model config comes from the checkpoint; grid and graph settings from the run config.
RunConfig with_checkpoint(RunConfig rc, const ModelConfig& mc) {
  rc.model = mc;
  rc.validate();
  return rc;
}

Vector read_tile_values(const std::string& path, std::size_t& m, std::size_t& n) {
  const std::string bytes = read_input(path);
  if (!bytes.empty() && bytes[0] == '{') {
    const CongestionLabels l = decode_labels(bytes);
    m = l.m;
    n = l.n;
    return l.grid;
  }
  // tiles.csv as written by `predict`
  std::istringstream in(bytes);
  std::string line;
  if (!std::getline(in, line) || line.rfind("tile,ix,iy,prediction", 0) != 0)
    throw ParseError("expected a label file or a tiles.csv with header tile,ix,iy,prediction", 1);
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, double>> rows;
  std::size_t lineno = 1;
  m = n = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::size_t t, ix, iy;
    double v;
    if (!(ls >> t >> ix >> iy >> v)) throw ParseError("malformed tile row", lineno);
    rows.emplace_back(t, ix, iy, v);
    m = std::max(m, ix + 1);
    n = std::max(n, iy + 1);
  }
  if (rows.size() != m * n) throw ValidationError("tiles.csv does not cover a full grid");
  Vector v(static_cast<Eigen::Index>(m * n));
  for (const auto& [t, ix, iy, val] : rows) {
    if (t != iy * m + ix) throw ValidationError("tile id " + std::to_string(t) + " does not match its position");
    v(static_cast<Eigen::Index>(t)) = val;
  }
  return v;
}

void print_error(const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Congestion prediction on placed netlists with a heterogeneous graph network"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // ingest
  std::string ingest_in, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "DEF subset or canonical design -> canonical design");
  ingest->add_option("input", ingest_in, "input file, '-' or omitted for stdin");
  ingest->add_option("-o,--output", ingest_out, "output file (default stdout)");

  // synth
  SynthSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic placed design");
  synth->add_option("--seed", synth_spec.seed, "generator seed")->capture_default_str();
  synth->add_option("--name", synth_spec.name, "design name (default synth_<seed>)");
  synth->add_option("--cells", synth_spec.n_cells, "number of cells")->capture_default_str();
  synth->add_option("--nets", synth_spec.n_nets, "number of nets")->capture_default_str();
  synth->add_option("--clusters", synth_spec.clusters, "placement hot spots")->capture_default_str();
  synth->add_option("--macros", synth_spec.n_macros, "number of macros")->capture_default_str();
  synth->add_option("--die-w", synth_spec.die_w, "die width in DBU")->capture_default_str();
  synth->add_option("--die-h", synth_spec.die_h, "die height in DBU")->capture_default_str();
  synth->add_option("-o,--output", synth_out, "output file (default stdout)");

  // label
  std::vector<std::string> label_designs;
  std::string label_out, label_dir;
  ConfigArgs label_cfg;
  auto* label = app.add_subcommand("label", "RUDY congestion labels; designs given together share c_max");
  label->add_option("designs", label_designs, "design files")->required();
  label->add_option("-o,--output", label_out, "label file (single design only)");
  label->add_option("--out-dir", label_dir, "directory for <design>.labels files");
  label_cfg.attach(label);

  // train
  std::string train_splits, train_dir;
  ConfigArgs train_cfg;
  bool train_quiet = false;
  auto* train = app.add_subcommand("train", "Fit a model on the train split, select on the val split");
  train->add_option("--splits", train_splits, "split manifest")->required()->check(CLI::ExistingFile);
  train->add_option("--out", train_dir, "output directory")->required();
  train->add_flag("-q,--quiet", train_quiet, "do not echo the epoch log to stdout");
  train_cfg.attach(train);

  // eval
  std::string eval_ckpt, eval_splits, eval_split = "test", eval_design, eval_labels, eval_out;
  bool eval_json = false;
  ConfigArgs eval_cfg;
  auto* eval = app.add_subcommand("eval", "Metric report for a checkpoint");
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  auto* eval_splits_opt = eval->add_option("--splits", eval_splits, "split manifest")->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split, "split to evaluate")->capture_default_str();
  auto* eval_design_opt = eval->add_option("--design", eval_design, "single design file");
  eval->add_option("--labels", eval_labels, "label file for --design (default: RUDY)");
  eval->add_option("--out", eval_out, "directory for report.json and config.txt");
  eval->add_flag("--json", eval_json, "print JSON instead of text");
  eval_splits_opt->excludes(eval_design_opt);
  eval_cfg.attach(eval);

  // predict
  std::string pred_ckpt, pred_design, pred_dir;
  ConfigArgs pred_cfg;
  auto* predict_cmd = app.add_subcommand("predict", "Per-cell and per-tile predictions as CSV");
  predict_cmd->add_option("--checkpoint", pred_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--design", pred_design, "design file")->required();
  predict_cmd->add_option("--out", pred_dir, "output directory")->required();
  pred_cfg.attach(predict_cmd);

  // heatmap
  std::string heat_in, heat_out, heat_ppm;
  bool heat_auto = false;
  auto* heatmap = app.add_subcommand("heatmap", "Render a tile map as 8-bit PGM (and optional PPM)");
  heatmap->add_option("input", heat_in, "label file or tiles.csv from predict")->required();
  heatmap->add_option("-o,--output", heat_out, "PGM output")->required();
  heatmap->add_option("--ppm", heat_ppm, "false-colour PPM output");
  heatmap->add_flag("--autoscale", heat_auto, "stretch the map's own min..max instead of 0..1");

  // graph-stats
  std::string gs_design, gs_dump;
  bool gs_json = false;
  ConfigArgs gs_cfg;
  auto* gstats = app.add_subcommand("graph-stats", "Graph counts and degree histograms for a design");
  gstats->add_option("design", gs_design, "design file")->required();
  gstats->add_flag("--json", gs_json, "print JSON");
  gstats->add_option("--dump-features", gs_dump, "write standardized feature matrices to this directory");
  gs_cfg.attach(gstats);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 1;
  }

  try {
    if (*ingest) {
      write_output(ingest_out, emit_canonical(read_design(ingest_in)));
    } else if (*synth) {
      write_output(synth_out, emit_canonical(synth_design(synth_spec)));
    } else if (*label) {
      const RunConfig rc = label_cfg.resolve();
      if (label_dir.empty() == label_out.empty()) throw UsageError("label needs exactly one of --output or --out-dir");
      if (!label_out.empty() && label_designs.size() != 1) throw UsageError("--output takes a single design; use --out-dir");
      std::vector<Design> designs;
      for (const auto& p : label_designs) designs.push_back(read_design(p));
      std::vector<Sample> samples = rudy_samples(designs, rc);
      if (!label_out.empty()) {
        save_labels(label_out, samples[0].name, samples[0].labels);
      } else {
        make_dir(label_dir);
        for (const Sample& s : samples) save_labels((fs::path(label_dir) / (s.name + ".labels")).string(), s.name, s.labels);
        echo_config(label_dir, rc);
      }
    } else if (*train) {
      const RunConfig rc = train_cfg.resolve();
      const auto splits = load_splits(SplitManifest::load(train_splits), rc);
      std::vector<const Sample*> tr, va;
      if (auto it = splits.find("train"); it != splits.end())
        for (const Sample& s : it->second) tr.push_back(&s);
      if (auto it = splits.find("val"); it != splits.end())
        for (const Sample& s : it->second) va.push_back(&s);
      make_dir(train_dir);
      echo_config(train_dir, rc);
      std::ofstream log((fs::path(train_dir) / "train_log.jsonl").string(), std::ios::binary);
      if (!log) throw UsageError("cannot write training log in '" + train_dir + "'");
      const FitResult r = fit(tr, va, rc.model, rc.train, [&](const EpochRecord& e) {
        log << e.to_json() << "\n";
        log.flush();
        if (!train_quiet) std::cout << e.to_json() << std::endl;
        return true;
      });
      save_checkpoint((fs::path(train_dir) / "checkpoint.bin").string(), rc.model, r.best);
      nlohmann::ordered_json summary;
      summary["best_epoch"] = r.best_epoch;
      summary["best_val_spearman_mean"] = r.best_score;
      summary["epochs_run"] = r.log.size();
      write_output((fs::path(train_dir) / "summary.json").string(), summary.dump() + "\n");
      if (!train_quiet) std::cout << summary.dump() << std::endl;
    } else if (*eval) {
      auto [mc, params] = load_checkpoint(eval_ckpt);
      const RunConfig rc = with_checkpoint(eval_cfg.resolve(), mc);
      std::vector<Sample> samples;
      if (!eval_splits.empty()) {
        auto splits = load_splits(SplitManifest::load(eval_splits), rc);
        auto it = splits.find(eval_split);
        if (it == splits.end() || it->second.empty()) throw ValidationError("split '" + eval_split + "' is empty");
        samples = std::move(it->second);
      } else if (!eval_design.empty()) {
        const Design d = read_design(eval_design);
        if (eval_labels.empty())
          samples = rudy_samples({d}, rc);
        else
          samples.push_back(make_sample(d, rc, load_labels(eval_labels)));
      } else {
        throw UsageError("eval needs --splits or --design");
      }
      nlohmann::ordered_json all = nlohmann::ordered_json::array();
      std::string text;
      for (const Sample& s : samples) {
        const MetricReport rep = evaluate(predict(params, s.inputs, rc.model), s.labels);
        nlohmann::ordered_json j;
        j["design"] = s.name;
        j["report"] = nlohmann::ordered_json::parse(rep.to_json());
        all.push_back(j);
        text += "design " + s.name + "\n" + rep.to_text();
      }
      if (!eval_out.empty()) {
        make_dir(eval_out);
        write_output((fs::path(eval_out) / "report.json").string(), all.dump(2) + "\n");
        echo_config(eval_out, rc);
      }
      std::cout << (eval_json ? all.dump(2) + "\n" : text);
    } else if (*predict_cmd) {
      auto [mc, params] = load_checkpoint(pred_ckpt);
      const RunConfig rc = with_checkpoint(pred_cfg.resolve(), mc);
      const Design d = read_design(pred_design);
      const HeteroGraph g = build_graph(d, grid_spec_for(d, rc), rc.graph_options());
      const Prediction p = predict(params, make_inputs(g, featurize(d, g), rc.model), rc.model);
      make_dir(pred_dir);
      std::string cells = "cell,name,prediction\n";
      for (std::size_t c = 0; c < d.cells.size(); ++c)
        cells += std::to_string(c) + "," + d.cells[c].name + "," + format_value(p.cell(static_cast<Eigen::Index>(c))) + "\n";
      std::string tiles = "tile,ix,iy,prediction\n";
      for (std::size_t t = 0; t < g.grid.tiles(0); ++t)
        tiles += std::to_string(t) + "," + std::to_string(t % g.grid.m) + "," + std::to_string(t / g.grid.m) + "," +
                 format_value(p.grid(static_cast<Eigen::Index>(t))) + "\n";
      write_output((fs::path(pred_dir) / "cells.csv").string(), cells);
      write_output((fs::path(pred_dir) / "tiles.csv").string(), tiles);
      echo_config(pred_dir, rc);
    } else if (*heatmap) {
      std::size_t m = 0, n = 0;
      const Vector v = read_tile_values(heat_in, m, n);
      const auto levels = heatmap_levels(v, m, n, heat_auto);
      write_output(heat_out, encode_pgm(levels, m, n));
      if (!heat_ppm.empty()) write_output(heat_ppm, encode_ppm(levels, m, n));
    } else if (*gstats) {
      const RunConfig rc = gs_cfg.resolve();
      const Design d = read_design(gs_design);
      const HeteroGraph g = build_graph(d, grid_spec_for(d, rc), rc.graph_options());
      const GraphStats st = graph_stats(g);
      std::cout << (gs_json ? st.to_json() + "\n" : st.to_text());
      if (!gs_dump.empty()) {
        make_dir(gs_dump);
        dump_features(featurize(d, g), gs_dump);
        echo_config(gs_dump, rc);
      }
    }
  } catch (const Error& e) {
    print_error(kind_name(e.kind()), e.what());
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    print_error("numeric", "out of memory");
    return 3;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 3;
  }
  return 0;
}
