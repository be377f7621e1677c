#include "hetcong/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hetcong/error.hpp"
#include "hetcong/features.hpp"
#include "hetcong/netlist_io.hpp"

namespace hetcong {

GridSpec grid_spec_for(const Design& d, const RunConfig& rc) {
  return make_grid_spec(d, rc.grid_m, rc.grid_n, rc.model.grid_levels);
}

Sample make_sample(const Design& d, const RunConfig& rc, CongestionLabels labels) {
  Sample s;
  s.name = d.name;
  s.graph = build_graph(d, grid_spec_for(d, rc), rc.graph_options());
  if (labels.m != rc.grid_m || labels.n != rc.grid_n)
    throw ValidationError("labels for '" + d.name + "' are " + std::to_string(labels.m) + "x" + std::to_string(labels.n) +
                          ", grid is " + std::to_string(rc.grid_m) + "x" + std::to_string(rc.grid_n));
  if (labels.cell.size() == 0) {
    labels.cell.resize(static_cast<Eigen::Index>(s.graph.n_cells));
    for (std::size_t c = 0; c < s.graph.n_cells; ++c)
      labels.cell(static_cast<Eigen::Index>(c)) = labels.grid(static_cast<Eigen::Index>(s.graph.cell2grid[c]));
  }
  if (static_cast<std::size_t>(labels.cell.size()) != s.graph.n_cells)
    throw ValidationError("labels for '" + d.name + "' have " + std::to_string(labels.cell.size()) + " cells, design has " +
                          std::to_string(s.graph.n_cells));
  s.inputs = make_inputs(s.graph, featurize(d, s.graph), rc.model);
  s.labels = std::move(labels);
  return s;
}

std::vector<Sample> rudy_samples(const std::vector<Design>& designs, const RunConfig& rc) {
  std::vector<RawCongestionMap> raw;
  for (const Design& d : designs) raw.push_back(rudy_raw(d, grid_spec_for(d, rc), rc.source_scale));
  const double c_max = log_max(raw);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < designs.size(); ++i) {
    const HeteroGraph g = build_graph(designs[i], grid_spec_for(designs[i], rc), rc.graph_options());
    out.push_back(make_sample(designs[i], rc, normalize_labels(raw[i], g, c_max)));
  }
  return out;
}

MetricReport evaluate(const Prediction& pred, const CongestionLabels& truth) {
  return {evaluate_level(pred.cell, truth.cell), evaluate_level(pred.grid, truth.grid)};
}

SplitManifest SplitManifest::parse(const std::string& text, const std::string& base_dir) {
  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return (path.is_relative() && !base_dir.empty() ? fs::path(base_dir) / path : path).string();
  };
  SplitManifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string split, design, labels, extra;
    if (!(ls >> split)) continue;
    if (!(ls >> design)) throw ParseError("split entry needs a design path", lineno);
    Entry e{resolve(design), std::nullopt};
    if (ls >> labels) e.labels = resolve(labels);
    if (ls >> extra) throw ParseError("unexpected token '" + extra + "'", lineno);
    m.splits[split].push_back(std::move(e));
  }
  return m;
}

SplitManifest SplitManifest::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open split manifest '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::map<std::string, std::vector<Sample>> load_splits(const SplitManifest& m, const RunConfig& rc) {
  std::map<std::string, std::vector<Design>> designs;
  std::vector<RawCongestionMap> train_raw;
  for (const auto& [split, entries] : m.splits)
    for (const auto& e : entries) {
      designs[split].push_back(load_design(e.design));
      if (split == "train" && !e.labels) {
        const Design& d = designs[split].back();
        train_raw.push_back(rudy_raw(d, grid_spec_for(d, rc), rc.source_scale));
      }
    }
  const double c_max = log_max(train_raw);

  std::map<std::string, std::vector<Sample>> out;
  for (const auto& [split, entries] : m.splits) {
    auto& samples = out[split];
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Design& d = designs[split][i];
      if (entries[i].labels) {
        std::string label_design;
        CongestionLabels l = load_labels(*entries[i].labels, &label_design);
        if (label_design != d.name)
          throw ValidationError("label file '" + *entries[i].labels + "' is for design '" + label_design + "', not '" +
                                d.name + "'");
        samples.push_back(make_sample(d, rc, std::move(l)));
      } else {
        const GridSpec spec = grid_spec_for(d, rc);
        const HeteroGraph g = build_graph(d, spec, rc.graph_options());
        samples.push_back(make_sample(d, rc, normalize_labels(rudy_raw(d, spec, rc.source_scale), g, c_max)));
      }
    }
  }
  return out;
}

}  // namespace hetcong
