#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetcong/config.hpp"
#include "hetcong/design.hpp"
#include "hetcong/metrics.hpp"
#include "hetcong/oracle.hpp"
#include "hetcong/train.hpp"

namespace hetcong {

GridSpec grid_spec_for(const Design& d, const RunConfig& rc);

/// Graph, features, and model inputs for a design with known labels. A label
/// set without cell values gets them from each cell's tile.
Sample make_sample(const Design& d, const RunConfig& rc, CongestionLabels labels);

/// RUDY-labelled samples sharing one c_max over all of `designs`.
std::vector<Sample> rudy_samples(const std::vector<Design>& designs, const RunConfig& rc);

MetricReport evaluate(const Prediction& pred, const CongestionLabels& truth);

/// Explicit dataset splits: one `split design_path [label_path]` entry per line,
/// `#` comments allowed. Relative paths resolve against the manifest directory.
struct SplitManifest {
  struct Entry {
    std::string design;
    std::optional<std::string> labels;
  };
  std::map<std::string, std::vector<Entry>> splits;

  static SplitManifest parse(const std::string& text, const std::string& base_dir = "");
  static SplitManifest load(const std::string& path);
};

/// Samples of every split. Designs without a label file get RUDY labels with
/// c_max taken over the train split's RUDY designs, so all splits share one scale.
std::map<std::string, std::vector<Sample>> load_splits(const SplitManifest& m, const RunConfig& rc);

}  // namespace hetcong
