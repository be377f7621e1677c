#pragma once

#include <string>
#include <vector>

#include "hetcong/design.hpp"
#include "hetcong/graph.hpp"
#include "hetcong/types.hpp"

namespace hetcong {

inline constexpr int kCellFeatures = 13;
inline constexpr int kNetFeatures = 6;
inline constexpr int kGridFeatures = 5;
inline constexpr int kPinFeatures = 3;
inline constexpr int kGeomFeatures = 4;

/// One feature class: values plus the z-score actually applied per column.
struct FeatureBlock {
  Matrix values;
  std::vector<std::string> columns;
  std::vector<bool> indicator;  // indicator columns are never standardized
  std::vector<double> mean;
  std::vector<double> std;
};

struct FeatureSet {
  FeatureBlock cell;
  FeatureBlock net;
  std::vector<FeatureBlock> grid;  // one block per level
  FeatureBlock pin;
  FeatureBlock geom;
};

/// [x, y, w, h, a, d_net, p, mean_hpwl, max_hpwl, mean_degree, macro, input_ratio, type_freq]
Matrix cell_features(const Design& d, const HeteroGraph& g);
/// [hpwl, dx, dy, degree, log_degree, bbox_area]
Matrix net_features(const Design& d, const HeteroGraph& g);
/// [cell_density, pin_density, net_density, mean_cell_area, mean_net_hpwl]
Matrix grid_features(const Design& d, const HeteroGraph& g, std::size_t level);
/// [direction, offset_x, offset_y]; direction is 1 for output pins.
Matrix pin_edge_features(const Design& d, const HeteroGraph& g);
/// [dx, dy, manhattan, euclidean] between cell centers, scaled by the larger die span.
Matrix geom_edge_features(const Design& d, const HeteroGraph& g);

/// Unstandardized features with column metadata.
FeatureSet raw_features(const Design& d, const HeteroGraph& g);

inline constexpr double kStdFloor = 1e-6;

/// Per-design population z-score of every continuous column.
FeatureSet standardize(const FeatureSet& fs);

inline FeatureSet featurize(const Design& d, const HeteroGraph& g) { return standardize(raw_features(d, g)); }

/// Keeps only coordinates and plain connectivity counts; every other column is zeroed.
FeatureSet minimal_features(const FeatureSet& fs);

/// Writes `<dir>/<class>.bin` (u32 rows, u32 cols, row-major f64 little-endian)
/// and `<dir>/<class>.json` (columns, indicator, mean, std) for every feature class.
void dump_features(const FeatureSet& fs, const std::string& dir);

}  // namespace hetcong
