#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "hetcong/design.hpp"
#include "hetcong/graph.hpp"
#include "hetcong/types.hpp"

namespace hetcong {

/// Synthetic placed-design generator parameters.
struct SynthSpec {
  std::string name;  // defaults to "synth_<seed>"
  std::size_t n_cells = 2000;
  std::size_t n_nets = 2200;
  Dbu die_w = 60000, die_h = 60000;
  double mean_degree = 3.0;    // geometric over {2, 3, ...}
  std::size_t max_degree = 16;
  Dbu min_cell_w = 200, max_cell_w = 1600, row_h = 1400;
  std::size_t n_masters = 8;
  std::size_t n_macros = 2;
  Dbu macro_size = 4000;
  std::size_t clusters = 3;
  double cluster_sigma = 0.08;  // fraction of the die span
  double background = 0.2;      // fraction of cells placed uniformly
  double long_range = 0.1;      // fraction of non-driver pins drawn design-wide
  std::size_t locality = 24;    // local pins come from this many nearest cells
  std::uint64_t seed = 1;

  void validate() const;
};

Design synth_design(const SynthSpec& spec);

/// Unnormalized per-tile routing demand, rows = y tiles, cols = x tiles.
struct RawCongestionMap {
  Matrix values;
};

/// Normalized targets in [0, 1].
struct CongestionLabels {
  std::size_t m = 0, n = 0;
  Vector grid;  // level-0 tiles, id = iy * m + ix
  Vector cell;  // may be empty when only a grid map is known
  double c_max = 1.0;
};

/// RUDY demand: every net spreads HPWL / (bbox area) uniformly over its pin
/// bounding box, and each tile sums demand times overlap area. A degenerate
/// bbox side is widened to one tile around its center; single-pin nets add nothing.
RawCongestionMap rudy_map(const Design& d, std::size_t m, std::size_t n);

/// Area-weighted average to a coarser or equal resolution. Conserves the global mean.
Matrix downsample_area_avg(const Matrix& src, std::size_t m, std::size_t n);

/// max over maps of log(1 + x); 1 when every map is zero.
double log_max(std::span<const RawCongestionMap> maps);

/// y = log(1 + x) / c_max on tiles; each cell takes its tile's value.
CongestionLabels normalize_labels(const RawCongestionMap& raw, const HeteroGraph& g, double c_max);

/// RUDY computed at `source_scale` times the target resolution, area-averaged down.
RawCongestionMap rudy_raw(const Design& d, const GridSpec& spec, std::size_t source_scale = 1);

/// Single-design convenience: c_max taken from this design alone.
CongestionLabels rudy_labels(const Design& d, const HeteroGraph& g, std::size_t source_scale = 1);

/// JSON header line, then f32 LE grid (n rows of m), then optional f32 LE cell vector.
/// See docs/labels.md.
void save_labels(const std::string& path, const std::string& design, const CongestionLabels& labels);
std::string encode_labels(const std::string& design, const CongestionLabels& labels);
CongestionLabels load_labels(const std::string& path, std::string* design = nullptr);
CongestionLabels decode_labels(const std::string& bytes, std::string* design = nullptr);

}  // namespace hetcong
