#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hetcong/design.hpp"

namespace hetcong {

/// Multi-resolution tiling of the die. Level 0 is the finest; each coarser
/// level halves the tile counts with a ceiling, so ragged edge parents own
/// fewer than four children.
struct GridSpec {
  Rect die;
  std::size_t m = 1;       // level-0 columns
  std::size_t n = 1;       // level-0 rows
  std::size_t levels = 1;  // K
  double tile_w = 0, tile_h = 0;

  std::size_t cols(std::size_t level) const { return ceil_shift(m, level); }
  std::size_t rows(std::size_t level) const { return ceil_shift(n, level); }
  std::size_t tiles(std::size_t level) const { return cols(level) * rows(level); }

  /// Level-0 column of an x position given in doubled database units relative to
  /// the die origin (2x is integral for every cell center and pin). Right and top
  /// tile boundaries belong to the next tile; positions outside the die clamp inward.
  std::size_t column_of_twice(Dbu twice_dx) const { return bin(twice_dx, m, die.width()); }
  std::size_t row_of_twice(Dbu twice_dy) const { return bin(twice_dy, n, die.height()); }

  std::size_t tile_of_cell(const Cell& c) const;
  std::size_t tile_of_point(Dbu x, Dbu y) const;

  /// Level-0 tile range [first, last) covered by tile (ix, iy) at `level`, per axis.
  std::pair<std::size_t, std::size_t> fine_cols(std::size_t level, std::size_t ix) const;
  std::pair<std::size_t, std::size_t> fine_rows(std::size_t level, std::size_t iy) const;

  /// Spatial extent of a tile at any level, in database units.
  struct Box {
    double x0, y0, x1, y1;
  };
  Box extent(std::size_t level, std::size_t tile) const;

  static std::size_t ceil_shift(std::size_t v, std::size_t s) { return ((v - 1) >> s) + 1; }

 private:
  static std::size_t bin(Dbu twice_d, std::size_t count, Dbu span);
};

/// Throws ValidationError for zero counts or when level K-1 would repeat a 1x1 level.
GridSpec make_grid_spec(const Design& d, std::size_t m, std::size_t n, std::size_t levels);

struct GraphOptions {
  std::size_t k_geom = 8;
  std::size_t net_cap_pins = 1000;   // nets with at least this many pins get capped incidence
  std::size_t net_cap_tiles = 256;
};

struct PinEdge {
  std::size_t cell;
  std::size_t net;
  std::size_t pin;  // index into Net::pins
};

struct HeteroGraph {
  std::size_t n_cells = 0;
  std::size_t n_nets = 0;
  GridSpec grid;

  std::vector<PinEdge> pin_edges;                               // ordered by (net, pin)
  std::vector<std::pair<std::size_t, std::size_t>> geom_edges;  // directed, both orientations, sorted
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> grid_adj_edges;  // per level, a < b
  std::vector<std::vector<std::size_t>> parent;  // parent[l][tile] at level l+1, for l < K-1
  std::vector<std::size_t> cell2grid;            // level-0 tile per cell
  std::vector<std::vector<std::size_t>> net2grids;  // sorted level-0 tiles per net

  std::size_t levels() const { return grid.levels; }
  std::size_t level_tiles(std::size_t level) const { return grid.tiles(level); }

  /// Global grid-node index range [begin, end) for a level, levels laid out consecutively.
  std::pair<std::size_t, std::size_t> grid_nodes(std::size_t level) const;

  struct HierEdge {
    std::size_t level;  // child level
    std::size_t child;
    std::size_t parent;
  };
  std::vector<HierEdge> hier_edges() const;
};

HeteroGraph build_graph(const Design& d, const GridSpec& spec, const GraphOptions& opts = {});

/// Exact k nearest neighbours over points via a uniform bucket hash. Ties in
/// distance resolve to the lower index. Result rows are sorted by (distance, id).
std::vector<std::vector<std::size_t>> knn_spatial_hash(const std::vector<double>& xs, const std::vector<double>& ys,
                                                       std::size_t k);

/// Symmetrized, irreflexive k-NN edge list over cell centers.
std::vector<std::pair<std::size_t, std::size_t>> geometric_edges(const Design& d, std::size_t k);

/// Level-0 tiles intersecting a closed rectangle given in database units.
std::vector<std::size_t> tiles_in_box(const GridSpec& spec, Dbu bx0, Dbu by0, Dbu bx1, Dbu by1);

struct GraphStats {
  std::size_t cells = 0, nets = 0, pin_edges = 0, geom_edges = 0, hier_edges = 0;
  std::vector<std::size_t> grid_tiles;  // per level
  std::vector<std::size_t> adj_edges;   // per level
  // histograms: index = degree (last bucket aggregates the tail)
  std::vector<std::size_t> net_degree_hist;
  std::vector<std::size_t> cell_pin_hist;
  std::vector<std::size_t> geom_degree_hist;

  std::string to_text() const;
  std::string to_json() const;
};

GraphStats graph_stats(const HeteroGraph& g);

}  // namespace hetcong
