#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "hetcong/graph.hpp"

namespace hetcong {

std::pair<std::size_t, std::size_t> HeteroGraph::grid_nodes(std::size_t level) const {
  std::size_t begin = 0;
  for (std::size_t l = 0; l < level; ++l) begin += grid.tiles(l);
  return {begin, begin + grid.tiles(level)};
}

std::vector<HeteroGraph::HierEdge> HeteroGraph::hier_edges() const {
  std::vector<HierEdge> out;
  for (std::size_t l = 0; l < parent.size(); ++l)
    for (std::size_t t = 0; t < parent[l].size(); ++t) out.push_back({l, t, parent[l][t]});
  return out;
}

namespace {

std::vector<std::size_t> net_tiles(const Design& d, const Net& net, const GridSpec& spec, const GraphOptions& opts) {
  Dbu bx0 = 0, by0 = 0, bx1 = 0, by1 = 0;
  for (std::size_t i = 0; i < net.pins.size(); ++i) {
    const NetPin& p = net.pins[i];
    const Dbu px = d.cells[p.cell].x + p.offset_x, py = d.cells[p.cell].y + p.offset_y;
    if (i == 0) {
      bx0 = bx1 = px;
      by0 = by1 = py;
    } else {
      bx0 = std::min(bx0, px), bx1 = std::max(bx1, px);
      by0 = std::min(by0, py), by1 = std::max(by1, py);
    }
  }
  auto tiles = tiles_in_box(spec, bx0, by0, bx1, by1);
  if (net.pins.size() >= opts.net_cap_pins && tiles.size() > opts.net_cap_tiles) {
    const double cx = 0.5 * static_cast<double>(bx0 + bx1), cy = 0.5 * static_cast<double>(by0 + by1);
    std::vector<std::pair<double, std::size_t>> by_dist;
    by_dist.reserve(tiles.size());
    for (std::size_t t : tiles) {
      const auto e = spec.extent(0, t);
      const double dx = 0.5 * (e.x0 + e.x1) - cx, dy = 0.5 * (e.y0 + e.y1) - cy;
      by_dist.emplace_back(dx * dx + dy * dy, t);
    }
    std::partial_sort(by_dist.begin(), by_dist.begin() + static_cast<std::ptrdiff_t>(opts.net_cap_tiles),
                      by_dist.end());
    tiles.clear();
    for (std::size_t i = 0; i < opts.net_cap_tiles; ++i) tiles.push_back(by_dist[i].second);
    std::sort(tiles.begin(), tiles.end());
  }
  return tiles;
}

}  // namespace

HeteroGraph build_graph(const Design& d, const GridSpec& spec, const GraphOptions& opts) {
  HeteroGraph g;
  g.n_cells = d.cells.size();
  g.n_nets = d.nets.size();
  g.grid = spec;

  for (const Net& net : d.nets)
    for (std::size_t p = 0; p < net.pins.size(); ++p) g.pin_edges.push_back({net.pins[p].cell, net.id, p});

  g.geom_edges = geometric_edges(d, opts.k_geom);

  g.grid_adj_edges.resize(spec.levels);
  for (std::size_t l = 0; l < spec.levels; ++l) {
    const std::size_t c = spec.cols(l), r = spec.rows(l);
    auto& adj = g.grid_adj_edges[l];
    for (std::size_t iy = 0; iy < r; ++iy)
      for (std::size_t ix = 0; ix < c; ++ix) {
        const std::size_t t = iy * c + ix;
        if (ix + 1 < c) adj.emplace_back(t, t + 1);
        if (iy + 1 < r) adj.emplace_back(t, t + c);
      }
  }

  for (std::size_t l = 0; l + 1 < spec.levels; ++l) {
    const std::size_t c = spec.cols(l), pc = spec.cols(l + 1);
    std::vector<std::size_t> par(spec.tiles(l));
    for (std::size_t t = 0; t < par.size(); ++t) par[t] = (t / c / 2) * pc + (t % c) / 2;
    g.parent.push_back(std::move(par));
  }

  g.cell2grid.resize(d.cells.size());
  for (const Cell& c : d.cells) g.cell2grid[c.id] = spec.tile_of_cell(c);

  g.net2grids.reserve(d.nets.size());
  for (const Net& net : d.nets) g.net2grids.push_back(net_tiles(d, net, spec, opts));
  return g;
}

namespace {

std::vector<std::size_t> histogram(const std::vector<std::size_t>& values, std::size_t cap = 32) {
  std::vector<std::size_t> h;
  for (std::size_t v : values) {
    const std::size_t b = std::min(v, cap);
    if (h.size() <= b) h.resize(b + 1, 0);
    ++h[b];
  }
  return h;
}

}  // namespace

GraphStats graph_stats(const HeteroGraph& g) {
  GraphStats s;
  s.cells = g.n_cells;
  s.nets = g.n_nets;
  s.pin_edges = g.pin_edges.size();
  s.geom_edges = g.geom_edges.size() / 2;
  s.hier_edges = g.hier_edges().size();
  for (std::size_t l = 0; l < g.levels(); ++l) {
    s.grid_tiles.push_back(g.level_tiles(l));
    s.adj_edges.push_back(g.grid_adj_edges[l].size());
  }
  std::vector<std::size_t> net_deg(g.n_nets, 0), cell_pins(g.n_cells, 0), geom_deg(g.n_cells, 0);
  for (const PinEdge& e : g.pin_edges) {
    ++net_deg[e.net];
    ++cell_pins[e.cell];
  }
  for (const auto& [i, j] : g.geom_edges) ++geom_deg[i];
  s.net_degree_hist = histogram(net_deg);
  s.cell_pin_hist = histogram(cell_pins);
  s.geom_degree_hist = histogram(geom_deg);
  return s;
}

std::string GraphStats::to_text() const {
  std::ostringstream os;
  os << "cells        " << cells << "\n";
  os << "nets         " << nets << "\n";
  os << "pin_edges    " << pin_edges << "\n";
  os << "geom_edges   " << geom_edges << " (undirected)\n";
  os << "hier_edges   " << hier_edges << "\n";
  for (std::size_t l = 0; l < grid_tiles.size(); ++l)
    os << "grid[" << l << "]      " << grid_tiles[l] << " tiles, " << adj_edges[l] << " adjacency edges\n";
  auto dump = [&](const char* label, const std::vector<std::size_t>& h) {
    os << label << "\n";
    for (std::size_t i = 0; i < h.size(); ++i)
      if (h[i]) os << "  " << (i + 1 == h.size() && i >= 32 ? ">=" : "") << i << ": " << h[i] << "\n";
  };
  dump("net degree histogram", net_degree_hist);
  dump("cell pin-count histogram", cell_pin_hist);
  dump("geometric degree histogram", geom_degree_hist);
  return os.str();
}

std::string GraphStats::to_json() const {
  nlohmann::ordered_json j;
  j["cells"] = cells;
  j["nets"] = nets;
  j["pin_edges"] = pin_edges;
  j["geom_edges"] = geom_edges;
  j["hier_edges"] = hier_edges;
  j["grid_tiles"] = grid_tiles;
  j["grid_adj_edges"] = adj_edges;
  j["net_degree_hist"] = net_degree_hist;
  j["cell_pin_hist"] = cell_pin_hist;
  j["geom_degree_hist"] = geom_degree_hist;
  return j.dump();
}

}  // namespace hetcong
