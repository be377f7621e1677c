#include "hetcong/features.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "hetcong/binary_io.hpp"
#include "hetcong/error.hpp"

namespace hetcong {
namespace {

struct NetBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double dx() const { return x1 - x0; }
  double dy() const { return y1 - y0; }
  double hpwl() const { return dx() + dy(); }
};

std::vector<NetBox> net_boxes(const Design& d) {
  std::vector<NetBox> boxes(d.nets.size());
  for (const Net& net : d.nets) {
    NetBox b;
    for (std::size_t i = 0; i < net.pins.size(); ++i) {
      const double px = pin_x(d, net.pins[i]), py = pin_y(d, net.pins[i]);
      if (i == 0) {
        b = {px, py, px, py};
      } else {
        b.x0 = std::min(b.x0, px), b.x1 = std::max(b.x1, px);
        b.y0 = std::min(b.y0, py), b.y1 = std::max(b.y1, py);
      }
    }
    boxes[net.id] = b;
  }
  return boxes;
}

// Walks a level-0 tile up to `level`.
std::size_t lift(const HeteroGraph& g, std::size_t tile, std::size_t level) {
  for (std::size_t l = 0; l < level; ++l) tile = g.parent[l][tile];
  return tile;
}

FeatureBlock block(Matrix values, std::vector<std::string> columns, std::vector<bool> indicator) {
  FeatureBlock b;
  b.values = std::move(values);
  b.columns = std::move(columns);
  b.indicator = std::move(indicator);
  b.mean.assign(b.columns.size(), 0.0);
  b.std.assign(b.columns.size(), 1.0);
  return b;
}

FeatureBlock standardize_block(const FeatureBlock& in) {
  FeatureBlock out = in;
  const auto rows = in.values.rows();
  out.mean.assign(static_cast<std::size_t>(in.values.cols()), 0.0);
  out.std.assign(static_cast<std::size_t>(in.values.cols()), 1.0);
  for (Eigen::Index c = 0; c < in.values.cols(); ++c) {
    const auto k = static_cast<std::size_t>(c);
    if (in.indicator[k] || rows == 0) {
      out.mean[k] = 0.0;
      out.std[k] = 1.0;
      continue;
    }
    double mean = 0;
    for (Eigen::Index r = 0; r < rows; ++r) mean += in.values(r, c);
    mean /= static_cast<double>(rows);
    double var = 0;
    for (Eigen::Index r = 0; r < rows; ++r) var += (in.values(r, c) - mean) * (in.values(r, c) - mean);
    var /= static_cast<double>(rows);
    const double sd = std::max(std::sqrt(var), kStdFloor);
    for (Eigen::Index r = 0; r < rows; ++r) out.values(r, c) = (in.values(r, c) - mean) / sd;
    out.mean[k] = mean;
    out.std[k] = sd;
  }
  return out;
}

}  // namespace

Matrix cell_features(const Design& d, const HeteroGraph& g) {
  const auto n = static_cast<Eigen::Index>(d.cells.size());
  Matrix x = Matrix::Zero(n, kCellFeatures);
  const auto boxes = net_boxes(d);

  std::vector<std::set<std::size_t>> incident(d.cells.size());
  std::vector<double> pins(d.cells.size(), 0), inputs(d.cells.size(), 0);
  for (const PinEdge& e : g.pin_edges) {
    incident[e.cell].insert(e.net);
    pins[e.cell] += 1;
    if (d.nets[e.net].pins[e.pin].direction == PinDirection::Input) inputs[e.cell] += 1;
  }
  std::map<std::string, std::size_t> master_count;
  for (const Cell& c : d.cells) ++master_count[c.master];

  for (const Cell& c : d.cells) {
    const auto r = static_cast<Eigen::Index>(c.id);
    x(r, 0) = static_cast<double>(c.x);
    x(r, 1) = static_cast<double>(c.y);
    x(r, 2) = static_cast<double>(c.w);
    x(r, 3) = static_cast<double>(c.h);
    x(r, 4) = static_cast<double>(c.w) * static_cast<double>(c.h);
    const auto& nets = incident[c.id];
    x(r, 5) = static_cast<double>(nets.size());
    x(r, 6) = pins[c.id];
    if (!nets.empty()) {
      double sum = 0, mx = 0, deg = 0;
      for (std::size_t e : nets) {
        const double l = boxes[e].hpwl();
        sum += l;
        mx = std::max(mx, l);
        deg += static_cast<double>(d.nets[e].pins.size());
      }
      x(r, 7) = sum / static_cast<double>(nets.size());
      x(r, 8) = mx;
      x(r, 9) = deg / static_cast<double>(nets.size());
    }
    x(r, 10) = c.is_macro ? 1.0 : 0.0;
    x(r, 11) = pins[c.id] > 0 ? inputs[c.id] / pins[c.id] : 0.0;
    x(r, 12) = static_cast<double>(master_count[c.master]) / static_cast<double>(d.cells.size());
  }
  return x;
}

Matrix net_features(const Design& d, const HeteroGraph&) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(d.nets.size()), kNetFeatures);
  const auto boxes = net_boxes(d);
  for (const Net& net : d.nets) {
    const auto r = static_cast<Eigen::Index>(net.id);
    const NetBox& b = boxes[net.id];
    const auto deg = static_cast<double>(net.pins.size());
    x(r, 0) = b.hpwl();
    x(r, 1) = b.dx();
    x(r, 2) = b.dy();
    x(r, 3) = deg;
    x(r, 4) = std::log(deg);
    x(r, 5) = b.dx() * b.dy();
  }
  return x;
}

Matrix grid_features(const Design& d, const HeteroGraph& g, std::size_t level) {
  const std::size_t tiles = g.level_tiles(level);
  std::vector<double> cells(tiles, 0), pins(tiles, 0), nets(tiles, 0), area(tiles, 0), hpwl(tiles, 0);
  const auto boxes = net_boxes(d);

  for (const Cell& c : d.cells) {
    const std::size_t t = lift(g, g.cell2grid[c.id], level);
    cells[t] += 1;
    area[t] += static_cast<double>(c.w) * static_cast<double>(c.h);
  }
  for (const Net& net : d.nets)
    for (const NetPin& p : net.pins) {
      const Cell& c = d.cells[p.cell];
      pins[lift(g, g.grid.tile_of_point(c.x + p.offset_x, c.y + p.offset_y), level)] += 1;
    }
  std::vector<std::size_t> lifted;
  for (const Net& net : d.nets) {
    lifted.clear();
    for (std::size_t t : g.net2grids[net.id]) lifted.push_back(lift(g, t, level));
    std::sort(lifted.begin(), lifted.end());
    lifted.erase(std::unique(lifted.begin(), lifted.end()), lifted.end());
    for (std::size_t t : lifted) {
      nets[t] += 1;
      hpwl[t] += boxes[net.id].hpwl();
    }
  }

  const double max_cells = *std::max_element(cells.begin(), cells.end());
  const double max_pins = *std::max_element(pins.begin(), pins.end());
  const double max_nets = *std::max_element(nets.begin(), nets.end());
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(tiles), kGridFeatures);
  for (std::size_t t = 0; t < tiles; ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    x(r, 0) = max_cells > 0 ? cells[t] / max_cells : 0.0;
    x(r, 1) = max_pins > 0 ? pins[t] / max_pins : 0.0;
    x(r, 2) = max_nets > 0 ? nets[t] / max_nets : 0.0;
    x(r, 3) = cells[t] > 0 ? area[t] / cells[t] : 0.0;
    x(r, 4) = nets[t] > 0 ? hpwl[t] / nets[t] : 0.0;
  }
  return x;
}

Matrix pin_edge_features(const Design& d, const HeteroGraph& g) {
  const auto boxes = net_boxes(d);
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(g.pin_edges.size()), kPinFeatures);
  for (std::size_t i = 0; i < g.pin_edges.size(); ++i) {
    const PinEdge& e = g.pin_edges[i];
    const NetBox& b = boxes[e.net];
    const Cell& c = d.cells[e.cell];
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = d.nets[e.net].pins[e.pin].direction == PinDirection::Output ? 1.0 : 0.0;
    x(r, 1) = (c.center_x() - 0.5 * (b.x0 + b.x1)) / std::max(b.dx(), g.grid.tile_w);
    x(r, 2) = (c.center_y() - 0.5 * (b.y0 + b.y1)) / std::max(b.dy(), g.grid.tile_h);
  }
  return x;
}

Matrix geom_edge_features(const Design& d, const HeteroGraph& g) {
  const double span = static_cast<double>(std::max(d.die.width(), d.die.height()));
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(g.geom_edges.size()), kGeomFeatures);
  for (std::size_t k = 0; k < g.geom_edges.size(); ++k) {
    const auto [i, j] = g.geom_edges[k];
    const double dx = (d.cells[j].center_x() - d.cells[i].center_x()) / span;
    const double dy = (d.cells[j].center_y() - d.cells[i].center_y()) / span;
    const auto r = static_cast<Eigen::Index>(k);
    x(r, 0) = dx;
    x(r, 1) = dy;
    x(r, 2) = std::abs(dx) + std::abs(dy);
    x(r, 3) = std::sqrt(dx * dx + dy * dy);
  }
  return x;
}

FeatureSet raw_features(const Design& d, const HeteroGraph& g) {
  FeatureSet fs;
  fs.cell = block(cell_features(d, g),
                  {"x", "y", "w", "h", "area", "net_count", "pin_count", "mean_hpwl", "max_hpwl", "mean_net_degree",
                   "is_macro", "input_ratio", "type_frequency"},
                  {false, false, false, false, false, false, false, false, false, false, true, false, false});
  fs.net = block(net_features(d, g), {"hpwl", "dx", "dy", "degree", "log_degree", "bbox_area"},
                 std::vector<bool>(kNetFeatures, false));
  for (std::size_t l = 0; l < g.levels(); ++l)
    fs.grid.push_back(block(grid_features(d, g, l),
                            {"cell_density", "pin_density", "net_density", "mean_cell_area", "mean_net_hpwl"},
                            std::vector<bool>(kGridFeatures, false)));
  fs.pin = block(pin_edge_features(d, g), {"direction", "offset_x", "offset_y"}, {true, false, false});
  fs.geom = block(geom_edge_features(d, g), {"dx", "dy", "manhattan", "euclidean"},
                  std::vector<bool>(kGeomFeatures, false));
  return fs;
}

FeatureSet standardize(const FeatureSet& fs) {
  FeatureSet out;
  out.cell = standardize_block(fs.cell);
  out.net = standardize_block(fs.net);
  for (const auto& b : fs.grid) out.grid.push_back(standardize_block(b));
  out.pin = standardize_block(fs.pin);
  out.geom = standardize_block(fs.geom);
  return out;
}

FeatureSet minimal_features(const FeatureSet& fs) {
  FeatureSet out = fs;
  auto keep = [](FeatureBlock& b, std::initializer_list<int> cols) {
    for (Eigen::Index c = 0; c < b.values.cols(); ++c)
      if (std::find(cols.begin(), cols.end(), static_cast<int>(c)) == cols.end()) b.values.col(c).setZero();
  };
  keep(out.cell, {0, 1, 5});  // x, y, net count
  keep(out.net, {3});         // degree
  for (auto& b : out.grid) keep(b, {0});
  keep(out.pin, {0});
  keep(out.geom, {0, 1});
  return out;
}

void dump_features(const FeatureSet& fs, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const FeatureBlock& b, const std::string& name) {
    std::ofstream bin(dir + "/" + name + ".bin", std::ios::binary);
    if (!bin) throw UsageError("cannot write feature dump in '" + dir + "'");
    binio::put_u32(bin, static_cast<std::uint32_t>(b.values.rows()));
    binio::put_u32(bin, static_cast<std::uint32_t>(b.values.cols()));
    for (Eigen::Index r = 0; r < b.values.rows(); ++r)
      for (Eigen::Index c = 0; c < b.values.cols(); ++c) binio::put_f64(bin, b.values(r, c));
    nlohmann::ordered_json j;
    j["rows"] = b.values.rows();
    j["columns"] = b.columns;
    j["indicator"] = b.indicator;
    j["mean"] = b.mean;
    j["std"] = b.std;
    std::ofstream(dir + "/" + name + ".json") << j.dump(2) << "\n";
  };
  write(fs.cell, "cell");
  write(fs.net, "net");
  for (std::size_t l = 0; l < fs.grid.size(); ++l) write(fs.grid[l], "grid" + std::to_string(l));
  write(fs.pin, "pin");
  write(fs.geom, "geom");
}

}  // namespace hetcong
