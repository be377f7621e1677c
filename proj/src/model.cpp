#include "hetcong/model.hpp"

#include <cmath>
#include <random>

#include "hetcong/error.hpp"

namespace hetcong {

void ModelConfig::validate() const {
  if (hidden == 0 || layers == 0 || grid_levels == 0)
    throw ValidationError("model hidden size, layer count and grid levels must be at least 1");
}

std::vector<ParamShape> param_shapes(const ModelConfig& cfg) {
  const auto d = static_cast<Eigen::Index>(cfg.hidden);
  std::vector<ParamShape> s;
  auto linear = [&](const std::string& name, Eigen::Index in, Eigen::Index out, bool with_bias = true) {
    s.push_back({name + ".W", in, out, false});
    if (with_bias) s.push_back({name + ".b", 1, out, true});
  };
  linear("enc.cell", kCellFeatures, d);
  linear("enc.net", kNetFeatures, d);
  linear("enc.grid", kGridFeatures, d);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    linear(p + "pin_mlp.0", d + kPinFeatures, d);
    linear(p + "pin_mlp.1", d, d);
    linear(p + "grid_to_net", d, d, false);
    linear(p + "net_update", 3 * d, d);
    linear(p + "net_to_cell", d, d, false);
    linear(p + "geom_gate", 2 * d + kGeomFeatures, 1);
    linear(p + "geom_msg", d, d, false);
    linear(p + "cell_update", 3 * d, d);
    linear(p + "cell_to_grid", d, d, false);
    linear(p + "grid_update", 2 * d, d);
  }
  for (std::size_t l = 0; l + 1 < cfg.grid_levels; ++l) {
    linear("hier.fine_to_coarse" + std::to_string(l), d, d);
    linear("hier.coarse_to_fine" + std::to_string(l), d, d);
  }
  linear("hier.gate", 2 * d, d);
  linear("head.cell.0", 2 * d, d);
  linear("head.cell.1", d, 1);
  linear("head.grid.0", d, d);
  linear("head.grid.1", d, 1);
  return s;
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  ModelParams p;
  for (const ParamShape& s : param_shapes(cfg)) {
    if (s.bias) {
      p.emplace(s.name, Matrix::Zero(s.rows, s.cols));
      continue;
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix w(s.rows, s.cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    p.emplace(s.name, std::move(w));
  }
  return p;
}

void check_params(const ModelParams& p, const ModelConfig& cfg) {
  const auto shapes = param_shapes(cfg);
  if (p.size() != shapes.size())
    throw NumericError("parameter set has " + std::to_string(p.size()) + " entries, configuration expects " +
                       std::to_string(shapes.size()));
  for (const ParamShape& s : shapes) {
    auto it = p.find(s.name);
    if (it == p.end()) throw NumericError("missing parameter '" + s.name + "'");
    if (it->second.rows() != s.rows || it->second.cols() != s.cols)
      throw NumericError("parameter '" + s.name + "' has shape " + std::to_string(it->second.rows()) + "x" +
                         std::to_string(it->second.cols()) + ", expected " + std::to_string(s.rows) + "x" +
                         std::to_string(s.cols));
    if (!it->second.allFinite()) throw NumericError("parameter '" + s.name + "' is not finite");
  }
}

ModelInputs make_inputs(const HeteroGraph& g, const FeatureSet& raw_fs, const ModelConfig& cfg) {
  cfg.validate();
  if (g.levels() != cfg.grid_levels)
    throw NumericError("graph has " + std::to_string(g.levels()) + " grid levels, model expects " +
                       std::to_string(cfg.grid_levels));
  const FeatureSet fs = cfg.enriched_features ? raw_fs : minimal_features(raw_fs);
  ModelInputs in;
  in.n_cells = g.n_cells;
  in.n_nets = g.n_nets;
  for (std::size_t l = 0; l < g.levels(); ++l) in.level_tiles.push_back(g.level_tiles(l));
  for (const PinEdge& e : g.pin_edges) {
    in.pin_cell.push_back(e.cell);
    in.pin_net.push_back(e.net);
  }
  for (std::size_t e = 0; e < g.net2grids.size(); ++e)
    for (std::size_t t : g.net2grids[e]) {
      in.net_tile.push_back(t);
      in.tile_net.push_back(e);
    }
  for (const auto& [i, j] : g.geom_edges) {
    in.geom_src.push_back(i);
    in.geom_dst.push_back(j);
  }
  in.cell_tile = g.cell2grid;
  in.parent = g.parent;

  auto check = [](const Matrix& m, std::size_t rows, int cols, const char* what) {
    if (static_cast<std::size_t>(m.rows()) != rows || m.cols() != cols)
      throw NumericError(std::string(what) + " features have shape " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  };
  check(fs.cell.values, g.n_cells, kCellFeatures, "cell");
  check(fs.net.values, g.n_nets, kNetFeatures, "net");
  check(fs.pin.values, g.pin_edges.size(), kPinFeatures, "pin-edge");
  check(fs.geom.values, g.geom_edges.size(), kGeomFeatures, "geometric-edge");
  if (fs.grid.size() != g.levels()) throw NumericError("grid feature levels do not match the graph");
  for (std::size_t l = 0; l < g.levels(); ++l) check(fs.grid[l].values, g.level_tiles(l), kGridFeatures, "grid");

  in.cell_x = fs.cell.values;
  in.net_x = fs.net.values;
  in.pin_x = fs.pin.values;
  in.geom_x = fs.geom.values;
  for (const auto& b : fs.grid) in.grid_x.push_back(b.values);
  return in;
}

ParamVars bind_params(ad::Tape& tape, const ModelParams& p, bool differentiable) {
  ParamVars v;
  for (const auto& [name, m] : p) v.emplace(name, differentiable ? tape.leaf(m) : tape.constant(m));
  return v;
}

namespace {

class Layers {
 public:
  Layers(ad::Tape& t, const ParamVars& p) : t_(t), p_(p) {}

  ad::Var w(const std::string& name) const {
    auto it = p_.find(name);
    if (it == p_.end()) throw NumericError("missing parameter '" + name + "'");
    return it->second;
  }
  ad::Var linear(ad::Var x, const std::string& name) const {
    ad::Var y = ad::matmul(x, w(name + ".W"));
    auto b = p_.find(name + ".b");
    return b == p_.end() ? y : ad::add_bias(y, b->second);
  }
  struct Part {
    ad::Var x;
    const ad::Index* gather = nullptr;  // rows of the product to pick, if any
  };
  /// linear(concat_cols(gathered parts)) computed part by part, so each
  /// product happens before the (possibly larger) gather.
  ad::Var linear(std::initializer_list<Part> parts, const std::string& name) const {
    const ad::Var weight = w(name + ".W");
    ad::Var y;
    Eigen::Index at = 0;
    for (const Part& part : parts) {
      ad::Var term = ad::matmul(part.x, ad::slice_rows(weight, at, part.x.cols()));
      if (part.gather) term = ad::gather_rows(term, *part.gather);
      y = at == 0 ? term : ad::add(y, term);
      at += part.x.cols();
    }
    if (at != weight.rows())
      throw NumericError(name + ": inputs have " + std::to_string(at) + " columns, weight has " +
                         std::to_string(weight.rows()) + " rows");
    auto b = p_.find(name + ".b");
    return b == p_.end() ? y : ad::add_bias(y, b->second);
  }
  ad::Var zeros(std::size_t rows, Eigen::Index cols) const {
    return t_.constant(Matrix::Zero(static_cast<Eigen::Index>(rows), cols));
  }
  ad::Var half(std::size_t rows) const { return t_.constant(Matrix::Constant(static_cast<Eigen::Index>(rows), 1, 0.5)); }
  ad::Var input(const Matrix& m) const { return t_.constant(m); }

 private:
  ad::Tape& t_;
  const ParamVars& p_;
};

void finite_or_throw(ad::Var v, const std::string& where) {
  if (!v.value().allFinite()) throw NumericError("non-finite activation in " + where);
}

}  // namespace

ForwardResult forward(ad::Tape& tape, const ParamVars& p, const ModelInputs& in, const ModelConfig& cfg) {
  using namespace ad;
  const Layers nn(tape, p);
  const auto d = static_cast<Eigen::Index>(cfg.hidden);
  const std::size_t tiles0 = in.level_tiles.at(0);

  Var hc = relu(nn.linear(nn.input(in.cell_x), "enc.cell"));
  Var hn = relu(nn.linear(nn.input(in.net_x), "enc.net"));
  std::vector<Var> hg;
  for (const Matrix& gx : in.grid_x) hg.push_back(relu(nn.linear(nn.input(gx), "enc.grid")));
  finite_or_throw(hc, "input encoders");
  finite_or_throw(hn, "input encoders");
  for (const Var& v : hg) finite_or_throw(v, "input encoders");

  const Var pin_x = nn.input(in.pin_x);
  const Var geom_x = nn.input(in.geom_x);

  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    auto where = [&](const char* rel) { return "layer " + std::to_string(l) + " relation " + rel; };

    // cell -> net over pin edges
    // The second MLP layer is affine, so it is applied after the mean; every net has a pin.
    Var hidden = relu(nn.linear({{hc, &in.pin_cell}, {pin_x}}, pre + "pin_mlp.0"));
    Var net_from_cells = nn.linear(segment_mean(hidden, in.pin_net, in.n_nets), pre + "pin_mlp.1");
    finite_or_throw(net_from_cells, where("cell->net"));

    // grid -> net over bounding-box incidence
    Var net_from_grid = nn.zeros(in.n_nets, d);
    if (cfg.grid_net_mp) {
      Var projected = matmul(hg[0], nn.w(pre + "grid_to_net.W"));
      net_from_grid = segment_mean(gather_rows(projected, in.net_tile), in.tile_net, in.n_nets);
      finite_or_throw(net_from_grid, where("grid->net"));
    }

    hn = add(relu(nn.linear({{net_from_cells}, {net_from_grid}, {hn}}, pre + "net_update")), hn);
    finite_or_throw(hn, where("net update"));

    // net -> cell
    Var to_cell = matmul(hn, nn.w(pre + "net_to_cell.W"));
    Var cell_from_nets = segment_mean(gather_rows(to_cell, in.pin_net), in.pin_cell, in.n_cells);
    finite_or_throw(cell_from_nets, where("net->cell"));

    // gated geometric cell -> cell
    Var cell_from_geom = nn.zeros(in.n_cells, d);
    if (cfg.geom_mp) {
      Var alpha = nn.half(in.geom_src.size());
      if (cfg.gated_aggregation) {
        alpha = sigmoid(nn.linear({{hc, &in.geom_src}, {hc, &in.geom_dst}, {geom_x}}, pre + "geom_gate"));
      }
      Var neighbour = gather_rows(matmul(hc, nn.w(pre + "geom_msg.W")), in.geom_dst);
      cell_from_geom = segment_mean(scale_rows(neighbour, alpha), in.geom_src, in.n_cells);
      finite_or_throw(cell_from_geom, where("geometric cell->cell"));
    }

    hc = add(relu(nn.linear({{hc}, {cell_from_nets}, {cell_from_geom}}, pre + "cell_update")), hc);
    finite_or_throw(hc, where("cell update"));

    // cell -> grid, level 0
    Var to_grid = matmul(hc, nn.w(pre + "cell_to_grid.W"));
    Var grid_from_cells = segment_mean(to_grid, in.cell_tile, tiles0);
    hg[0] = add(relu(nn.linear({{hg[0]}, {grid_from_cells}}, pre + "grid_update")), hg[0]);
    finite_or_throw(hg[0], where("cell->grid"));
  }

  Var fused = hg[0];
  if (cfg.hierarchical_grid && cfg.grid_levels > 1) {
    // Bottom-up: each coarse node summarizes its children on top of its own encoding.
    std::vector<Var> up{hg[0]};
    for (std::size_t l = 0; l + 1 < cfg.grid_levels; ++l) {
      Var pooled = segment_mean(up[l], in.parent[l], in.level_tiles[l + 1]);
      up.push_back(add(relu(nn.linear(pooled, "hier.fine_to_coarse" + std::to_string(l))), hg[l + 1]));
      finite_or_throw(up.back(), "hierarchy fine->coarse level " + std::to_string(l + 1));
    }
    // Top-down: children receive a projection of their parent.
    Var down = up.back();
    Var propagated;
    for (std::size_t l = cfg.grid_levels - 1; l-- > 0;) {
      propagated = nn.linear(gather_rows(down, in.parent[l]), "hier.coarse_to_fine" + std::to_string(l));
      finite_or_throw(propagated, "hierarchy coarse->fine level " + std::to_string(l));
      down = l > 0 ? add(up[l], propagated) : propagated;
    }
    Var gamma = cfg.gated_aggregation
                    ? sigmoid(nn.linear({{hg[0]}, {propagated}}, "hier.gate"))
                    : tape.constant(Matrix::Constant(static_cast<Eigen::Index>(tiles0), d, 0.5));
    fused = add(mul(gamma, propagated), mul(one_minus(gamma), hg[0]));
    finite_or_throw(fused, "hierarchy gated integration");
  }

  Var cell_hidden = relu(nn.linear({{hc}, {fused, &in.cell_tile}}, "head.cell.0"));
  Var cell_pred = sigmoid(nn.linear(cell_hidden, "head.cell.1"));
  Var grid_pred = sigmoid(nn.linear(relu(nn.linear(fused, "head.grid.0")), "head.grid.1"));
  finite_or_throw(cell_pred, "cell head");
  finite_or_throw(grid_pred, "grid head");
  return {cell_pred, grid_pred, hc, fused};
}

Prediction predict(const ModelParams& p, const ModelInputs& in, const ModelConfig& cfg) {
  ad::Tape tape;
  const ParamVars vars = bind_params(tape, p, false);
  const ForwardResult r = forward(tape, vars, in, cfg);
  return {r.cell_pred.value().col(0), r.grid_pred.value().col(0)};
}

}  // namespace hetcong
