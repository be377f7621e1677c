#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "hetcong/error.hpp"
#include "hetcong/features.hpp"
#include "hetcong/model.hpp"
#include "hetcong/oracle.hpp"
#include "hetcong/train.hpp"
#include "oracles.hpp"

using namespace hetcong;

namespace {

ModelConfig small_config(std::size_t d = 8) {
  ModelConfig c;
  c.hidden = d;
  c.layers = 2;
  c.grid_levels = 2;
  return c;
}

ModelInputs inputs_for(const Design& d, const ModelConfig& cfg, std::size_t m = 4, std::size_t n = 4) {
  const HeteroGraph g = build_graph(d, make_grid_spec(d, m, n, cfg.grid_levels), GraphOptions{cfg.k_geom, 1000, 256});
  return make_inputs(g, featurize(d, g), cfg);
}

Design design_for_model(std::uint64_t seed = 2) { return oracle::random_design(seed, 30, 24); }

double max_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("parameter shapes follow the architecture") {
  const ModelConfig cfg = small_config(16);
  const ModelParams p = init_params(cfg, 1);
  CHECK(p.at("enc.cell.W").rows() == 13);
  CHECK(p.at("enc.net.W").rows() == 6);
  CHECK(p.at("enc.grid.W").rows() == 5);
  CHECK(p.at("layer0.pin_mlp.0.W").rows() == 16 + 3);
  CHECK(p.at("layer1.geom_gate.W").rows() == 2 * 16 + 4);
  CHECK(p.at("layer1.geom_gate.W").cols() == 1);
  CHECK(p.at("layer0.cell_update.W").rows() == 3 * 16);
  CHECK(p.at("layer0.grid_update.W").rows() == 2 * 16);
  CHECK(p.at("hier.gate.W").rows() == 2 * 16);
  CHECK(p.at("head.cell.0.W").rows() == 2 * 16);
  CHECK(p.at("head.grid.1.W").cols() == 1);
  CHECK(p.count("layer0.grid_to_net.b") == 0);
  CHECK(p.count("hier.fine_to_coarse0.W") == 1);
  CHECK_NOTHROW(check_params(p, cfg));
}

TEST_CASE("initialization is seeded and bounded") {
  ModelConfig cfg = small_config(4);
  const ModelParams a = init_params(cfg, 3), b = init_params(cfg, 3), c = init_params(cfg, 4);
  bool differs = false;
  for (const auto& [name, m] : a) {
    CHECK(m == b.at(name));
    differs |= m != c.at(name);
  }
  CHECK(differs);
  for (const ParamShape& s : param_shapes(cfg)) {
    const Matrix& m = a.at(s.name);
    if (s.bias) {
      CHECK(m.cwiseAbs().maxCoeff() == 0);
    } else {
      CHECK(m.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / static_cast<double>(s.rows + s.cols)));
    }
  }
}

TEST_CASE("degenerate design runs forward") {
  Design d;
  d.name = "one";
  d.die = {0, 0, 10, 10};
  d.masters["M"] = Master{1, 1, false, {}};
  d.cells.push_back(Cell{0, "c", "M", 3, 3, 1, 1, false});
  ModelConfig cfg = small_config();
  cfg.grid_levels = 1;
  const ModelInputs in = inputs_for(d, cfg, 1, 1);
  const Prediction p = predict(init_params(cfg, 0), in, cfg);
  REQUIRE(p.cell.size() == 1);
  REQUIRE(p.grid.size() == 1);
  CHECK(std::isfinite(p.cell(0)));
  CHECK((p.cell(0) > 0 && p.cell(0) < 1));
  CHECK((p.grid(0) > 0 && p.grid(0) < 1));
}

TEST_CASE("outputs lie in (0, 1)") {
  const ModelConfig cfg = small_config();
  const Prediction p = predict(init_params(cfg, 7), inputs_for(design_for_model(), cfg), cfg);
  CHECK(p.cell.minCoeff() > 0);
  CHECK(p.cell.maxCoeff() < 1);
  CHECK(p.grid.minCoeff() > 0);
  CHECK(p.grid.maxCoeff() < 1);
}

TEST_CASE("permuting cells and nets permutes predictions") {
  const ModelConfig cfg = small_config();
  const Design d = design_for_model(5);
  std::vector<std::size_t> perm(d.cells.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(17);
  std::shuffle(perm.begin(), perm.end(), rng);  // new id of old cell i is perm[i]
  Design q = d;
  for (const Cell& c : d.cells) {
    q.cells[perm[c.id]] = c;
    q.cells[perm[c.id]].id = perm[c.id];
  }
  for (Net& net : q.nets)
    for (NetPin& p : net.pins) p.cell = perm[p.cell];
  std::reverse(q.nets.begin(), q.nets.end());
  for (std::size_t i = 0; i < q.nets.size(); ++i) q.nets[i].id = i;

  const ModelParams params = init_params(cfg, 2);
  const Prediction a = predict(params, inputs_for(d, cfg), cfg);
  const Prediction b = predict(params, inputs_for(q, cfg), cfg);
  for (std::size_t i = 0; i < d.cells.size(); ++i)
    CHECK(std::abs(a.cell(static_cast<Eigen::Index>(i)) - b.cell(static_cast<Eigen::Index>(perm[i]))) < 1e-9);
  CHECK(max_diff(a.grid, b.grid) < 1e-9);
}

TEST_CASE("zeroed residual updates are the identity") {
  ModelConfig cfg = small_config();
  ModelParams p = init_params(cfg, 9);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    p[pre + "cell_update.W"].setZero();
    p[pre + "grid_update.W"].setZero();
  }
  const ModelInputs in = inputs_for(design_for_model(), cfg);
  ad::Tape t;
  const ForwardResult r = forward(t, bind_params(t, p, false), in, cfg);
  const Matrix enc = (in.cell_x * p.at("enc.cell.W")).rowwise() + p.at("enc.cell.b").row(0);
  CHECK((r.cell_embedding.value() - enc.cwiseMax(0.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("disabling a relation equals zeroing its parameters") {
  const ModelConfig base = small_config();
  const ModelInputs in = inputs_for(design_for_model(3), base);
  const ModelParams p = init_params(base, 4);

  auto compare = [&](auto toggle, const std::vector<std::string>& zeroed) {
    ModelConfig off = base;
    toggle(off);
    ModelParams z = p;
    for (std::size_t l = 0; l < base.layers; ++l)
      for (const std::string& name : zeroed) {
        const std::string key = name.rfind("layer.", 0) == 0 ? "layer" + std::to_string(l) + name.substr(5) : name;
        if (z.count(key)) z[key].setZero();
      }
    const Prediction a = predict(p, in, off), b = predict(z, in, base);
    CHECK(max_diff(a.cell, b.cell) < 1e-12);
    CHECK(max_diff(a.grid, b.grid) < 1e-12);
  };
  compare([](ModelConfig& c) { c.geom_mp = false; }, {"layer.geom_msg.W"});
  compare([](ModelConfig& c) { c.grid_net_mp = false; }, {"layer.grid_to_net.W"});
  compare([](ModelConfig& c) { c.gated_aggregation = false; },
          {"layer.geom_gate.W", "layer.geom_gate.b", "hier.gate.W", "hier.gate.b"});
}

TEST_CASE("hierarchy switch and gate saturation") {
  ModelConfig cfg = small_config();
  const ModelInputs in = inputs_for(design_for_model(6), cfg);
  ModelParams p = init_params(cfg, 5);
  ModelConfig flat = cfg;
  flat.hierarchical_grid = false;
  ad::Tape t;
  const ForwardResult off = forward(t, bind_params(t, p, false), in, flat);
  // Without the hierarchy the fused embedding is the level-0 grid embedding.
  ad::Tape t2;
  p["hier.gate.b"].setConstant(-60.0);
  const ForwardResult closed = forward(t2, bind_params(t2, p, false), in, cfg);
  CHECK((off.grid_embedding.value() - closed.grid_embedding.value()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("non-finite parameters are reported") {
  const ModelConfig cfg = small_config();
  ModelParams p = init_params(cfg, 1);
  p["layer1.grid_to_net.W"](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(check_params(p, cfg), NumericError);
  const ModelInputs in = inputs_for(design_for_model(), cfg);
  try {
    predict(p, in, cfg);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
  }
}

TEST_CASE("mismatched inputs are rejected") {
  ModelConfig cfg = small_config();
  const Design d = design_for_model();
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 4, 4, 1));
  CHECK_THROWS_AS(make_inputs(g, featurize(d, g), cfg), NumericError);
}

TEST_CASE("end-to-end gradient of the training loss") {
  ModelConfig cfg = small_config(4);
  const Design d = oracle::random_design(12, 14, 10, 4000, 4000);
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 4, 4, 2), GraphOptions{4, 1000, 256});
  const ModelInputs in = make_inputs(g, featurize(d, g), cfg);
  const CongestionLabels y = rudy_labels(d, g);
  const TrainConfig tc;
  ModelParams p = init_params(cfg, 21);
  for (auto& [name, m] : p)
    if (name.size() > 2 && name.substr(name.size() - 2) == ".b") m.setConstant(0.05);

  auto loss_of = [&](const ModelParams& q) {
    ad::Tape t;
    const ForwardResult f = forward(t, bind_params(t, q), in, cfg);
    return total_loss(f.cell_pred, f.grid_pred, y, tc, cfg).total.value()(0, 0);
  };
  ad::Tape t;
  const ParamVars vars = bind_params(t, p);
  const ForwardResult f = forward(t, vars, in, cfg);
  t.backward(total_loss(f.cell_pred, f.grid_pred, y, tc, cfg).total);
  const auto numeric = oracle::numeric_gradient(p, loss_of);
  for (const auto& [name, v] : vars) {
    const Matrix an = v.grad().size() ? v.grad() : Matrix::Zero(v.rows(), v.cols());
    INFO(name);
    CHECK(oracle::max_rel_error(an, numeric.at(name)) < 1e-4);
  }
}

TEST_CASE("checkpoint round trip") {
  ModelConfig cfg = small_config(6);
  cfg.geom_mp = false;
  cfg.k_geom = 5;
  const ModelParams p = init_params(cfg, 8);
  const std::string bytes = encode_checkpoint(cfg, p);
  CHECK(bytes.substr(0, 4) == "VHGN");
  const auto [cfg2, p2] = decode_checkpoint(bytes);
  CHECK(cfg2 == cfg);
  REQUIRE(p2.size() == p.size());
  for (const auto& [name, m] : p) CHECK(p2.at(name) == m.cast<float>().cast<double>());
  CHECK(encode_checkpoint(cfg2, p2) == bytes);

  CHECK_THROWS_AS(decode_checkpoint("XXXX" + bytes.substr(4)), ParseError);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), ParseError);
  std::string future = bytes;
  future[4] = 9;
  CHECK_THROWS_AS(decode_checkpoint(future), ParseError);
}
