#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "hetcong/features.hpp"
#include "hetcong/oracle.hpp"
#include "oracles.hpp"

using namespace hetcong;

namespace {

Design two_pin_design() {
  Design d;
  d.name = "two";
  d.die = {0, 0, 10, 10};
  d.masters["M"] = Master{1, 1, false, {}};
  d.cells = {Cell{0, "a", "M", 0, 0, 1, 1, false}, Cell{1, "b", "M", 2, 3, 1, 1, false},
             Cell{2, "c", "N", 6, 6, 2, 2, false}};
  d.masters["N"] = Master{2, 2, false, {}};
  d.nets = {Net{0, "n", {{0, PinDirection::Output, 0, 0}, {1, PinDirection::Input, 0, 0}}}};
  return d;
}

}  // namespace

TEST_CASE("net features on a two-pin net") {
  const Design d = two_pin_design();
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 2, 2, 1));
  const Matrix x = net_features(d, g);
  CHECK(x(0, 0) == 5);
  CHECK(x(0, 1) == 2);
  CHECK(x(0, 2) == 3);
  CHECK(x(0, 3) == 2);
  CHECK(x(0, 4) == doctest::Approx(std::log(2.0)));
  CHECK(x(0, 5) == 6);
}

TEST_CASE("cell features follow the column conventions") {
  const Design d = two_pin_design();
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 2, 2, 1));
  const Matrix x = cell_features(d, g);
  REQUIRE(x.cols() == kCellFeatures);
  CHECK(x(2, 4) == 4);  // area of a 2x2 cell
  for (int col : {5, 6, 7, 8, 9, 11}) CHECK(x(2, col) == 0);  // isolated cell
  CHECK(x(0, 5) == 1);
  CHECK(x(0, 7) == 5);
  CHECK(x(0, 11) == 0);  // only an output pin
  CHECK(x(1, 11) == 1);
  CHECK(x(0, 12) == doctest::Approx(2.0 / 3));
  CHECK(x(2, 12) == doctest::Approx(1.0 / 3));
}

TEST_CASE("single-pin net and degenerate aggregates") {
  Design d = two_pin_design();
  d.nets[0].pins.pop_back();
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 2, 2, 1));
  const Matrix x = net_features(d, g);
  CHECK(x(0, 0) == 0);
  CHECK(x(0, 3) == 1);
  CHECK(x(0, 4) == 0);
  CHECK(x(0, 5) == 0);
}

TEST_CASE("4-pin net HPWL equals the per-axis spread") {
  const Design d = oracle::random_design(9, 30, 60);
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 4, 4, 1));
  const Matrix x = net_features(d, g);
  for (const Net& net : d.nets) {
    double lox = 1e18, hix = -1e18, loy = 1e18, hiy = -1e18;
    for (const NetPin& p : net.pins) {
      lox = std::min(lox, pin_x(d, p)), hix = std::max(hix, pin_x(d, p));
      loy = std::min(loy, pin_y(d, p)), hiy = std::max(hiy, pin_y(d, p));
    }
    CHECK(x(static_cast<Eigen::Index>(net.id), 0) == doctest::Approx((hix - lox) + (hiy - loy)));
  }
}

TEST_CASE("grid densities are max-normalized") {
  Design d;
  d.name = "g";
  d.die = {0, 0, 100, 100};
  d.masters["M"] = Master{1, 1, false, {}};
  for (std::size_t i = 0; i < 3; ++i) d.cells.push_back(Cell{i, "c" + std::to_string(i), "M", 10 + Dbu(i), 10, 1, 1, false});
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 2, 2, 1));
  const Matrix x = grid_features(d, g, 0);
  CHECK(x(0, 0) == 1);
  for (int t = 1; t < 4; ++t)
    for (int c = 0; c < kGridFeatures; ++c) CHECK(x(t, c) == 0);
}

TEST_CASE("pin offsets and geometric edges") {
  Design d;
  d.name = "p";
  d.die = {0, 0, 100, 100};
  d.masters["M"] = Master{2, 2, false, {}};
  d.cells = {Cell{0, "a", "M", 0, 0, 2, 2, false}, Cell{1, "b", "M", 30, 40, 2, 2, false},
             Cell{2, "c", "M", 14, 19, 2, 2, false}};
  d.nets = {Net{0, "n", {{0, PinDirection::Output, 1, 1}, {1, PinDirection::Input, 1, 1}, {2, PinDirection::Input, 1, 1}}}};
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 4, 4, 1), GraphOptions{2, 1000, 256});
  const Matrix p = pin_edge_features(d, g);
  CHECK(p(0, 0) == 1);
  CHECK(p(1, 0) == 0);
  // cell c sits at the bbox centroid (16, 21) minus one: offset (15 - 16) / 30
  CHECK(p(2, 1) == doctest::Approx(-1.0 / 30));
  const Matrix e = geom_edge_features(d, g);
  for (std::size_t k = 0; k < g.geom_edges.size(); ++k) {
    if (g.geom_edges[k] != std::pair<std::size_t, std::size_t>{0, 1}) continue;
    CHECK(e(static_cast<Eigen::Index>(k), 2) == doctest::Approx(70.0 / 100));
    CHECK(e(static_cast<Eigen::Index>(k), 3) == doctest::Approx(50.0 / 100));
  }
}

TEST_CASE("standardization") {
  FeatureSet fs;
  fs.cell.values = Matrix(2, 2);
  fs.cell.values << 0, 1, 2, 0;
  fs.cell.columns = {"v", "flag"};
  fs.cell.indicator = {false, true};
  fs.net.values = Matrix::Constant(3, 1, 7.0);
  fs.net.columns = {"k"};
  fs.net.indicator = {false};
  const FeatureSet s = standardize(fs);
  CHECK(s.cell.values(0, 0) == doctest::Approx(-1));
  CHECK(s.cell.values(1, 0) == doctest::Approx(1));
  CHECK(s.cell.values(0, 1) == 1);
  CHECK(s.cell.values(1, 1) == 0);
  CHECK(s.cell.mean[0] == 1);
  CHECK(s.cell.std[0] == 1);
  CHECK(s.net.values.cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("featurize invariants on synthetic designs") {
  for (std::uint64_t seed : {1u, 2u}) {
    SynthSpec spec;
    spec.n_cells = 250;
    spec.n_nets = 260;
    spec.seed = seed;
    const Design d = synth_design(spec);
    const HeteroGraph g = build_graph(d, make_grid_spec(d, 8, 8, 2));
    const FeatureSet fs = featurize(d, g);
    std::vector<const FeatureBlock*> blocks{&fs.cell, &fs.net, &fs.pin, &fs.geom};
    for (const auto& b : fs.grid) blocks.push_back(&b);
    for (const FeatureBlock* b : blocks) {
      REQUIRE(b->values.allFinite());
      for (Eigen::Index c = 0; c < b->values.cols(); ++c) {
        const auto col = b->values.col(c);
        if (b->indicator[static_cast<std::size_t>(c)]) {
          CHECK((col.array() * (col.array() - 1.0)).abs().maxCoeff() == 0);
          continue;
        }
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().mean());
        CHECK(std::abs(mean) < 1e-6);
        CHECK((sd < 1e-12 || std::abs(sd - 1) < 1e-6));
      }
    }
    const FeatureSet twice = standardize(fs);
    CHECK((twice.cell.values - fs.cell.values).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("standardized features are translation invariant") {
  SynthSpec spec;
  spec.n_cells = 120;
  spec.n_nets = 130;
  const Design d = synth_design(spec);
  Design shifted = d;
  const Dbu tx = 1200, ty = -700;
  shifted.die = {d.die.x0 + tx, d.die.y0 + ty, d.die.x1 + tx, d.die.y1 + ty};
  for (Cell& c : shifted.cells) c.x += tx, c.y += ty;
  const HeteroGraph ga = build_graph(d, make_grid_spec(d, 8, 8, 2));
  const HeteroGraph gb = build_graph(shifted, make_grid_spec(shifted, 8, 8, 2));
  const FeatureSet a = featurize(d, ga), b = featurize(shifted, gb);
  CHECK((a.cell.values - b.cell.values).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.net.values - b.net.values).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.grid[0].values - b.grid[0].values).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.pin.values - b.pin.values).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((a.geom.values - b.geom.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("feature dump writes one matrix and sidecar per class") {
  const Design d = two_pin_design();
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 2, 2, 1));
  const auto dir = std::filesystem::temp_directory_path() / "hetcong_dump_test";
  std::filesystem::remove_all(dir);
  dump_features(featurize(d, g), dir.string());
  CHECK(std::filesystem::exists(dir / "cell.bin"));
  CHECK(std::filesystem::exists(dir / "cell.json"));
  CHECK(std::filesystem::file_size(dir / "cell.bin") == 8 + 3 * kCellFeatures * 8);
  std::filesystem::remove_all(dir);
}
