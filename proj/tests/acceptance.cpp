// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "hetcong/metrics.hpp"
#include "hetcong/netlist_io.hpp"
#include "hetcong/pipeline.hpp"
#include "oracles.hpp"

using namespace hetcong;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  [%d] %s  (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string num(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1. Every parameter gradient of the total loss against central differences.
Outcome gradient_check() {
  const auto t0 = Clock::now();
  ModelConfig mc;
  mc.hidden = 16;
  mc.layers = 2;
  mc.grid_levels = 2;
  const Design d = oracle::random_design(2024, 50, 40);
  const HeteroGraph g = build_graph(d, make_grid_spec(d, 4, 4, 2), GraphOptions{mc.k_geom, 1000, 256});
  const ModelInputs in = make_inputs(g, featurize(d, g), mc);
  const CongestionLabels y = rudy_labels(d, g);
  const TrainConfig tc;
  const ModelParams p = init_params(mc, 7);

  ad::Tape tape;
  const ParamVars vars = bind_params(tape, p);
  const ForwardResult f = forward(tape, vars, in, mc);
  tape.backward(total_loss(f.cell_pred, f.grid_pred, y, tc, mc).total);
  const auto numeric = oracle::numeric_gradient(
      p,
      [&](const ModelParams& q) {
        ad::Tape t;
        const ForwardResult r = forward(t, bind_params(t, q, false), in, mc);
        return total_loss(r.cell_pred, r.grid_pred, y, tc, mc).total.value()(0, 0);
      },
      1e-5);
  double worst = 0;
  std::string worst_name;
  std::size_t entries = 0;
  for (const auto& [name, v] : vars) {
    const Matrix an = v.grad().size() ? v.grad() : Matrix::Zero(v.rows(), v.cols());
    const double e = oracle::max_rel_error(an, numeric.at(name));
    entries += static_cast<std::size_t>(an.size());
    if (e > worst) worst = e, worst_name = name;
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 120,
          std::to_string(entries) + " entries, max rel err " + num(worst) + " at " + worst_name + ", " + num(secs) + "s"};
}

// 2. Metrics against O(n^2) brute force.
Outcome metrics_check() {
  std::mt19937_64 rng(77);
  double worst = 0;
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 499;
    const bool ties = trial % 2 == 1;
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> small(0, 9);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = ties ? small(rng) : nd(rng);
      b[i] = ties ? small(rng) + 0.3 * a[i] : 0.6 * a[i] + nd(rng);
    }
    if (n == 2 || ties) a[0] = -1, a[1] = 20, b[0] = -1, b[1] = 20;  // keep both vectors non-constant
    const Vector va = Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(n));
    const Vector vb = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(n));
    const auto k = kendall(va, vb);
    const auto bk = oracle::brute_kendall(a, b);
    std::vector<double> errs{std::abs(*pearson(va, vb) - oracle::brute_pearson(a, b)),
                             std::abs(*spearman(va, vb) - oracle::brute_spearman(a, b)),
                             std::abs(*k.tau_b - bk.tau_b), std::abs(mae(va, vb) - oracle::brute_mae(a, b)),
                             std::abs(rmse(va, vb) - oracle::brute_rmse(a, b))};
    if (k.tau_a.has_value() == bk.has_ties) errs.push_back(1.0);
    if (k.tau_a) errs.push_back(std::abs(*k.tau_a - bk.tau_a));
    for (double e : errs) worst = std::max(worst, e);
    ++checked;
  }
  return {worst <= 1e-12, std::to_string(checked) + " vector pairs, max abs err " + num(worst)};
}

// 3. Structural invariants of the heterogeneous graph.
Outcome graph_invariants() {
  std::mt19937_64 rng(5);
  std::size_t violations = 0;
  for (int k = 0; k < 50; ++k) {
    SynthSpec s;
    s.seed = 1000 + static_cast<std::uint64_t>(k);
    s.n_cells = 50 + rng() % 600;
    s.n_nets = 20 + rng() % 700;
    s.n_macros = rng() % 3;
    s.clusters = 1 + rng() % 4;
    const Design d = synth_design(s);
    const std::size_t m = 1 + rng() % 40, n = 1 + rng() % 40;
    std::size_t levels = 1;
    while (levels < 4 && ((std::max(m, n) - 1) >> levels) > 0) ++levels;
    levels = 1 + rng() % levels;
    const GridSpec spec = make_grid_spec(d, m, n, levels);
    const HeteroGraph g = build_graph(d, spec, GraphOptions{1 + rng() % 10, 1000, 256});

    std::size_t pins = 0;
    for (const Net& net : d.nets) pins += net.pins.size();
    violations += g.pin_edges.size() != pins;

    for (std::size_t l = 0; l < levels; ++l) {
      const std::size_t div = std::size_t{1} << l;
      violations += spec.tiles(l) != ((m + div - 1) / div) * ((n + div - 1) / div);
      violations += g.level_tiles(l) != spec.tiles(l);
      for (auto [a, b] : g.grid_adj_edges[l]) {
        const long ax = static_cast<long>(a % spec.cols(l)), ay = static_cast<long>(a / spec.cols(l));
        const long bx = static_cast<long>(b % spec.cols(l)), by = static_cast<long>(b / spec.cols(l));
        violations += std::labs(ax - bx) + std::labs(ay - by) != 1;
      }
    }

    const std::set<std::pair<std::size_t, std::size_t>> geo(g.geom_edges.begin(), g.geom_edges.end());
    for (auto [i, j] : g.geom_edges) violations += i == j || !geo.count({j, i});

    for (const Cell& c : d.cells) {
      const auto box = spec.extent(0, g.cell2grid[c.id]);
      const double cx = static_cast<double>(c.x) + static_cast<double>(c.w) / 2.0;
      const double cy = static_cast<double>(c.y) + static_cast<double>(c.h) / 2.0;
      const bool in_x = cx >= box.x0 && (cx < box.x1 || box.x1 >= static_cast<double>(d.die.x1));
      const bool in_y = cy >= box.y0 && (cy < box.y1 || box.y1 >= static_cast<double>(d.die.y1));
      violations += !(in_x && in_y);
    }
  }
  return {violations == 0, "50 designs, " + std::to_string(violations) + " violations"};
}

// 4. Fast RUDY against the naive rasterizer; area-average downsampling conserves the mean.
Outcome rudy_check() {
  std::mt19937_64 rng(9);
  double worst_rudy = 0, worst_mean = 0;
  for (int k = 0; k < 20; ++k) {
    SynthSpec s;
    s.seed = 500 + static_cast<std::uint64_t>(k);
    s.n_cells = 100 + rng() % 400;
    s.n_nets = 100 + rng() % 400;
    s.die_w = 20000 + static_cast<Dbu>(rng() % 40000);
    s.die_h = 20000 + static_cast<Dbu>(rng() % 40000);
    const Design d = synth_design(s);
    const std::size_t m = 1 + rng() % 48, n = 1 + rng() % 48;
    const Matrix fast = rudy_map(d, m, n).values;
    worst_rudy = std::max(worst_rudy, (fast - oracle::naive_rudy(d, m, n)).cwiseAbs().maxCoeff());

    // Scale to unit mean so the tolerance is not swamped by the DBU magnitude of the map.
    const double mean = fast.mean();
    const Matrix unit = mean > 0 ? Matrix(fast / mean) : fast;
    const std::size_t tm = 1 + rng() % m, tn = 1 + rng() % n;
    worst_mean = std::max(worst_mean, std::abs(downsample_area_avg(unit, tm, tn).mean() - unit.mean()));
  }
  return {worst_rudy <= 1e-9 && worst_mean <= 1e-12,
          "20 designs, max RUDY diff " + num(worst_rudy) + ", max mean drift " + num(worst_mean)};
}

// 5. Overfitting a single design.
Outcome overfit_check() {
  const auto t0 = Clock::now();
  SynthSpec s;
  s.seed = 3;
  s.n_cells = 2000;
  s.n_nets = 2200;
  s.clusters = 3;
  RunConfig rc;
  rc.grid_m = rc.grid_n = 32;
  rc.model.hidden = 128;
  rc.model.layers = 3;
  rc.model.grid_levels = 2;
  rc.train.max_epochs = 300;
  rc.train.patience = 300;
  const std::vector<Sample> samples = rudy_samples({synth_design(s)}, rc);
  const Sample* p = &samples[0];
  std::size_t reached = 0;
  EpochRecord last;
  fit({p}, {p}, rc.model, rc.train, [&](const EpochRecord& r) {
    last = r;
    if (r.val_spearman_cell >= 0.90 && r.val_spearman_grid >= 0.85) reached = r.epoch;
    return reached == 0;
  });
  const double secs = seconds_since(t0);
  std::string detail = reached ? "reached at epoch " + std::to_string(reached) : "not reached in 300 epochs";
  detail += ", cell " + num(last.val_spearman_cell, 4) + ", grid " + num(last.val_spearman_grid, 4);
  return {reached > 0 && secs < 15 * 60, detail};
}

// 6. Removing the grid hierarchy lowers the median validation grid Spearman.
Outcome ablation_check() {
  RunConfig rc;
  rc.grid_m = rc.grid_n = 16;
  rc.model.hidden = 32;
  rc.model.layers = 3;
  rc.model.grid_levels = 2;
  rc.train.lr = 2e-3;
  rc.train.max_epochs = 80;
  rc.train.patience = 20;
  rc.train.step_size = 40;

  std::vector<Design> train_designs;
  for (std::uint64_t k = 0; k < 4; ++k) {
    SynthSpec s;
    s.seed = 40 + k;
    s.n_cells = 500;
    s.n_nets = 550;
    s.clusters = 2 + k % 3;
    s.die_w = s.die_h = 30000;
    train_designs.push_back(synth_design(s));
  }
  SynthSpec vs;
  vs.seed = 49;
  vs.n_cells = 500;
  vs.n_nets = 550;
  vs.die_w = vs.die_h = 30000;
  const Design val_design = synth_design(vs);

  const std::vector<Sample> train = rudy_samples(train_designs, rc);
  const double c_max = train.front().labels.c_max;
  const HeteroGraph vg = build_graph(val_design, grid_spec_for(val_design, rc), rc.graph_options());
  const Sample val = make_sample(val_design, rc, normalize_labels(rudy_raw(val_design, vg.grid, rc.source_scale), vg, c_max));

  std::vector<const Sample*> train_ptrs;
  for (const Sample& s : train) train_ptrs.push_back(&s);
  std::vector<double> full, flat;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (bool hier : {true, false}) {
      RunConfig r = rc;
      r.train.seed = seed;
      r.model.hierarchical_grid = hier;
      const FitResult fr = fit(train_ptrs, {&val}, r.model, r.train);
      (hier ? full : flat).push_back(fr.log[fr.best_epoch - 1].val_spearman_grid);
    }
  }
  const double mf = median(full), mo = median(flat);
  std::string seeds;
  for (std::size_t i = 0; i < full.size(); ++i) seeds += " " + num(full[i], 4) + "/" + num(flat[i], 4);
  return {mo < mf, "median val grid Spearman full " + num(mf, 4) + " vs no hierarchy " + num(mo, 4) + ", per seed" + seeds};
}

// 7. Same seed and config give identical logs and checkpoints.
Outcome determinism_check() {
  RunConfig rc;
  rc.grid_m = rc.grid_n = 16;
  rc.model.hidden = 32;
  rc.train.max_epochs = 8;
  rc.train.patience = 8;
  rc.train.seed = 11;
  std::vector<Design> designs;
  for (std::uint64_t k = 0; k < 3; ++k) {
    SynthSpec s;
    s.seed = 70 + k;
    s.n_cells = 400;
    s.n_nets = 440;
    designs.push_back(synth_design(s));
  }
  auto once = [&] {
    const std::vector<Sample> samples = rudy_samples(designs, rc);
    const FitResult fr = fit({&samples[0], &samples[1]}, {&samples[2]}, rc.model, rc.train);
    std::string log;
    for (const EpochRecord& r : fr.log) log += r.to_json() + "\n";
    return std::pair{log, encode_checkpoint(rc.model, fr.best)};
  };
  const auto a = once(), b = once();
  return {a.first == b.first && a.second == b.second,
          "logs " + std::string(a.first == b.first ? "identical" : "differ") + ", checkpoints " +
              (a.second == b.second ? "identical" : "differ") + " (" + std::to_string(a.second.size()) + " bytes)"};
}

// 8. Degenerate designs run end to end without non-finite values.
Outcome degenerate_check() {
  const char* kSingle = R"(DESIGN single ;
DIEAREA ( 0 0 ) ( 1000 1000 ) ;
MASTERS 1 ;
  - A 100 100 + PIN I INPUT ( 10 20 ) ;
END MASTERS
COMPONENTS 1 ;
  - a A + PLACED ( 400 400 ) N ;
END COMPONENTS
END DESIGN
)";
  std::vector<std::pair<std::string, Design>> cases;
  cases.emplace_back("single cell", parse_design(kSingle));
  Design no_nets = synth_design(SynthSpec{.n_cells = 30, .n_nets = 1, .seed = 5});
  no_nets.nets.clear();
  cases.emplace_back("zero nets", parse_design(emit_canonical(no_nets)));
  cases.emplace_back("1x1 grid", synth_design(SynthSpec{.n_cells = 60, .n_nets = 70, .seed = 6}));

  std::string detail;
  bool ok = true;
  for (const auto& [name, d] : cases) {
    RunConfig rc;
    rc.model.hidden = 16;
    const bool one_tile = name == "1x1 grid";
    rc.grid_m = rc.grid_n = one_tile ? 1 : 8;
    rc.model.grid_levels = one_tile ? 1 : 2;
    const std::vector<Sample> s = rudy_samples({d}, rc);
    const Prediction p = predict(init_params(rc.model, 1), s[0].inputs, rc.model);
    const MetricReport m = evaluate(p, s[0].labels);
    bool finite = p.cell.allFinite() && p.grid.allFinite() && s[0].labels.grid.allFinite() && s[0].labels.cell.allFinite();
    finite = finite && s[0].inputs.cell_x.allFinite() && s[0].inputs.net_x.allFinite();
    for (const LevelMetrics* lm : {&m.cell, &m.grid}) {
      finite = finite && std::isfinite(lm->mae) && std::isfinite(lm->rmse);
      for (const auto* o : {&lm->pearson, &lm->spearman, &lm->kendall})
        if (o->has_value()) finite = finite && std::isfinite(**o);
    }
    ok = ok && finite;
    detail += (detail.empty() ? "" : ", ") + name + (finite ? " ok" : " non-finite");
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion filter, e.g. `acceptance 1 4 8`.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int id) { return only.empty() || only.count(id); };

  if (want(1)) report(1, "gradient check, 50 cells / 40 nets / 4x4, d=16 L=2 K=2", gradient_check);
  if (want(2)) report(2, "metrics match brute force", metrics_check);
  if (want(3)) report(3, "graph invariants on random synthetic designs", graph_invariants);
  if (want(4)) report(4, "RUDY rasterizer and mean-preserving downsampling", rudy_check);
  if (want(5)) report(5, "overfit 2000 cells, 32x32, d=128 L=3 K=2", overfit_check);
  if (want(6)) report(6, "hierarchy ablation lowers median val grid Spearman", ablation_check);
  if (want(7)) report(7, "bit-identical training runs", determinism_check);
  if (want(8)) report(8, "degenerate designs end to end", degenerate_check);
  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
