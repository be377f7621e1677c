#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "hetcong/error.hpp"
#include "hetcong/oracle.hpp"

namespace hetcong {

void SynthSpec::validate() const {
  if (n_cells == 0 || n_nets == 0) throw ValidationError("synthetic designs need at least one cell and one net");
  if (die_w <= 0 || die_h <= 0) throw ValidationError("synthetic die must have positive size");
  if (min_cell_w <= 0 || max_cell_w < min_cell_w || row_h <= 0) throw ValidationError("invalid cell size range");
  if (max_cell_w > die_w || row_h > die_h) throw ValidationError("cells do not fit in the die");
  if (n_masters == 0) throw ValidationError("at least one master is required");
  if (n_macros > 0 && (macro_size > die_w || macro_size > die_h)) throw ValidationError("macros do not fit in the die");
  if (mean_degree < 2.0 || max_degree < 1) throw ValidationError("mean net degree must be at least 2");
  if (clusters == 0) throw ValidationError("at least one cluster is required");
  if (background < 0 || background > 1 || long_range < 0 || long_range > 1)
    throw ValidationError("fractions must lie in [0, 1]");
}

Design synth_design(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](Dbu lo, Dbu hi) { return std::uniform_int_distribution<Dbu>(lo, hi)(rng); };

  Design d;
  d.name = spec.name.empty() ? "synth_" + std::to_string(spec.seed) : spec.name;
  d.die = Rect{0, 0, spec.die_w, spec.die_h};

  std::vector<std::string> master_names;
  for (std::size_t i = 0; i < spec.n_masters; ++i) {
    Dbu w = uniform_int(spec.min_cell_w, spec.max_cell_w);
    Master m{w, spec.row_h, false, {}};
    master_names.push_back("SC" + std::to_string(i));
    d.masters.emplace(master_names.back(), std::move(m));
  }
  const std::size_t macros = std::min(spec.n_macros, spec.n_cells > 1 ? spec.n_cells - 1 : 0);
  if (macros > 0) d.masters.emplace("MACRO", Master{spec.macro_size, spec.macro_size, true, {}});

  std::vector<std::pair<double, double>> centers(spec.clusters);
  for (auto& c : centers) c = {0.15 + 0.7 * unit(rng), 0.15 + 0.7 * unit(rng)};

  std::normal_distribution<double> gauss(0.0, spec.cluster_sigma);
  std::uniform_int_distribution<std::size_t> pick_master(0, spec.n_masters - 1), pick_cluster(0, spec.clusters - 1);
  for (std::size_t i = 0; i < spec.n_cells; ++i) {
    Cell c;
    c.id = i;
    c.name = "u" + std::to_string(i);
    if (i < macros) {
      c.master = "MACRO";
      c.is_macro = true;
      c.w = c.h = spec.macro_size;
      c.x = uniform_int(0, spec.die_w - c.w);
      c.y = uniform_int(0, spec.die_h - c.h);
      d.cells.push_back(std::move(c));
      continue;
    }
    c.master = master_names[pick_master(rng)];
    c.w = d.masters.at(c.master).w;
    c.h = spec.row_h;
    double fx = unit(rng), fy = unit(rng);
    if (unit(rng) >= spec.background) {
      const auto& ctr = centers[pick_cluster(rng)];
      fx = ctr.first + gauss(rng);
      fy = ctr.second + gauss(rng);
    }
    c.x = std::clamp(static_cast<Dbu>(std::llround(fx * static_cast<double>(spec.die_w))), Dbu{0}, spec.die_w - c.w);
    c.y = std::clamp(static_cast<Dbu>(std::llround(fy * static_cast<double>(spec.die_h))), Dbu{0}, spec.die_h - c.h);
    d.cells.push_back(std::move(c));
  }

  std::vector<double> xs, ys;
  for (const Cell& c : d.cells) {
    xs.push_back(c.center_x());
    ys.push_back(c.center_y());
  }
  const auto neighbours = knn_spatial_hash(xs, ys, spec.locality);

  const double p_stop = 1.0 / (spec.mean_degree - 1.0);
  std::geometric_distribution<std::size_t> extra(std::min(p_stop, 1.0));
  std::uniform_int_distribution<std::size_t> pick_cell(0, spec.n_cells - 1);
  for (std::size_t e = 0; e < spec.n_nets; ++e) {
    const std::size_t degree = std::min({2 + extra(rng), spec.max_degree, spec.n_cells});
    Net net;
    net.id = e;
    net.name = "n" + std::to_string(e);
    const std::size_t driver = pick_cell(rng);
    std::vector<std::size_t> members{driver};
    std::unordered_set<std::size_t> used{driver};
    std::size_t attempts = 0;
    while (members.size() < degree && attempts++ < 64 * degree) {
      std::size_t cand;
      const auto& local = neighbours[driver];
      if (unit(rng) < spec.long_range || local.empty())
        cand = pick_cell(rng);
      else
        cand = local[std::uniform_int_distribution<std::size_t>(0, local.size() - 1)(rng)];
      if (used.insert(cand).second) members.push_back(cand);
    }
    for (std::size_t k = 0; k < members.size(); ++k) {
      const Cell& c = d.cells[members[k]];
      net.pins.push_back(NetPin{c.id, k == 0 ? PinDirection::Output : PinDirection::Input, uniform_int(0, c.w - 1),
                                uniform_int(0, c.h - 1)});
    }
    d.nets.push_back(std::move(net));
  }
  validate(d);
  return d;
}

}  // namespace hetcong
