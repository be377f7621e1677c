#include <algorithm>
#include <cmath>

#include "hetcong/error.hpp"
#include "hetcong/oracle.hpp"

namespace hetcong {

RawCongestionMap rudy_map(const Design& d, std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw ValidationError("RUDY map needs at least one tile per axis");
  const double X0 = static_cast<double>(d.die.x0), Y0 = static_cast<double>(d.die.y0);
  const double tw = static_cast<double>(d.die.width()) / static_cast<double>(m);
  const double th = static_cast<double>(d.die.height()) / static_cast<double>(n);
  Matrix map = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));

  for (const Net& net : d.nets) {
    double bx0 = 0, by0 = 0, bx1 = 0, by1 = 0;
    for (std::size_t i = 0; i < net.pins.size(); ++i) {
      const double px = pin_x(d, net.pins[i]), py = pin_y(d, net.pins[i]);
      if (i == 0) {
        bx0 = bx1 = px, by0 = by1 = py;
      } else {
        bx0 = std::min(bx0, px), bx1 = std::max(bx1, px);
        by0 = std::min(by0, py), by1 = std::max(by1, py);
      }
    }
    const double hpwl = (bx1 - bx0) + (by1 - by0);
    if (hpwl <= 0.0) continue;
    if (bx1 - bx0 <= 0.0) bx0 -= 0.5 * tw, bx1 += 0.5 * tw;
    if (by1 - by0 <= 0.0) by0 -= 0.5 * th, by1 += 0.5 * th;
    const double density = hpwl / ((bx1 - bx0) * (by1 - by0));

    const auto col_of = [&](double x) {
      return static_cast<std::size_t>(std::clamp(std::floor((x - X0) / tw), 0.0, static_cast<double>(m - 1)));
    };
    const auto row_of = [&](double y) {
      return static_cast<std::size_t>(std::clamp(std::floor((y - Y0) / th), 0.0, static_cast<double>(n - 1)));
    };
    const std::size_t c0 = col_of(bx0), c1 = col_of(bx1), r0 = row_of(by0), r1 = row_of(by1);
    for (std::size_t r = r0; r <= r1; ++r) {
      const double ty0 = Y0 + th * static_cast<double>(r), ty1 = Y0 + th * static_cast<double>(r + 1);
      const double oy = std::min(by1, ty1) - std::max(by0, ty0);
      if (oy <= 0) continue;
      for (std::size_t c = c0; c <= c1; ++c) {
        const double tx0 = X0 + tw * static_cast<double>(c), tx1 = X0 + tw * static_cast<double>(c + 1);
        const double ox = std::min(bx1, tx1) - std::max(bx0, tx0);
        if (ox <= 0) continue;
        map(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += density * ox * oy;
      }
    }
  }
  return {std::move(map)};
}

namespace {

// weights(i, k) = length of target interval i overlapping source interval k, in source units.
Matrix overlap_weights(std::size_t src, std::size_t dst) {
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(dst), static_cast<Eigen::Index>(src));
  const double step = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    const double lo = step * static_cast<double>(i), hi = step * static_cast<double>(i + 1);
    const auto k0 = static_cast<std::size_t>(std::floor(lo));
    for (std::size_t k = k0; k < src && static_cast<double>(k) < hi; ++k) {
      const double ov = std::min(hi, static_cast<double>(k + 1)) - std::max(lo, static_cast<double>(k));
      if (ov > 0) w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = ov;
    }
  }
  return w;
}

}  // namespace

Matrix downsample_area_avg(const Matrix& src, std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw ValidationError("downsample target must have non-zero dimensions");
  const auto M = static_cast<std::size_t>(src.cols()), N = static_cast<std::size_t>(src.rows());
  if (m > M || n > N)
    throw ValidationError("downsample target " + std::to_string(m) + "x" + std::to_string(n) + " exceeds source " +
                          std::to_string(M) + "x" + std::to_string(N));
  const Matrix wx = overlap_weights(M, m), wy = overlap_weights(N, n);
  const double area = (static_cast<double>(M) / static_cast<double>(m)) * (static_cast<double>(N) / static_cast<double>(n));
  return (wy * src * wx.transpose()) / area;
}

double log_max(std::span<const RawCongestionMap> maps) {
  double c = 0.0;
  for (const auto& m : maps)
    for (Eigen::Index i = 0; i < m.values.size(); ++i) c = std::max(c, std::log1p(m.values.data()[i]));
  return c > 0.0 ? c : 1.0;
}

CongestionLabels normalize_labels(const RawCongestionMap& raw, const HeteroGraph& g, double c_max) {
  if (static_cast<std::size_t>(raw.values.cols()) != g.grid.m || static_cast<std::size_t>(raw.values.rows()) != g.grid.n)
    throw ValidationError("congestion map is " + std::to_string(raw.values.cols()) + "x" +
                          std::to_string(raw.values.rows()) + ", grid is " + std::to_string(g.grid.m) + "x" +
                          std::to_string(g.grid.n));
  if (!(c_max > 0.0)) throw ValidationError("c_max must be positive");
  CongestionLabels l;
  l.m = g.grid.m;
  l.n = g.grid.n;
  l.c_max = c_max;
  l.grid.resize(raw.values.size());
  for (Eigen::Index i = 0; i < raw.values.size(); ++i) {
    const double x = raw.values.data()[i];
    if (!(x >= 0.0) || !std::isfinite(x)) throw NumericError("raw congestion must be finite and non-negative");
    l.grid(i) = std::clamp(std::log1p(x) / c_max, 0.0, 1.0);
  }
  l.cell.resize(static_cast<Eigen::Index>(g.n_cells));
  for (std::size_t c = 0; c < g.n_cells; ++c) l.cell(static_cast<Eigen::Index>(c)) = l.grid(static_cast<Eigen::Index>(g.cell2grid[c]));
  return l;
}

RawCongestionMap rudy_raw(const Design& d, const GridSpec& spec, std::size_t source_scale) {
  if (source_scale == 0) throw ValidationError("source scale must be at least 1");
  RawCongestionMap fine = rudy_map(d, spec.m * source_scale, spec.n * source_scale);
  if (source_scale == 1) return fine;
  return {downsample_area_avg(fine.values, spec.m, spec.n)};
}

CongestionLabels rudy_labels(const Design& d, const HeteroGraph& g, std::size_t source_scale) {
  RawCongestionMap raw = rudy_raw(d, g.grid, source_scale);
  return normalize_labels(raw, g, log_max(std::span<const RawCongestionMap>(&raw, 1)));
}

}  // namespace hetcong
