#include <algorithm>

#include "hetcong/error.hpp"
#include "hetcong/graph.hpp"

namespace hetcong {

std::size_t GridSpec::bin(Dbu twice_d, std::size_t count, Dbu span) {
  if (twice_d <= 0) return 0;
  // floor(d * count / span) in exact integer arithmetic
  const auto idx = static_cast<std::size_t>((static_cast<__int128>(twice_d) * static_cast<__int128>(count)) /
                                            (static_cast<__int128>(2) * span));
  return std::min(idx, count - 1);
}

std::size_t GridSpec::tile_of_cell(const Cell& c) const {
  const std::size_t ix = column_of_twice(2 * (c.x - die.x0) + c.w);
  const std::size_t iy = row_of_twice(2 * (c.y - die.y0) + c.h);
  return iy * m + ix;
}

std::size_t GridSpec::tile_of_point(Dbu x, Dbu y) const {
  return row_of_twice(2 * (y - die.y0)) * m + column_of_twice(2 * (x - die.x0));
}

std::pair<std::size_t, std::size_t> GridSpec::fine_cols(std::size_t level, std::size_t ix) const {
  return {ix << level, std::min((ix + 1) << level, m)};
}

std::pair<std::size_t, std::size_t> GridSpec::fine_rows(std::size_t level, std::size_t iy) const {
  return {iy << level, std::min((iy + 1) << level, n)};
}

GridSpec::Box GridSpec::extent(std::size_t level, std::size_t tile) const {
  const std::size_t c = cols(level);
  const auto [cx0, cx1] = fine_cols(level, tile % c);
  const auto [ry0, ry1] = fine_rows(level, tile / c);
  const double W = static_cast<double>(die.width()), H = static_cast<double>(die.height());
  return Box{die.x0 + W * static_cast<double>(cx0) / static_cast<double>(m),
             die.y0 + H * static_cast<double>(ry0) / static_cast<double>(n),
             die.x0 + W * static_cast<double>(cx1) / static_cast<double>(m),
             die.y0 + H * static_cast<double>(ry1) / static_cast<double>(n)};
}

GridSpec make_grid_spec(const Design& d, std::size_t m, std::size_t n, std::size_t levels) {
  if (m == 0 || n == 0 || levels == 0)
    throw ValidationError("grid dimensions and level count must be at least 1");
  if (d.die.width() <= 0 || d.die.height() <= 0) throw ValidationError("die area is empty");
  GridSpec g;
  g.die = d.die;
  g.m = m;
  g.n = n;
  g.levels = levels;
  g.tile_w = static_cast<double>(d.die.width()) / static_cast<double>(m);
  g.tile_h = static_cast<double>(d.die.height()) / static_cast<double>(n);
  if (levels >= 2 && g.tiles(levels - 2) == 1)
    throw ValidationError("grid level " + std::to_string(levels - 1) + " would repeat a 1x1 level; " +
                          "at most " + std::to_string(levels - 1) + " levels are possible for a " +
                          std::to_string(m) + "x" + std::to_string(n) + " grid");
  return g;
}

std::vector<std::size_t> tiles_in_box(const GridSpec& spec, Dbu bx0, Dbu by0, Dbu bx1, Dbu by1) {
  const std::size_t c0 = spec.column_of_twice(2 * (bx0 - spec.die.x0));
  const std::size_t c1 = spec.column_of_twice(2 * (bx1 - spec.die.x0));
  const std::size_t r0 = spec.row_of_twice(2 * (by0 - spec.die.y0));
  const std::size_t r1 = spec.row_of_twice(2 * (by1 - spec.die.y0));
  std::vector<std::size_t> out;
  out.reserve((c1 - c0 + 1) * (r1 - r0 + 1));
  for (std::size_t r = r0; r <= r1; ++r)
    for (std::size_t c = c0; c <= c1; ++c) out.push_back(r * spec.m + c);
  return out;
}

}  // namespace hetcong
