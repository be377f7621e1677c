#include <algorithm>
#include <cmath>
#include <limits>

#include "hetcong/graph.hpp"

namespace hetcong {

std::vector<std::vector<std::size_t>> knn_spatial_hash(const std::vector<double>& xs, const std::vector<double>& ys,
                                                       std::size_t k) {
  const std::size_t n = xs.size();
  std::vector<std::vector<std::size_t>> result(n);
  if (n < 2 || k == 0) return result;
  k = std::min(k, n - 1);

  double x0 = xs[0], x1 = xs[0], y0 = ys[0], y1 = ys[0];
  for (std::size_t i = 1; i < n; ++i) {
    x0 = std::min(x0, xs[i]), x1 = std::max(x1, xs[i]);
    y0 = std::min(y0, ys[i]), y1 = std::max(y1, ys[i]);
  }
  // Roughly k points per bucket.
  const double span = std::max({x1 - x0, y1 - y0, 1.0});
  const auto per_axis = static_cast<std::size_t>(
      std::clamp(std::sqrt(static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(k, 1))), 1.0, 4096.0));
  const double bucket = span / static_cast<double>(per_axis) * (1.0 + 1e-12);
  auto bucket_of = [&](double v, double lo) {
    return std::min(static_cast<std::size_t>((v - lo) / bucket), per_axis - 1);
  };

  std::vector<std::size_t> start(per_axis * per_axis + 1, 0), order(n);
  std::vector<std::size_t> home(n);
  for (std::size_t i = 0; i < n; ++i) {
    home[i] = bucket_of(ys[i], y0) * per_axis + bucket_of(xs[i], x0);
    ++start[home[i] + 1];
  }
  for (std::size_t b = 0; b < per_axis * per_axis; ++b) start[b + 1] += start[b];
  {
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) order[fill[home[i]]++] = i;
  }

  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const auto bx = static_cast<std::ptrdiff_t>(home[i] % per_axis);
    const auto by = static_cast<std::ptrdiff_t>(home[i] / per_axis);
    const auto pa = static_cast<std::ptrdiff_t>(per_axis);
    cand.clear();
    for (std::ptrdiff_t r = 0;; ++r) {
      for (std::ptrdiff_t yy = by - r; yy <= by + r; ++yy) {
        if (yy < 0 || yy >= pa) continue;
        for (std::ptrdiff_t xx = bx - r; xx <= bx + r; ++xx) {
          if (xx < 0 || xx >= pa) continue;
          if (std::max(std::abs(xx - bx), std::abs(yy - by)) != r) continue;
          const auto b = static_cast<std::size_t>(yy * pa + xx);
          for (std::size_t s = start[b]; s < start[b + 1]; ++s) {
            const std::size_t j = order[s];
            if (j == i) continue;
            const double dx = xs[j] - xs[i], dy = ys[j] - ys[i];
            cand.emplace_back(dx * dx + dy * dy, j);
          }
        }
      }
      const bool covered = bx - r <= 0 && by - r <= 0 && bx + r >= pa - 1 && by + r >= pa - 1;
      if (cand.size() >= k) {
        std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end());
        const double kth = cand[k - 1].first;
        // Every unvisited point is at least r bucket widths away.
        const double reach = static_cast<double>(r) * bucket;
        if (kth < reach * reach || covered) break;
      } else if (covered) {
        break;
      }
    }
    std::sort(cand.begin(), cand.end());
    auto& row = result[i];
    row.reserve(k);
    for (std::size_t t = 0; t < k && t < cand.size(); ++t) row.push_back(cand[t].second);
  }
  return result;
}

std::vector<std::pair<std::size_t, std::size_t>> geometric_edges(const Design& d, std::size_t k) {
  std::vector<double> xs(d.cells.size()), ys(d.cells.size());
  for (const Cell& c : d.cells) {
    xs[c.id] = c.center_x();
    ys[c.id] = c.center_y();
  }
  const auto nn = knn_spatial_hash(xs, ys, k);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < nn.size(); ++i)
    for (std::size_t j : nn[i]) {
      edges.emplace_back(i, j);
      edges.emplace_back(j, i);
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace hetcong
