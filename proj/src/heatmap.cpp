#include "hetcong/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "hetcong/error.hpp"

namespace hetcong {

std::vector<std::uint8_t> heatmap_levels(const Vector& values, std::size_t m, std::size_t n, bool autoscale) {
  if (m == 0 || n == 0) throw ValidationError("heatmap needs a non-empty grid");
  if (static_cast<std::size_t>(values.size()) != m * n)
    throw ValidationError("heatmap has " + std::to_string(values.size()) + " values for a " + std::to_string(m) + "x" +
                          std::to_string(n) + " grid");
  if (!values.allFinite()) throw NumericError("heatmap values must be finite");
  double lo = 0.0, hi = 1.0;
  if (autoscale) {
    lo = values.minCoeff();
    hi = values.maxCoeff();
  }
  std::vector<std::uint8_t> out(m * n);
  for (std::size_t row = 0; row < n; ++row) {
    const std::size_t iy = n - 1 - row;
    for (std::size_t ix = 0; ix < m; ++ix) {
      const double v = values(static_cast<Eigen::Index>(iy * m + ix));
      double t = hi > lo ? (v - lo) / (hi - lo) : 128.0 / 255.0;
      t = std::clamp(t, 0.0, 1.0);
      out[row * m + ix] = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
  }
  return out;
}

std::string encode_pgm(const std::vector<std::uint8_t>& levels, std::size_t m, std::size_t n) {
  if (levels.size() != m * n) throw ValidationError("pgm size mismatch");
  std::string out = "P5\n" + std::to_string(m) + " " + std::to_string(n) + "\n255\n";
  out.append(levels.begin(), levels.end());
  return out;
}

std::array<std::uint8_t, 3> colormap(std::uint8_t level) {
  struct Stop {
    int at;
    std::array<int, 3> rgb;
  };
  static constexpr Stop stops[] = {
      {0, {0, 0, 255}}, {64, {0, 255, 255}}, {128, {0, 255, 0}}, {191, {255, 255, 0}}, {255, {255, 0, 0}}};
  const int v = level;
  std::size_t i = 0;
  while (i + 2 < std::size(stops) && v > stops[i + 1].at) ++i;
  const Stop& a = stops[i];
  const Stop& b = stops[i + 1];
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const int num = a.rgb[c] * (b.at - v) + b.rgb[c] * (v - a.at);
    const int den = b.at - a.at;
    out[c] = static_cast<std::uint8_t>((num + den / 2) / den);
  }
  return out;
}

std::string encode_ppm(const std::vector<std::uint8_t>& levels, std::size_t m, std::size_t n) {
  if (levels.size() != m * n) throw ValidationError("ppm size mismatch");
  std::string out = "P6\n" + std::to_string(m) + " " + std::to_string(n) + "\n255\n";
  out.reserve(out.size() + 3 * levels.size());
  for (std::uint8_t l : levels)
    for (std::uint8_t c : colormap(l)) out.push_back(static_cast<char>(c));
  return out;
}

}  // namespace hetcong
