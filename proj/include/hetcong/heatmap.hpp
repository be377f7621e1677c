#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hetcong/types.hpp"

namespace hetcong {

/// Row-major tile values (id = iy * m + ix) to bytes. Values are clamped to
/// [0, 1] and mapped with round(255 * v). With `autoscale`, the map's own
/// min/max span is used instead; a constant map becomes 128 everywhere.
/// Output rows run top to bottom, so the first row is the highest y.
std::vector<std::uint8_t> heatmap_levels(const Vector& values, std::size_t m, std::size_t n, bool autoscale = false);

/// Binary PGM (P5, maxval 255).
std::string encode_pgm(const std::vector<std::uint8_t>& levels, std::size_t m, std::size_t n);

/// Binary PPM (P6) through a piecewise-linear colormap with stops
/// blue, cyan, green, yellow, red at 0, 64, 128, 191, 255.
std::string encode_ppm(const std::vector<std::uint8_t>& levels, std::size_t m, std::size_t n);
std::array<std::uint8_t, 3> colormap(std::uint8_t level);

}  // namespace hetcong
