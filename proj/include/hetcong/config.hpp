#pragma once

#include <string>
#include <vector>

#include "hetcong/graph.hpp"
#include "hetcong/model.hpp"
#include "hetcong/train.hpp"

namespace hetcong {

/// Every tunable of a run, addressable as a dotted key ("model.hidden",
/// "train.lr", "grid.m", ...).
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::size_t grid_m = 32;
  std::size_t grid_n = 32;
  std::size_t source_scale = 1;
  std::size_t net_cap_pins = 1000;
  std::size_t net_cap_tiles = 256;

  /// Throws ValidationError for an unknown key or an unparsable value.
  void set(const std::string& key, const std::string& value);
  /// Applies `key=value` lines; blank lines and `#` comments are ignored.
  void merge_text(const std::string& text);
  void merge_file(const std::string& path);
  void validate() const;

  GraphOptions graph_options() const;
  /// All keys with their effective values, one `key=value` line each, in a fixed order.
  std::string to_text() const;

  static std::vector<std::string> keys();
};

}  // namespace hetcong
