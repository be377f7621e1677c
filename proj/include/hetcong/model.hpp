#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hetcong/autodiff.hpp"
#include "hetcong/features.hpp"
#include "hetcong/graph.hpp"
#include "hetcong/types.hpp"

namespace hetcong {

struct ModelConfig {
  std::size_t hidden = 128;      // d
  std::size_t layers = 3;        // L
  std::size_t grid_levels = 2;   // K
  std::size_t k_geom = 8;

  // Ablation switches; all on for the full model.
  bool hierarchical_grid = true;
  bool grid_net_mp = true;
  bool geom_mp = true;
  bool gated_aggregation = true;
  bool enriched_features = true;
  bool weighted_loss = true;
  bool variance_reg = true;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Named learnable matrices. Linear maps are stored input-major (fan_in x fan_out)
/// and applied as rows * W + b.
using ModelParams = std::map<std::string, Matrix>;

struct ParamShape {
  std::string name;
  Eigen::Index rows, cols;
  bool bias;
};

/// Every parameter of the architecture in a fixed registration order.
std::vector<ParamShape> param_shapes(const ModelConfig& cfg);

/// Glorot-uniform weights, zero biases, fully determined by `seed`.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Throws NumericError if a parameter is missing, misshapen, or non-finite.
void check_params(const ModelParams& p, const ModelConfig& cfg);

/// Index arrays and feature matrices for one design, laid out for the forward pass.
struct ModelInputs {
  std::size_t n_cells = 0, n_nets = 0;
  std::vector<std::size_t> level_tiles;

  ad::Index pin_cell, pin_net;    // per pin edge
  ad::Index net_tile, tile_net;   // flattened net-to-grid incidence (tile index, owning net)
  ad::Index geom_src, geom_dst;   // directed geometric edges
  ad::Index cell_tile;            // level-0 tile per cell
  std::vector<ad::Index> parent;  // per level l < K-1

  Matrix cell_x, net_x, pin_x, geom_x;
  std::vector<Matrix> grid_x;
};

/// Applies the `enriched_features` switch and validates dimensions.
ModelInputs make_inputs(const HeteroGraph& g, const FeatureSet& fs, const ModelConfig& cfg);

/// Parameters bound as differentiable leaves of one tape.
using ParamVars = std::map<std::string, ad::Var>;
ParamVars bind_params(ad::Tape& tape, const ModelParams& p, bool differentiable = true);

struct ForwardResult {
  ad::Var cell_pred;  // n_cells x 1, in (0, 1)
  ad::Var grid_pred;  // level-0 tiles x 1, in (0, 1)
  ad::Var cell_embedding;
  ad::Var grid_embedding;  // fused level-0 grid embedding
};

/// Relation-specific message passing for `cfg.layers` rounds, then hierarchical
/// grid refinement and the two readout heads. Throws NumericError naming the
/// layer and relation if any activation becomes non-finite.
ForwardResult forward(ad::Tape& tape, const ParamVars& p, const ModelInputs& in, const ModelConfig& cfg);

struct Prediction {
  Vector cell;
  Vector grid;
};

Prediction predict(const ModelParams& p, const ModelInputs& in, const ModelConfig& cfg);

/// Binary checkpoint: "VHGN", u32 version, config block, then named f32 matrices.
/// See docs/checkpoint.md.
void save_checkpoint(const std::string& path, const ModelConfig& cfg, const ModelParams& p);
std::string encode_checkpoint(const ModelConfig& cfg, const ModelParams& p);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path);
std::pair<ModelConfig, ModelParams> decode_checkpoint(const std::string& bytes);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace hetcong
