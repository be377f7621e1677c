#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetcong/autodiff.hpp"
#include "hetcong/model.hpp"
#include "hetcong/oracle.hpp"

namespace hetcong {

struct TrainConfig {
  double lr = 5e-4;
  double weight_decay = 1e-4;
  std::size_t step_size = 50;  // epochs per learning-rate decay
  double gamma = 0.5;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;
  double beta = 4.0;         // label weight: w = 1 + beta * y
  double lambda_grid = 1.0;
  double lambda_var = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  /// Step-decayed learning rate for a 1-based epoch.
  double lr_at(std::size_t epoch) const;
};

/// (1/n) sum (1 + beta * y_i) (pred_i - y_i)^2
ad::Var weighted_mse(ad::Var pred, const Vector& y, double beta);
double weighted_mse(const Vector& pred, const Vector& y, double beta);

/// max(0, std(y) - std(pred))^2 with population standard deviations.
ad::Var variance_reg(ad::Var pred, const Vector& y);
double variance_reg(const Vector& pred, const Vector& y);

struct LossTerms {
  ad::Var total;
  double cell = 0, grid = 0, variance = 0;
};

/// cell wMSE + lambda_grid * grid wMSE + lambda_var * (cell and grid variance terms).
/// The `weighted_loss` and `variance_reg` switches zero beta and lambda_var. A
/// variance term is dropped for a level with fewer than two samples.
LossTerms total_loss(ad::Var cell_pred, ad::Var grid_pred, const CongestionLabels& y, const TrainConfig& tc,
                     const ModelConfig& mc);

/// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(double weight_decay, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {}

  /// Throws NumericError naming the first parameter with a non-finite gradient;
  /// no parameter is modified in that case.
  void step(ModelParams& params, const std::map<std::string, Matrix>& grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  struct Moments {
    Matrix m, v;
  };
  double wd_, b1_, b2_, eps_;
  std::size_t t_ = 0;
  std::map<std::string, Moments> state_;
};

/// Patience-based stopping on a score that should increase.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  /// Returns true when `score` strictly improves on the best so far.
  bool update(std::size_t epoch, double score);
  bool should_stop() const { return since_best_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_score() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t since_best_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0;
  bool any_ = false;
};

/// Everything the model needs for one design.
struct Sample {
  std::string name;
  HeteroGraph graph;
  ModelInputs inputs;
  CongestionLabels labels;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0;
  double loss_cell = 0, loss_grid = 0, loss_var = 0;
  double val_spearman_cell = 0, val_spearman_grid = 0;
  std::string to_json() const;
};

struct FitResult {
  ModelParams best;
  std::size_t best_epoch = 0;
  double best_score = 0;
  std::vector<EpochRecord> log;
};

/// Mean (cell, grid) Spearman over samples; an undefined correlation counts as 0.
std::pair<double, double> mean_spearman(const ModelParams& p, const std::vector<const Sample*>& samples,
                                        const ModelConfig& cfg);

/// One full-graph step per training design per epoch (designs in name order),
/// validation after every epoch, selection of the best mean Spearman checkpoint.
/// Both splits must be non-empty; the same sample may appear in both. `on_epoch`
/// sees every record and may return false to end training after that epoch.
using EpochHook = std::function<bool(const EpochRecord&)>;
FitResult fit(std::vector<const Sample*> train, std::vector<const Sample*> val, const ModelConfig& mc,
              const TrainConfig& tc, const EpochHook& on_epoch = {});

}  // namespace hetcong
