#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "hetcong/error.hpp"
#include "hetcong/metrics.hpp"
#include "hetcong/train.hpp"

namespace hetcong {

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw ValidationError(std::string("train.") + name + " must be positive");
  };
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0) || !std::isfinite(v)) throw ValidationError(std::string("train.") + name + " must be non-negative");
  };
  positive(lr, "lr");
  non_negative(weight_decay, "weight_decay");
  positive(gamma, "gamma");
  non_negative(beta, "beta");
  non_negative(lambda_grid, "lambda_grid");
  non_negative(lambda_var, "lambda_var");
  if (step_size == 0) throw ValidationError("train.step_size must be positive");
  if (max_epochs == 0) throw ValidationError("train.max_epochs must be positive");
  if (patience == 0) throw ValidationError("train.patience must be positive");
  if (patience > max_epochs) throw ValidationError("train.patience must not exceed train.max_epochs");
}

double TrainConfig::lr_at(std::size_t epoch) const {
  const std::size_t decays = epoch == 0 ? 0 : (epoch - 1) / step_size;
  return lr * std::pow(gamma, static_cast<double>(decays));
}

bool EarlyStopping::update(std::size_t epoch, double score) {
  if (!any_ || score > best_) {
    any_ = true;
    best_ = score;
    best_epoch_ = epoch;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

std::string EpochRecord::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["lr"] = lr;
  j["loss_cell"] = loss_cell;
  j["loss_grid"] = loss_grid;
  j["loss_var"] = loss_var;
  j["val_spearman_cell"] = val_spearman_cell;
  j["val_spearman_grid"] = val_spearman_grid;
  return j.dump();
}

namespace {

double spearman_or_zero(const Vector& pred, const Vector& truth) {
  if (pred.size() < 2) return 0.0;
  return spearman(pred, truth).value_or(0.0);
}

}  // namespace

std::pair<double, double> mean_spearman(const ModelParams& p, const std::vector<const Sample*>& samples,
                                        const ModelConfig& cfg) {
  if (samples.empty()) return {0.0, 0.0};
  double cell = 0, grid = 0;
  for (const Sample* s : samples) {
    const Prediction pr = predict(p, s->inputs, cfg);
    cell += spearman_or_zero(pr.cell, s->labels.cell);
    grid += spearman_or_zero(pr.grid, s->labels.grid);
  }
  const double n = static_cast<double>(samples.size());
  return {cell / n, grid / n};
}

FitResult fit(std::vector<const Sample*> train, std::vector<const Sample*> val, const ModelConfig& mc,
              const TrainConfig& tc, const EpochHook& on_epoch) {
  mc.validate();
  tc.validate();
  if (train.empty()) throw ValidationError("empty train split");
  if (val.empty()) throw ValidationError("empty val split");
  auto by_name = [](const Sample* a, const Sample* b) { return a->name < b->name; };
  std::stable_sort(train.begin(), train.end(), by_name);
  std::stable_sort(val.begin(), val.end(), by_name);

  ModelParams params = init_params(mc, tc.seed);
  AdamW opt(tc.weight_decay);
  EarlyStopping stopper(tc.patience);
  FitResult result;
  result.best = params;

  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = tc.lr_at(epoch);
    for (const Sample* s : train) {
      ad::Tape tape;
      const ParamVars vars = bind_params(tape, params);
      const ForwardResult f = forward(tape, vars, s->inputs, mc);
      const LossTerms loss = total_loss(f.cell_pred, f.grid_pred, s->labels, tc, mc);
      tape.backward(loss.total);
      std::map<std::string, Matrix> grads;
      for (const auto& [name, v] : vars) {
        const Matrix& g = v.grad();
        grads.emplace(name, g.size() ? g : Matrix::Zero(v.rows(), v.cols()));
      }
      opt.step(params, grads, rec.lr);
      rec.loss_cell += loss.cell;
      rec.loss_grid += loss.grid;
      rec.loss_var += loss.variance;
    }
    const double n = static_cast<double>(train.size());
    rec.loss_cell /= n;
    rec.loss_grid /= n;
    rec.loss_var /= n;
    std::tie(rec.val_spearman_cell, rec.val_spearman_grid) = mean_spearman(params, val, mc);
    result.log.push_back(rec);
    const bool go_on = on_epoch ? on_epoch(rec) : true;

    const double score = 0.5 * (rec.val_spearman_cell + rec.val_spearman_grid);
    if (stopper.update(epoch, score)) result.best = params;
    if (stopper.should_stop() || !go_on) break;
  }
  result.best_epoch = stopper.best_epoch();
  result.best_score = stopper.best_score();
  return result;
}

}  // namespace hetcong
