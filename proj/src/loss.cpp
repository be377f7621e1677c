#include <cmath>

#include "hetcong/error.hpp"
#include "hetcong/train.hpp"

namespace hetcong {
namespace {

void check_lengths(const ad::Var& pred, const Vector& y, std::size_t min_n, const char* what) {
  if (pred.cols() != 1 || pred.rows() != y.size())
    throw NumericError(std::string(what) + ": prediction " + std::to_string(pred.rows()) + "x" +
                       std::to_string(pred.cols()) + " vs " + std::to_string(y.size()) + " labels");
  if (static_cast<std::size_t>(y.size()) < min_n)
    throw NumericError(std::string(what) + ": needs at least " + std::to_string(min_n) + " samples");
}

ad::Var population_std(ad::Var x) {
  using namespace ad;
  Var centered = sub(x, broadcast(mean(x), x.rows(), x.cols()));
  return ad::sqrt(mean(square(centered)));
}

template <typename Fn>
double evaluate(const Vector& pred, Fn&& fn) {
  ad::Tape t;
  return fn(t.constant(Matrix(pred))).value()(0, 0);
}

}  // namespace

ad::Var weighted_mse(ad::Var pred, const Vector& y, double beta) {
  check_lengths(pred, y, 1, "weighted_mse");
  ad::Tape& t = *pred.tape();
  Matrix target = y;
  Matrix weight = (1.0 + beta * y.array()).matrix();
  return ad::mean(ad::mul(t.constant(std::move(weight)), ad::square(ad::sub(pred, t.constant(std::move(target))))));
}

double weighted_mse(const Vector& pred, const Vector& y, double beta) {
  return evaluate(pred, [&](ad::Var p) { return weighted_mse(p, y, beta); });
}

ad::Var variance_reg(ad::Var pred, const Vector& y) {
  check_lengths(pred, y, 2, "variance_reg");
  const double mu = y.mean();
  const double target = std::sqrt((y.array() - mu).square().mean());
  ad::Tape& t = *pred.tape();
  ad::Var shortfall = ad::sub(t.constant(Matrix::Constant(1, 1, target)), population_std(pred));
  return ad::square(ad::relu(shortfall));
}

double variance_reg(const Vector& pred, const Vector& y) {
  return evaluate(pred, [&](ad::Var p) { return variance_reg(p, y); });
}

LossTerms total_loss(ad::Var cell_pred, ad::Var grid_pred, const CongestionLabels& y, const TrainConfig& tc,
                     const ModelConfig& mc) {
  const double beta = mc.weighted_loss ? tc.beta : 0.0;
  const double lambda_var = mc.variance_reg ? tc.lambda_var : 0.0;
  LossTerms out;
  ad::Var cell = weighted_mse(cell_pred, y.cell, beta);
  ad::Var grid = weighted_mse(grid_pred, y.grid, beta);
  out.cell = cell.value()(0, 0);
  out.grid = grid.value()(0, 0);
  ad::Var total = ad::add(cell, ad::scale(grid, tc.lambda_grid));
  if (lambda_var > 0.0) {
    ad::Var var_terms;
    bool any = false;
    for (auto [pred, target] : {std::pair{cell_pred, &y.cell}, std::pair{grid_pred, &y.grid}}) {
      if (target->size() < 2) continue;
      ad::Var v = variance_reg(pred, *target);
      var_terms = any ? ad::add(var_terms, v) : v;
      any = true;
    }
    if (any) {
      out.variance = var_terms.value()(0, 0);
      total = ad::add(total, ad::scale(var_terms, lambda_var));
    }
  }
  out.total = total;
  if (!std::isfinite(total.value()(0, 0))) throw NumericError("non-finite training loss");
  return out;
}

}  // namespace hetcong
