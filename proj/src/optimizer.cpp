#include <cmath>

#include "hetcong/error.hpp"
#include "hetcong/train.hpp"

namespace hetcong {

void AdamW::step(ModelParams& params, const std::map<std::string, Matrix>& grads, double lr) {
  for (const auto& [name, g] : grads)
    if (!g.allFinite()) throw NumericError("non-finite gradient for parameter '" + name + "'");
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (auto& [name, theta] : params) {
    auto git = grads.find(name);
    if (git == grads.end()) continue;
    const Matrix& g = git->second;
    auto [it, fresh] = state_.try_emplace(name);
    Moments& s = it->second;
    if (fresh) {
      s.m = Matrix::Zero(theta.rows(), theta.cols());
      s.v = Matrix::Zero(theta.rows(), theta.cols());
    }
    s.m = b1_ * s.m + (1.0 - b1_) * g;
    s.v = b2_ * s.v + (1.0 - b2_) * g.cwiseProduct(g);
    const auto m_hat = s.m.array() / c1;
    const auto v_hat = s.v.array() / c2;
    theta = (theta.array() - lr * (m_hat / (v_hat.sqrt() + eps_)) - lr * wd_ * theta.array()).matrix();
  }
}

}  // namespace hetcong
