#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetcong/error.hpp"
#include "hetcong/types.hpp"

namespace hetcong {

namespace detail {
inline void check_pair(std::size_t a, std::size_t b, std::size_t min_n, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": length mismatch " + std::to_string(a) + " vs " + std::to_string(b));
  if (a < min_n) throw ValidationError(std::string(what) + ": needs at least " + std::to_string(min_n) + " samples");
}
std::vector<double> average_ranks(const std::vector<double>& v);
struct KendallCounts {
  std::int64_t pairs = 0, x_ties = 0, y_ties = 0, joint_ties = 0, score = 0;  // score = concordant - discordant
};
KendallCounts kendall_counts(const std::vector<double>& x, const std::vector<double>& y);
template <typename Derived>
std::vector<double> to_std(const Eigen::MatrixBase<Derived>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(v(i));
  return out;
}
std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b);
}  // namespace detail

/// Pearson correlation. Empty optional when either input is constant.
template <typename DA, typename DB>
std::optional<double> pearson(const Eigen::MatrixBase<DA>& pred, const Eigen::MatrixBase<DB>& truth) {
  detail::check_pair(static_cast<std::size_t>(pred.size()), static_cast<std::size_t>(truth.size()), 2, "pearson");
  return detail::pearson(detail::to_std(pred), detail::to_std(truth));
}

/// Fractional ranks starting at 1; tied values share the mean of their positions.
template <typename D>
Vector average_ranks(const Eigen::MatrixBase<D>& v) {
  const auto r = detail::average_ranks(detail::to_std(v));
  return Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(r.size()));
}

template <typename DA, typename DB>
std::optional<double> spearman(const Eigen::MatrixBase<DA>& pred, const Eigen::MatrixBase<DB>& truth) {
  detail::check_pair(static_cast<std::size_t>(pred.size()), static_cast<std::size_t>(truth.size()), 2, "spearman");
  return detail::pearson(detail::average_ranks(detail::to_std(pred)), detail::average_ranks(detail::to_std(truth)));
}

struct KendallResult {
  std::optional<double> tau_b;  // tie-corrected
  std::optional<double> tau_a;  // (n_c - n_d) / C(n,2), present only without ties
};

/// O(n log n) merge-sort formulation.
template <typename DA, typename DB>
KendallResult kendall(const Eigen::MatrixBase<DA>& pred, const Eigen::MatrixBase<DB>& truth) {
  detail::check_pair(static_cast<std::size_t>(pred.size()), static_cast<std::size_t>(truth.size()), 2, "kendall");
  const auto c = detail::kendall_counts(detail::to_std(pred), detail::to_std(truth));
  KendallResult r;
  const double a = static_cast<double>(c.pairs - c.x_ties), b = static_cast<double>(c.pairs - c.y_ties);
  if (a > 0 && b > 0) r.tau_b = static_cast<double>(c.score) / std::sqrt(a * b);
  if (c.x_ties == 0 && c.y_ties == 0) r.tau_a = static_cast<double>(c.score) / static_cast<double>(c.pairs);
  return r;
}

template <typename DA, typename DB>
double mae(const Eigen::MatrixBase<DA>& pred, const Eigen::MatrixBase<DB>& truth) {
  detail::check_pair(static_cast<std::size_t>(pred.size()), static_cast<std::size_t>(truth.size()), 1, "mae");
  double s = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) s += std::abs(static_cast<double>(pred(i)) - static_cast<double>(truth(i)));
  return s / static_cast<double>(pred.size());
}

template <typename DA, typename DB>
double rmse(const Eigen::MatrixBase<DA>& pred, const Eigen::MatrixBase<DB>& truth) {
  detail::check_pair(static_cast<std::size_t>(pred.size()), static_cast<std::size_t>(truth.size()), 1, "rmse");
  double s = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const double e = static_cast<double>(pred(i)) - static_cast<double>(truth(i));
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(pred.size()));
}

struct LevelMetrics {
  std::size_t n = 0;
  double mae = 0, rmse = 0;
  std::optional<double> pearson, spearman, kendall, kendall_tau_a;
};

/// Correlations are left undefined when fewer than two samples exist.
LevelMetrics evaluate_level(const Vector& pred, const Vector& truth);

struct MetricReport {
  LevelMetrics cell;
  LevelMetrics grid;

  std::string to_text() const;
  std::string to_json() const;
};

}  // namespace hetcong
