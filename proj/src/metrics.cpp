#include "hetcong/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace hetcong {
namespace detail {

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / (std::sqrt(saa) * std::sqrt(sbb)), -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

std::int64_t tie_pairs(const std::vector<double>& sorted_values) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= sorted_values.size(); ++i) {
    if (i < sorted_values.size() && sorted_values[i] == sorted_values[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

// Counts pairs i < j with v[i] > v[j] while sorting v ascending.
std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

KendallCounts kendall_counts(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  KendallCounts c;
  c.pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  std::int64_t run_x = 1, run_xy = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const bool same_x = i < n && x[order[i]] == x[order[i - 1]];
    const bool same_xy = same_x && y[order[i]] == y[order[i - 1]];
    if (same_x) {
      ++run_x;
    } else {
      c.x_ties += run_x * (run_x - 1) / 2;
      run_x = 1;
    }
    if (same_xy) {
      ++run_xy;
    } else {
      c.joint_ties += run_xy * (run_xy - 1) / 2;
      run_xy = 1;
    }
  }

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t swaps = merge_count(ys, buf, 0, n);
  c.y_ties = tie_pairs(ys);
  c.score = c.pairs - c.x_ties - c.y_ties + c.joint_ties - 2 * swaps;
  return c;
}

}  // namespace detail

LevelMetrics evaluate_level(const Vector& pred, const Vector& truth) {
  detail::check_pair(static_cast<std::size_t>(pred.size()), static_cast<std::size_t>(truth.size()), 1, "evaluate");
  LevelMetrics m;
  m.n = static_cast<std::size_t>(pred.size());
  m.mae = mae(pred, truth);
  m.rmse = rmse(pred, truth);
  if (m.n >= 2) {
    m.pearson = pearson(pred, truth);
    m.spearman = spearman(pred, truth);
    const auto k = kendall(pred, truth);
    m.kendall = k.tau_b;
    m.kendall_tau_a = k.tau_a;
  }
  return m;
}

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << *v;
  return os.str();
}

nlohmann::ordered_json level_json(const LevelMetrics& m) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
  j["n"] = m.n;
  j["mae"] = m.mae;
  j["rmse"] = m.rmse;
  j["pearson"] = opt(m.pearson);
  j["spearman"] = opt(m.spearman);
  j["kendall"] = opt(m.kendall);
  j["kendall_tau_a"] = opt(m.kendall_tau_a);
  return j;
}

}  // namespace

std::string MetricReport::to_text() const {
  std::ostringstream os;
  os << std::left << std::setw(6) << "level" << std::right << std::setw(8) << "n" << std::setw(11) << "MAE"
     << std::setw(11) << "RMSE" << std::setw(11) << "Pearson" << std::setw(11) << "Spearman" << std::setw(11)
     << "Kendall" << "\n";
  auto row = [&](const char* name, const LevelMetrics& m) {
    os << std::left << std::setw(6) << name << std::right << std::setw(8) << m.n << std::setw(11)
       << fmt(m.mae) << std::setw(11) << fmt(m.rmse) << std::setw(11) << fmt(m.pearson) << std::setw(11)
       << fmt(m.spearman) << std::setw(11) << fmt(m.kendall) << "\n";
  };
  row("cell", cell);
  row("grid", grid);
  return os.str();
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["cell"] = level_json(cell);
  j["grid"] = level_json(grid);
  return j.dump();
}

}  // namespace hetcong
