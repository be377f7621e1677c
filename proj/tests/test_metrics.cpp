#include <doctest.h>

#include <random>

#include "hetcong/metrics.hpp"
#include "oracles.hpp"

using namespace hetcong;

namespace {

Vector to_vec(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

TEST_CASE("Kendall on a single swap") {
  const Vector a = to_vec({1, 2, 3}), b = to_vec({1, 3, 2});
  const KendallResult k = kendall(a, b);
  REQUIRE(k.tau_b);
  REQUIRE(k.tau_a);
  CHECK(*k.tau_b == doctest::Approx(1.0 / 3));
  CHECK(*k.tau_a == doctest::Approx(1.0 / 3));
}

TEST_CASE("ranks average over ties") {
  const Vector r = average_ranks(to_vec({10, 20, 10, 30, 20, 20}));
  CHECK(r(0) == 1.5);
  CHECK(r(2) == 1.5);
  CHECK(r(1) == 4);
  CHECK(r(4) == 4);
  CHECK(r(3) == 6);
}

TEST_CASE("metrics match brute force") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    const bool ties = trial % 2 == 1;
    std::vector<double> a(n), b(n);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> few(0, 6);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = ties ? few(rng) : nd(rng);
      b[i] = ties ? few(rng) + 0.5 * a[i] : a[i] + nd(rng);
    }
    if (ties) a[0] = 0, a[1] = 1;  // never constant
    b[0] = -5, b[1] = 5;
    const Vector va = to_vec(a), vb = to_vec(b);
    CHECK(std::abs(*pearson(va, vb) - oracle::brute_pearson(a, b)) < 1e-12);
    CHECK(std::abs(*spearman(va, vb) - oracle::brute_spearman(a, b)) < 1e-12);
    const auto k = kendall(va, vb);
    const auto bk = oracle::brute_kendall(a, b);
    CHECK(std::abs(*k.tau_b - bk.tau_b) < 1e-12);
    CHECK(k.tau_a.has_value() == !bk.has_ties);
    if (k.tau_a) CHECK(std::abs(*k.tau_a - bk.tau_a) < 1e-12);
    CHECK(std::abs(mae(va, vb) - oracle::brute_mae(a, b)) < 1e-12);
    CHECK(std::abs(rmse(va, vb) - oracle::brute_rmse(a, b)) < 1e-12);
  }
}

TEST_CASE("correlations of a constant vector are undefined") {
  const Vector c = Vector::Constant(5, 0.3), v = to_vec({1, 2, 3, 4, 5});
  CHECK_FALSE(pearson(c, v).has_value());
  CHECK_FALSE(spearman(v, c).has_value());
  CHECK_FALSE(kendall(c, v).tau_b.has_value());
  CHECK(mae(c, c) == 0);
  CHECK_THROWS_AS(pearson(v, c.head(4)), ValidationError);
  CHECK_THROWS_AS(spearman(v.head(1), v.head(1)), ValidationError);
}

TEST_CASE("metric report renders undefined values") {
  MetricReport r;
  r.cell = evaluate_level(to_vec({0.5}), to_vec({0.25}));
  r.grid = evaluate_level(to_vec({0.1, 0.2, 0.3}), to_vec({0.3, 0.2, 0.1}));
  CHECK(r.cell.n == 1);
  CHECK(r.cell.mae == 0.25);
  CHECK_FALSE(r.cell.spearman.has_value());
  CHECK(*r.grid.spearman == doctest::Approx(-1));
  const std::string text = r.to_text();
  CHECK(text.find("undefined") != std::string::npos);
  CHECK(text.find("-1.0000") != std::string::npos);
  const std::string json = r.to_json();
  CHECK(json.find("\"spearman\":null") != std::string::npos);
  CHECK(json.find("\"n\":3") != std::string::npos);
}
