#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "rankmed/pipeline.hpp"
#include "rankmed/relevance.hpp"
#include "support/generators.hpp"
#include "support/l21_oracle.hpp"

using namespace rankmed;
using namespace rankmed::testing;

namespace {

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

/// d x n design with a trailing all-one row, c x n one-hot targets (every class present).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> random_problem(Rng& rng, int d, int c, int n) {
  Eigen::MatrixXd x(d, n);
  x.topRows(d - 1) = gaussian(rng, d - 1, n);
  x.row(d - 1).setOnes();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(c, n);
  for (int i = 0; i < n; ++i) y(i < c ? i : uniform_int(rng, 0, c - 1), i) = 1.0;
  return {x, y};
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Imbalanced three-class data: class sizes 20/8/5, two informative features plus noise.
struct Labeled {
  FeatureMatrix f;
  LabelVector labels;
};

Labeled imbalanced(Rng& rng, int noise) {
  const std::vector<int> sizes{20, 8, 5};
  std::vector<std::string> names;
  for (std::size_t l = 0; l < sizes.size(); ++l)
    for (int k = 0; k < sizes[l]; ++k) names.push_back("c" + std::to_string(l));
  const auto n = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd v = gaussian(rng, 2 + noise, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (names[static_cast<std::size_t>(i)] == "c1") v(0, i) += 2.0;
    if (names[static_cast<std::size_t>(i)] == "c2") v(1, i) += 2.5;
  }
  return {FeatureMatrix(v), LabelVector::from_strings(names)};
}

std::vector<std::size_t> all_features(const FeatureMatrix& f) {
  std::vector<std::size_t> s(f.features());
  std::iota(s.begin(), s.end(), std::size_t{0});
  return s;
}

/// Appends a second copy of every instance of class `l`.
Labeled duplicate_class(const Labeled& d, std::size_t l) {
  std::vector<std::size_t> rows(d.labels.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    if (d.labels.code(i) == l) rows.push_back(i);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(d.f.features()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = d.f.values().col(static_cast<Eigen::Index>(rows[k]));
  return {FeatureMatrix(v, d.f.names()), d.labels.subset(rows)};
}

}  // namespace

TEST_CASE("objective examples", "[relevance]") {
  Rng rng(21);
  auto [x, y] = random_problem(rng, 4, 3, 5);
  CHECK(objective(Eigen::MatrixXd::Zero(4, 3), x, y, 1.0) == Catch::Approx(5.0));

  Eigen::MatrixXd x1(2, 1), y1(1, 1), w1(2, 1);
  x1 << 2, 1;
  y1 << 1;
  w1 << 0.25, 0.5;
  CHECK(objective(w1, x1, y1, 0.0) == 0.0);

  const Eigen::MatrixXd w = gaussian(rng, 4, 3);
  const Eigen::MatrixXd yr = gaussian(rng, 3, 5);
  CHECK(std::abs(objective(w, x, yr, 0.7) - l21_objective_loops(w, x, yr, 0.7)) <= 1e-12);
  CHECK_THROWS_AS(objective(Eigen::MatrixXd::Zero(3, 3), x, y, 1.0), DomainError);
}

TEST_CASE("weight matrix views", "[relevance]") {
  Eigen::MatrixXd w(3, 2);
  w << 3, 4, 0, -1, 7, 7;
  const WeightMatrix wm(w);
  CHECK(wm.features() == 2);
  CHECK(wm.classes() == 2);
  CHECK(wm.bias_row()(0) == 7.0);
  const auto s = relevance_scores(wm);
  CHECK(s.total(0) == Catch::Approx(5.0));
  CHECK(s.total(1) == Catch::Approx(1.0));
  CHECK(s.per_class(1, 1) == 1.0);
  CHECK(s.total.size() == 2);

  const auto zero = relevance_scores(WeightMatrix(Eigen::MatrixXd::Zero(4, 3)));
  CHECK(zero.total.isZero(0.0));
  CHECK(zero.per_class.isZero(0.0));

  CHECK_THROWS_AS(WeightMatrix(Eigen::MatrixXd::Zero(1, 3)), DomainError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(WeightMatrix(bad), DomainError);
}

TEST_CASE("score identity", "[relevance][property]") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const WeightMatrix w(gaussian(rng, 2 + trial % 6, 1 + trial % 4));
    const auto s = relevance_scores(w);
    for (Eigen::Index j = 0; j < s.total.size(); ++j)
      REQUIRE(std::abs(s.total(j) * s.total(j) - s.per_class.row(j).squaredNorm()) <= 1e-12 * std::max(1.0, s.total(j) * s.total(j)));
  }
}

TEST_CASE("ranking order", "[relevance]") {
  const auto r = rank_features(Eigen::Vector3d(0.1, 0.9, 0.5));
  REQUIRE(r.size() == 3);
  CHECK(r[0].index == 1);
  CHECK(r[1].index == 2);
  CHECK(r[2].index == 0);
  const auto eq = rank_features(Eigen::Vector4d::Constant(0.3));
  for (std::size_t k = 0; k < 4; ++k) CHECK(eq[k].index == k);
  CHECK_THROWS_AS(rank_features(Eigen::Vector2d(1.0, std::numeric_limits<double>::infinity())), DomainError);
}

TEST_CASE("solver configuration and input checks", "[relevance]") {
  Rng rng(23);
  auto [x, y] = random_problem(rng, 3, 2, 6);
  CHECK_THROWS_AS(solve_l21(x, y, SolverConfig{0.0}), DomainError);
  CHECK_THROWS_AS(solve_l21(x, y, SolverConfig{-1.0}), DomainError);
  CHECK_THROWS_AS(solve_l21(x, y, SolverConfig{1.0, 0}), DomainError);
  Eigen::MatrixXd xn = x;
  xn(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_l21(xn, y), DomainError);
  CHECK_THROWS_AS(solve_l21(x, y.leftCols(5)), DomainError);

  const auto capped = solve_l21(x, y, SolverConfig{1.0, 1, 1e-300});
  CHECK_FALSE(capped.report.converged);
  CHECK(capped.report.iterations == 1);
  CHECK(capped.report.objective_trace.size() == 2);
}

TEST_CASE("heavy regularization shrinks weights below the zero-point bound", "[relevance]") {
  Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    auto [x, y] = random_problem(rng, 4, 3, 9);
    const double gamma = 1e6;
    const auto r = solve_l21(x, y, SolverConfig{gamma});
    const double reg = r.weights.extended().rowwise().norm().sum();
    CHECK(reg <= y.colwise().norm().sum() / gamma);
  }
}

TEST_CASE("toy instance agrees with the subgradient oracle", "[relevance]") {
  Eigen::MatrixXd x(2, 2), y(1, 2);
  x << 1.0, -0.5, 1.0, 1.0;
  y << 1.0, 0.0;
  const double gamma = 0.3;
  const auto solved = solve_l21(x, y, SolverConfig{gamma});
  const auto oracle = subgradient_oracle(x, y, gamma, 200, 5000);
  const double ours = objective(solved.weights, x, y, gamma);
  INFO("solver " << ours << " oracle " << oracle.value);
  CHECK(relative_gap(ours, oracle.value) <= 1e-4);
}

TEST_CASE("an indicator feature gets the largest score", "[relevance]") {
  Rng rng(25);
  const int n = 40, m = 6;
  Eigen::MatrixXd v = gaussian(rng, m, n);
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) {
    const bool first = i % 3 == 0;
    names.push_back(first ? "one" : (i % 3 == 1 ? "two" : "three"));
    v(0, i) = first ? 1.0 : 0.0;
  }
  const FeatureMatrix f(v);
  const auto labels = LabelVector::from_strings(names);
  for (bool compensate : {true, false}) {
    const auto run = run_relevance(f, labels, all_features(f), compensate, SolverConfig{1.0});
    const auto order = rank_features(run.scores.total);
    INFO("compensate " << compensate << " scores " << run.scores.total.transpose());
    CHECK(order.front().index == 0);
    for (Eigen::Index j = 1; j < m; ++j) CHECK(run.scores.total(0) > run.scores.total(j));
  }
}

TEST_CASE("objective trace never increases", "[relevance][property]") {
  Rng rng(26);
  for (int trial = 0; trial < 200; ++trial) {
    auto [x, y] = random_problem(rng, uniform_int(rng, 2, 8), uniform_int(rng, 1, 4), uniform_int(rng, 4, 30));
    const auto r = solve_l21(x, y, SolverConfig{0.05 + 0.5 * (trial % 7)});
    const auto& t = r.report.objective_trace;
    REQUIRE(t.size() == static_cast<std::size_t>(r.report.iterations) + 1);
    for (std::size_t k = 1; k < t.size(); ++k) REQUIRE(t[k] <= t[k - 1] * (1.0 + 1e-9));
    REQUIRE(std::isfinite(t.back()));
    REQUIRE(objective(r.weights, x, y, 0.05 + 0.5 * (trial % 7)) == *std::min_element(t.begin(), t.end()));
  }
}

TEST_CASE("solver matches the subgradient oracle on random instances", "[relevance][property][slow]") {
  Rng rng(27);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = uniform_int(rng, 2, 6), c = uniform_int(rng, 1, 3), n = uniform_int(rng, std::max(c, 3), 12);
    auto [x, y] = random_problem(rng, d, c, n);
    const double gamma = std::vector<double>{0.1, 0.5, 1.0, 2.0}[static_cast<std::size_t>(trial % 4)];
    const auto ours = solve_l21(x, y, SolverConfig{gamma, 1000, 1e-12});
    const auto oracle = subgradient_oracle(x, y, gamma);
    const double f = objective(ours.weights, x, y, gamma);
    const double gap = (f - oracle.value) / oracle.value;
    worst = std::max(worst, gap);
    INFO("trial " << trial << " ours " << f << " oracle " << oracle.value);
    REQUIRE(gap <= 1e-4);
  }
  WARN("largest relative excess over the oracle: " << worst);
}

TEST_CASE("duplicating a class is absorbed by compensation", "[relevance][property]") {
  Rng rng(28);
  double worst_comp = 0.0, least_plain = 1e300;
  for (int trial = 0; trial < 20; ++trial) {
    const auto base = imbalanced(rng, 2 + trial % 3);
    const std::size_t l = static_cast<std::size_t>(trial % 3);
    const auto dup = duplicate_class(base, l);
    const double n = static_cast<double>(base.labels.size());
    const double factor = (n + static_cast<double>(base.labels.class_counts()[l])) / n;
    // The objective flattens well before W settles, so both runs go to a fixed budget.
    const SolverConfig cfg{1.0, 4000, std::numeric_limits<double>::min()};
    const SolverConfig scaled{cfg.gamma * factor, cfg.max_iters, cfg.rel_tol};
    const auto features = all_features(base.f);

    const auto a = run_relevance(base.f, base.labels, features, true, cfg);
    const auto b = run_relevance(dup.f, dup.labels, features, true, scaled);
    const double comp_diff = (a.weights.extended() - b.weights.extended()).cwiseAbs().maxCoeff();
    worst_comp = std::max(worst_comp, comp_diff);
    REQUIRE(comp_diff <= 1e-6);

    const auto pa = run_relevance(base.f, base.labels, features, false, cfg);
    const auto pb = run_relevance(dup.f, dup.labels, features, false, scaled);
    const double plain_diff = (pa.weights.extended() - pb.weights.extended()).cwiseAbs().maxCoeff();
    least_plain = std::min(least_plain, plain_diff);
    REQUIRE(plain_diff > 1e-2);
  }
  WARN("compensated max deviation " << worst_comp << ", uncompensated min deviation " << least_plain);
}

TEST_CASE("permuting feature rows permutes the weights", "[relevance][property]") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = uniform_int(rng, 3, 7), c = uniform_int(rng, 2, 3);
    auto [x, y] = random_problem(rng, d, c, uniform_int(rng, 8, 20));
    std::vector<int> perm(static_cast<std::size_t>(d - 1));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd xp = x;
    for (int j = 0; j < d - 1; ++j) xp.row(j) = x.row(perm[static_cast<std::size_t>(j)]);
    const SolverConfig cfg{0.5, 4000, std::numeric_limits<double>::min()};
    const auto a = solve_l21(x, y, cfg);
    const auto b = solve_l21(xp, y, cfg);
    for (int j = 0; j < d - 1; ++j)
      REQUIRE((b.weights.extended().row(j) - a.weights.extended().row(perm[static_cast<std::size_t>(j)])).cwiseAbs().maxCoeff() <= 1e-6);
    REQUIRE((b.weights.bias_row() - a.weights.bias_row()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("total weight norm does not grow with gamma", "[relevance][property]") {
  Rng rng(30);
  for (int trial = 0; trial < 20; ++trial) {
    auto [x, y] = random_problem(rng, uniform_int(rng, 2, 6), uniform_int(rng, 1, 3), uniform_int(rng, 6, 15));
    double previous = std::numeric_limits<double>::infinity();
    for (double gamma : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      const auto r = solve_l21(x, y, SolverConfig{gamma, 5000, 1e-14});
      const double reg = r.weights.extended().rowwise().norm().sum();
      INFO("trial " << trial << " gamma " << gamma);
      REQUIRE(reg <= previous * (1.0 + 1e-8) + 1e-8);
      previous = reg;
    }
  }
}

TEST_CASE("relevance pipeline rejects a single class", "[relevance]") {
  Rng rng(31);
  const FeatureMatrix f(gaussian(rng, 3, 6));
  const LabelVector one(std::vector<std::size_t>(6, 0), {"only"});
  CHECK_THROWS_AS(run_relevance(f, one, all_features(f), true), DomainError);
}
