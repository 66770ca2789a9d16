#include <doctest.h>

#include <cmath>

#include "creepuq/metrics.hpp"
#include "creepuq/rng.hpp"
#include "oracles.hpp"

using namespace creepuq;

TEST_CASE("pcc on exact linear relations") {
    std::vector<double> y{1.0, 2.0, 3.0, 4.0};
    std::vector<double> twice{2.0, 4.0, 6.0, 8.0};
    std::vector<double> negated{-1.0, -2.0, -3.0, -4.0};
    CHECK(pcc(y, twice) == doctest::Approx(1.0));
    CHECK(pcc(y, negated) == doctest::Approx(-1.0));
    CHECK(pcc({1.0, 2.0, 3.0}, {1.0, 2.0, 4.0}) == doctest::Approx(0.9820).epsilon(1e-4 / 0.982));
    CHECK_THROWS_AS(pcc({1.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("r_squared") {
    std::vector<double> y{1.0, 2.0, 3.0};
    CHECK(r_squared(y, y) == doctest::Approx(1.0));
    CHECK(r_squared(y, {2.0, 2.0, 2.0}) == doctest::Approx(0.0));
    CHECK(r_squared(y, {1.0, 2.0, 4.0}) == doctest::Approx(0.5));
    CHECK(r_squared(y, {5.0, 5.0, 5.0}) < 0.0);  // worse than the mean predictor
    CHECK_THROWS_AS(r_squared({2.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("rmse and mae") {
    CHECK(rmse({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(mae({1.0, 2.0}, {1.0, 2.0}) == 0.0);
    CHECK(rmse({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(std::sqrt(12.5)));
    CHECK(mae({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(3.5));
    CHECK(rmse({5.0, 7.0}, {4.0, 6.0}) == doctest::Approx(1.0));
    CHECK(mae({5.0, 7.0}, {4.0, 6.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(rmse({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("coverage") {
    std::vector<double> y{1.0, 2.0, 3.0, 4.0};
    std::vector<std::pair<double, double>> all{{0, 2}, {1, 3}, {2, 4}, {3, 5}};
    CHECK(coverage(y, all) == doctest::Approx(1.0));
    std::vector<std::pair<double, double>> none{{2, 3}, {3, 4}, {4, 5}, {5, 6}};
    CHECK(coverage(y, none) == doctest::Approx(0.0));
    std::vector<std::pair<double, double>> three{{0, 2}, {1, 3}, {2, 4}, {5, 6}};
    CHECK(coverage(y, three) == doctest::Approx(0.75));
    std::vector<std::pair<double, double>> inverted{{2, 1}, {1, 3}, {2, 4}, {3, 5}};
    CHECK_THROWS_AS(coverage(y, inverted), std::invalid_argument);
}

TEST_CASE("mean interval width") {
    CHECK(mean_interval_width({{1, 1}, {2, 2}}) == 0.0);
    CHECK(mean_interval_width({{0, 1}, {0, 3}}) == doctest::Approx(2.0));
    CHECK(mean_interval_width({{-1, 1}}) == doctest::Approx(2.0));
}

TEST_CASE("composite metric") {
    CHECK(composite_metric(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(composite_metric(0.9433, 0.39) == doctest::Approx(1.3485).epsilon(1e-4 / 1.3485));
    CHECK(composite_metric(0.0, 1e9) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK_THROWS_AS(composite_metric(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(composite_metric(1.5, 1.0), std::invalid_argument);
}

TEST_CASE("pcc invariant under positive affine transforms") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 3 + rng.index(40);
        std::vector<double> y(n), p(n);
        for (auto& v : y) v = rng.normal();
        for (auto& v : p) v = rng.normal();
        double base = pcc(y, p);
        double a = rng.uniform(0.1, 5.0), b = rng.uniform(-10.0, 10.0);
        std::vector<double> ya(n);
        for (std::size_t i = 0; i < n; ++i) ya[i] = a * y[i] + b;
        CHECK(pcc(ya, p) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("rmse dominates mae") {
    Rng rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 2 + rng.index(30);
        std::vector<double> y(n), p(n);
        for (auto& v : y) v = rng.normal(0.0, 3.0);
        for (auto& v : p) v = rng.normal(0.0, 3.0);
        CHECK(rmse(y, p) >= mae(y, p) - 1e-15);
    }
}

TEST_CASE("r2 equals pcc squared for the least-squares affine fit") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 5 + rng.index(40);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.normal();
            y[i] = 2.0 * x[i] + rng.normal(0.0, 0.7);
        }
        // Closed-form simple regression of y on x.
        double mx = oracles::brute_mean(x), my = oracles::brute_mean(y);
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        double slope = sxy / sxx, intercept = my - slope * mx;
        std::vector<double> fit(n);
        for (std::size_t i = 0; i < n; ++i) fit[i] = slope * x[i] + intercept;
        CHECK(r_squared(y, fit) == doctest::Approx(pcc(y, fit) * pcc(y, fit)).epsilon(1e-10));
    }
}

TEST_CASE("coverage monotone under interval widening") {
    Rng rng(9);
    std::size_t n = 60;
    std::vector<double> y(n), mean(n), sd(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng.normal();
        mean[i] = rng.normal();
        sd[i] = rng.uniform(0.1, 2.0);
    }
    double prev = -1.0;
    for (double z : {0.5, 1.0, 1.96, 3.0, 5.0}) {
        std::vector<std::pair<double, double>> iv(n);
        for (std::size_t i = 0; i < n; ++i) iv[i] = {mean[i] - z * sd[i], mean[i] + z * sd[i]};
        double c = coverage(y, iv);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("metrics agree with brute-force loops") {
    Rng rng(10);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 2 + rng.index(25);
        std::vector<double> y(n), p(n);
        std::vector<std::pair<double, double>> iv(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.normal(0.0, 2.0);
            p[i] = y[i] + rng.normal(0.0, 1.0);
            double lo = p[i] - rng.uniform(0.01, 2.0);
            double hi = p[i] + rng.uniform(0.01, 2.0);
            iv[i] = {lo, hi};
        }
        CHECK(pcc(y, p) == doctest::Approx(oracles::brute_pcc(y, p)).epsilon(1e-12));
        CHECK(r_squared(y, p) == doctest::Approx(oracles::brute_r2(y, p)).epsilon(1e-12));
        CHECK(rmse(y, p) == doctest::Approx(oracles::brute_rmse(y, p)).epsilon(1e-12));
        CHECK(mae(y, p) == doctest::Approx(oracles::brute_mae(y, p)).epsilon(1e-12));
        CHECK(coverage(y, iv) == doctest::Approx(oracles::brute_coverage(y, iv)).epsilon(1e-12));
        double w = mean_interval_width(iv);
        CHECK(w == doctest::Approx(oracles::brute_width(iv)).epsilon(1e-12));
        double cov = coverage(y, iv);
        CHECK(composite_metric(cov, w) ==
              doctest::Approx(oracles::brute_composite(cov, w)).epsilon(1e-12));
    }
}

TEST_CASE("evaluation report aggregates match the fold values") {
    EvaluationReport r;
    r.model = "demo";
    for (std::size_t f = 0; f < 3; ++f) {
        FoldMetrics fm;
        fm.fold = f;
        fm.pcc = 0.9 + 0.01 * static_cast<double>(f);
        fm.r_squared = 0.8 + 0.05 * static_cast<double>(f);
        fm.rmse = 0.2;
        fm.mae = 0.1;
        fm.coverage = 0.9;
        fm.interval_width = 0.5 + 0.1 * static_cast<double>(f);
        fm.composite = composite_metric(*fm.coverage, *fm.interval_width);
        r.folds.push_back(fm);
    }
    MetricSummary s = r.summary("r2");
    CHECK(s.mean == doctest::Approx(0.85));
    // Sample SD over {0.8, 0.85, 0.9}.
    CHECK(s.sd == doctest::Approx(0.05));
    CHECK(r.has_uncertainty());
    auto direct = r.composite_direct();
    REQUIRE(direct.has_value());
    CHECK(*direct == doctest::Approx(composite_metric(0.9, 0.6)));

    nlohmann::json j = r.to_json();
    CHECK(j["folds"].size() == 3);
    CHECK(j["aggregate"].contains("composite_direct"));
}

TEST_CASE("uq metrics absent without std output") {
    EvaluationReport r;
    r.model = "nn";
    FoldMetrics fm;
    fm.pcc = 0.9;
    fm.r_squared = 0.8;
    fm.rmse = 0.2;
    fm.mae = 0.15;
    r.folds.push_back(fm);
    CHECK_FALSE(r.has_uncertainty());
    CHECK_FALSE(r.composite_direct().has_value());
    nlohmann::json j = r.to_json();
    CHECK_FALSE(j["aggregate"].contains("coverage"));
}
