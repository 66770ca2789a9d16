#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "creepuq/dataset.hpp"
#include "creepuq/physics.hpp"
#include "creepuq/rng.hpp"

using namespace creepuq;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("load_csv parses a simple file") {
    auto path = write_temp_csv("creepuq_basic.csv",
                               "T,stress,tf\n900,100,1000\n950,120,500\n1000,140,100\n");
    Dataset ds = load_csv(path, "tf");
    CHECK(ds.size() == 3);
    CHECK(ds.feature_count() == 2);
    CHECK(ds.feature_names[0] == "T");
    CHECK(ds.feature_names[1] == "stress");
    CHECK(ds.features.at(0, 0) == 900.0);
    CHECK(ds.target[2] == 100.0);
    CHECK(ds.dropped_rows == 0);
}

TEST_CASE("load_csv drops rows with empty cells and counts them") {
    auto path = write_temp_csv("creepuq_empty.csv",
                               "T,stress,tf\n900,100,1000\n950,,500\n1000,140,100\n");
    Dataset ds = load_csv(path, "tf");
    CHECK(ds.size() == 2);
    CHECK(ds.dropped_rows == 1);
}

TEST_CASE("load_csv error contracts") {
    auto path = write_temp_csv("creepuq_err.csv", "T,stress,tf\n900,100,1000\n");
    CHECK_THROWS_WITH_AS(load_csv(path, "life"),
                         doctest::Contains("missing target column"), std::runtime_error);
    CHECK_THROWS_AS(load_csv("/nonexistent/creepuq.csv", "tf"), std::runtime_error);

    auto bad = write_temp_csv("creepuq_bad.csv", "T,stress,tf\n900,abc,1000\n");
    CHECK_THROWS_WITH_AS(load_csv(bad, "tf"), doctest::Contains("non-numeric"),
                         std::runtime_error);

    auto empty = write_temp_csv("creepuq_none.csv", "T,stress,tf\n,,\n");
    CHECK_THROWS_WITH_AS(load_csv(empty, "tf"), doctest::Contains("zero usable rows"),
                         std::runtime_error);
}

TEST_CASE("load_csv keeps every full row") {
    std::string content = "a,b,t\n";
    for (int i = 0; i < 57; ++i)
        content += std::to_string(i) + "," + std::to_string(2 * i) + "," + std::to_string(i + 1) + "\n";
    auto path = write_temp_csv("creepuq_full.csv", content);
    Dataset ds = load_csv(path, "t");
    CHECK(ds.size() == 57);
    CHECK(ds.dropped_rows == 0);
}

TEST_CASE("apply_log10_target") {
    Dataset ds;
    ds.feature_names = {"x"};
    ds.features = Tensor({2, 1}, {1.0, 2.0});
    ds.target = {1000.0, 1.0};
    Dataset t = apply_log10_target(ds);
    CHECK(t.target[0] == doctest::Approx(3.0));
    CHECK(t.target[1] == doctest::Approx(0.0));
    CHECK(t.target_transformed);
    CHECK_THROWS_AS(apply_log10_target(t), std::runtime_error);  // double application

    ds.target = {0.0, 1.0};
    CHECK_THROWS_WITH_AS(apply_log10_target(ds), doctest::Contains("index 0"),
                         std::runtime_error);
}

TEST_CASE("min-max normalization") {
    Dataset ds;
    ds.feature_names = {"a", "b"};
    ds.features = Tensor({3, 2}, {2.0, 5.0, 4.0, 5.0, 6.0, 5.0});
    ds.target = {1.0, 2.0, 3.0};
    auto bounds = fit_normalization(ds);
    Dataset n = apply_normalization(ds, bounds);
    CHECK(n.features.at(0, 0) == doctest::Approx(0.0));
    CHECK(n.features.at(1, 0) == doctest::Approx(0.5));
    CHECK(n.features.at(2, 0) == doctest::Approx(1.0));
    // Constant column maps to zero.
    CHECK(n.features.at(0, 1) == 0.0);
    CHECK(n.features.at(2, 1) == 0.0);
    CHECK(n.normalization_bounds.has_value());

    // Test-set values outside the training bounds are not clipped.
    Dataset test;
    test.feature_names = ds.feature_names;
    test.features = Tensor({1, 2}, {8.0, 5.0});
    test.target = {1.0};
    Dataset tn = apply_normalization(test, bounds);
    CHECK(tn.features.at(0, 0) == doctest::Approx(1.5));

    CHECK_THROWS_AS(apply_normalization(test, {{0.0, 1.0}}), std::runtime_error);
}

TEST_CASE("normalization round-trip recovers originals") {
    Rng rng(11);
    Dataset ds;
    ds.feature_names = {"a", "b", "c"};
    ds.features = Tensor({40, 3});
    for (auto& v : ds.features.values) v = rng.uniform(-30.0, 70.0);
    ds.target.assign(40, 1.0);
    Dataset n = apply_normalization(ds, fit_normalization(ds));
    Dataset back = invert_normalization(n);
    for (std::size_t i = 0; i < ds.features.size(); ++i)
        CHECK(back.features.values[i] == doctest::Approx(ds.features.values[i]).epsilon(1e-12));
}

TEST_CASE("fit_normalization needs two rows") {
    Dataset ds;
    ds.feature_names = {"a"};
    ds.features = Tensor({1, 1}, {1.0});
    ds.target = {1.0};
    CHECK_THROWS_AS(fit_normalization(ds), std::runtime_error);
}

TEST_CASE("kfold_split basics") {
    FoldSplit s = kfold_split(10, 5, 7);
    CHECK(s.fold_count == 5);
    std::vector<std::size_t> counts(5, 0);
    for (std::size_t f : s.assignments) ++counts[f];
    for (std::size_t c : counts) CHECK(c == 2);

    FoldSplit again = kfold_split(10, 5, 7);
    CHECK(s.assignments == again.assignments);

    FoldSplit uneven = kfold_split(7, 5, 3);
    std::vector<std::size_t> sizes(5, 0);
    for (std::size_t f : uneven.assignments) ++sizes[f];
    std::multiset<std::size_t> size_set(sizes.begin(), sizes.end());
    CHECK(size_set == std::multiset<std::size_t>{1, 1, 1, 2, 2});

    CHECK_THROWS_AS(kfold_split(3, 5, 0), std::runtime_error);
    CHECK_THROWS_AS(kfold_split(10, 1, 0), std::runtime_error);
}

TEST_CASE("kfold partition property over random trials") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 2 + rng.index(60);
        std::size_t k = 2 + rng.index(n - 1);
        FoldSplit s = kfold_split(n, k, rng.next_u64());
        REQUIRE(s.assignments.size() == n);
        std::size_t lo = n, hi = 0;
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t f : s.assignments) {
            REQUIRE(f < k);
            ++counts[f];
        }
        for (std::size_t c : counts) {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        REQUIRE(hi - lo <= 1);
    }
}

TEST_CASE("synthetic generator determinism and noise-free structure") {
    SyntheticSpec spec;
    spec.n = 50;
    spec.noise_sd = 0.0;
    spec.seed = 5;
    Dataset a = generate_synthetic_creep(spec);
    Dataset b = generate_synthetic_creep(spec);
    CHECK(a.features.values == b.features.values);
    CHECK(a.target == b.target);

    // Zero noise: the target is an exact function of (T, stress).
    const auto& c = spec.stress_poly;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double temperature = a.features.at(i, 0);
        double stress = a.features.at(i, 1);
        double x = std::log10(stress);
        double fs = c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        double expected = fs / temperature - spec.c_lm;
        CHECK(std::log10(a.target[i]) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(temperature >= 873.0);
        CHECK(temperature <= 1073.0);
        CHECK(stress >= 40.0);
        CHECK(stress <= 300.0);
    }
    CHECK(a.metadata.contains("generator"));
}

TEST_CASE("synthetic noise-free data recovers the generator polynomial") {
    SyntheticSpec spec;
    spec.n = 500;
    spec.noise_sd = 0.0;
    spec.seed = 21;
    Dataset ds = apply_log10_target(generate_synthetic_creep(spec));
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double temperature = ds.features.at(i, 0);
        double stress = ds.features.at(i, 1);
        double p = temperature * (spec.c_lm + ds.target[i]);
        pairs.emplace_back(p, stress);
    }
    auto coef = fit_stress_polynomial(pairs);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(coef[k] == doctest::Approx(spec.stress_poly[k]).epsilon(1e-8));
}

TEST_CASE("dataset row subsetting keeps metadata and state") {
    SyntheticSpec spec;
    spec.n = 10;
    spec.seed = 1;
    Dataset ds = generate_synthetic_creep(spec);
    Dataset sub = ds.rows({0, 3, 7});
    CHECK(sub.size() == 3);
    CHECK(sub.target[1] == ds.target[3]);
    CHECK(sub.features.at(2, 1) == ds.features.at(7, 1));
    CHECK_THROWS_AS(ds.rows({99}), std::out_of_range);
}
