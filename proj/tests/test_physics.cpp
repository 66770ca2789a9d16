#include <doctest.h>

#include <cmath>

#include "creepuq/dataset.hpp"
#include "creepuq/physics.hpp"
#include "creepuq/rng.hpp"
#include "oracles.hpp"

using namespace creepuq;

TEST_CASE("larson-miller parameter") {
    TtpModel m;
    m.kind = TtpKind::kLarsonMiller;
    m.c_lm = 20.0;
    CHECK(ttp_parameter(m, 3.0, 1000.0) == doctest::Approx(23000.0));
    CHECK_THROWS_AS(ttp_parameter(m, 3.0, -5.0), std::domain_error);
}

TEST_CASE("manson-haferd parameter and singularity") {
    TtpModel m;
    m.kind = TtpKind::kMansonHaferd;
    m.log10_t_in = 10.0;
    m.t_in = 500.0;
    CHECK(ttp_parameter(m, 3.0, 900.0) == doctest::Approx(-0.0175));
    CHECK_THROWS_AS(ttp_parameter(m, 3.0, 500.0), std::domain_error);
}

TEST_CASE("orr-sherby-dorn with zero activation term") {
    TtpModel m;
    m.kind = TtpKind::kOrrSherbyDorn;
    m.q_over_r = 0.0;
    CHECK(ttp_parameter(m, 2.7, 950.0) == doctest::Approx(2.7));
}

TEST_CASE("estimate_creep_life inverts the parameter maps") {
    TtpModel mh;
    mh.kind = TtpKind::kMansonHaferd;
    mh.log10_t_in = 10.0;
    mh.t_in = 500.0;
    mh.stress_poly = {-0.0175, 0.0, 0.0, 0.0};
    CHECK(estimate_creep_life(mh, 100.0, 900.0) == doctest::Approx(3.0));
    CHECK_THROWS_AS(estimate_creep_life(mh, 100.0, 500.0), std::domain_error);

    TtpModel lm;
    lm.kind = TtpKind::kLarsonMiller;
    lm.c_lm = 20.0;
    lm.stress_poly = {23000.0, 0.0, 0.0, 0.0};
    CHECK(estimate_creep_life(lm, 100.0, 1000.0) == doctest::Approx(3.0));
}

TEST_CASE("ttp round-trip identity per kind") {
    Rng rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        TtpModel m;
        int kind = static_cast<int>(rng.index(3));
        double log_tf = rng.uniform(-1.0, 6.0);
        double temperature = rng.uniform(600.0, 1100.0);
        if (kind == 0) {
            m.kind = TtpKind::kLarsonMiller;
            m.c_lm = rng.uniform(15.0, 25.0);
        } else if (kind == 1) {
            m.kind = TtpKind::kMansonHaferd;
            m.log10_t_in = rng.uniform(8.0, 22.0);
            m.t_in = rng.uniform(100.0, 500.0);
        } else {
            m.kind = TtpKind::kOrrSherbyDorn;
            m.q_over_r = rng.uniform(0.0, 20000.0);
        }
        double p = ttp_parameter(m, log_tf, temperature);
        // Invert through a stress polynomial that returns exactly p.
        m.stress_poly = {p, 0.0, 0.0, 0.0};
        double back = estimate_creep_life(m, 150.0, temperature);
        REQUIRE(back == doctest::Approx(log_tf).epsilon(1e-12));
    }
}

TEST_CASE("stress polynomial exact recovery") {
    Rng rng(7);
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 30; ++i) {
        double stress = rng.uniform(40.0, 300.0);
        double x = std::log10(stress);
        pairs.emplace_back(1.0 + 2.0 * x, stress);
    }
    auto c = fit_stress_polynomial(pairs);
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(c[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(c[2]) < 1e-10);
    CHECK(std::abs(c[3]) < 1e-10);
}

TEST_CASE("four distinct stresses interpolate exactly") {
    std::vector<std::pair<double, double>> pairs{
        {1.2, 50.0}, {-0.7, 90.0}, {2.4, 160.0}, {0.1, 240.0}};
    auto c = fit_stress_polynomial(pairs);
    TtpModel m;
    m.stress_poly = c;
    for (const auto& [p, s] : pairs)
        CHECK(m.stress_function(s) == doctest::Approx(p).epsilon(1e-9));
}

TEST_CASE("stress polynomial degenerate designs") {
    std::vector<std::pair<double, double>> same{{1.0, 100.0}, {2.0, 100.0},
                                                {3.0, 100.0}, {4.0, 100.0}};
    CHECK_THROWS_WITH_AS(fit_stress_polynomial(same), doctest::Contains("rank"),
                         std::runtime_error);
    std::vector<std::pair<double, double>> few{{1.0, 100.0}, {2.0, 120.0}, {3.0, 140.0}};
    CHECK_THROWS_AS(fit_stress_polynomial(few), std::runtime_error);
    std::vector<std::pair<double, double>> neg{
        {1.0, -5.0}, {2.0, 120.0}, {3.0, 140.0}, {4.0, 150.0}};
    CHECK_THROWS_AS(fit_stress_polynomial(neg), std::runtime_error);
}

TEST_CASE("stacking fault energy") {
    Composition zero;
    CHECK(stacking_fault_energy(zero) == 39.0);  // pure austenitic iron

    Composition ni;
    ni.ni = 10.0;
    CHECK(stacking_fault_energy(ni) == doctest::Approx(54.9));

    Composition cn;
    cn.c = 0.04;
    cn.n = 0.05;
    CHECK(stacking_fault_energy(cn) == doctest::Approx(20.334).epsilon(0.001 / 20.334));
}

TEST_CASE("sfe monotone in nickel with other elements zero") {
    double prev = stacking_fault_energy(Composition{});
    for (double ni = 0.5; ni <= 20.0; ni += 0.5) {
        Composition c;
        c.ni = ni;
        double cur = stacking_fault_energy(c);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("pi loss terms") {
    auto [b1_in, b2_in] = pi_loss_terms({1.0, 2.0, 5.9}, 6.0);
    CHECK(b1_in == 0.0);
    CHECK(b2_in == 0.0);

    auto [b1, b2] = pi_loss_terms({-2.0, 0.0}, 6.0);
    CHECK(b1 == doctest::Approx(1.0));
    CHECK(b2 == 0.0);

    auto [c1, c2] = pi_loss_terms({7.0}, 6.0);
    CHECK(c1 == 0.0);
    CHECK(c2 == doctest::Approx(1.0));

    CHECK_THROWS_AS(pi_loss_terms({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("composite pi loss") {
    CHECK(composite_pi_loss(2.5, 8.0, 9.0, 0.0, 0.0) == doctest::Approx(2.5));
    CHECK(composite_pi_loss(1.0, 2.0, 3.0, 0.1, 0.2) == doctest::Approx(1.8));
    CHECK_THROWS_AS(composite_pi_loss(1.0, 1.0, 1.0, -0.1, 0.0), std::invalid_argument);
}

TEST_CASE("pi loss graph gradients match finite differences away from kinks") {
    Graph g;
    auto pred = g.input({4, 1});
    PiLossNodes pi = pi_loss_nodes(g, pred, 6.0);
    auto loss = g.add(g.affine(pi.l_b1, 0.7, 0.0), g.affine(pi.l_b2, 1.3, 0.0));
    std::vector<double> v{-2.0, 1.0, 6.5, 8.0};  // all > 1e-4 from the kinks at 0 and 6
    g.set_values(pred, v);
    g.forward();
    g.backward(loss);
    std::vector<double> analytic = g.grad(pred).values;
    auto f = [&](const std::vector<double>& pv) {
        g.set_values(pred, pv);
        g.forward();
        return g.scalar_value(loss);
    };
    auto numeric = oracles::finite_difference_gradient(f, v, 1e-6);
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(analytic[i] == doctest::Approx(numeric[i]).epsilon(1e-5));
}

namespace {

Dataset make_ss316_like() {
    Dataset ds;
    ds.feature_names = {"temperature", "stress", "Ni", "Mn", "Cr", "Mo", "Si", "C", "N"};
    ds.features = Tensor({2, 9},
                         {900.0, 100.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                          950.0, 150.0, 12.0, 1.5, 17.0, 2.5, 0.5, 0.05, 0.04});
    ds.target = {3.0, 2.0};
    ds.target_transformed = true;
    return ds;
}

ColumnRoles ss316_roles() {
    ColumnRoles roles;
    roles.composition = {{"Ni", "Ni"}, {"Mn", "Mn"}, {"Cr", "Cr"}, {"Mo", "Mo"},
                         {"Si", "Si"}, {"C", "C"},   {"N", "N"}};
    return roles;
}

}  // namespace

TEST_CASE("augment_features appends the expected columns") {
    Dataset ds = make_ss316_like();
    TtpModel lm;
    lm.kind = TtpKind::kLarsonMiller;
    lm.c_lm = 20.0;
    lm.stress_poly = {23000.0, 0.0, 0.0, 0.0};

    Dataset one = augment_features(ds, lm, false, ss316_roles());
    CHECK(one.feature_count() == ds.feature_count() + 1);
    CHECK(one.feature_names.back() == "ttp_life_est");

    Dataset two = augment_features(ds, lm, true, ss316_roles());
    CHECK(two.feature_count() == ds.feature_count() + 2);
    // All-zero composition row: SFE column is the pure-iron constant.
    CHECK(two.features.at(0, ds.feature_count() + 1) == doctest::Approx(39.0));
}

TEST_CASE("augment_features on the noise-free generator reproduces the target") {
    SyntheticSpec spec;
    spec.n = 60;
    spec.noise_sd = 0.0;
    spec.seed = 3;
    Dataset ds = apply_log10_target(generate_synthetic_creep(spec));
    TtpModel lm;
    lm.kind = TtpKind::kLarsonMiller;
    lm.c_lm = spec.c_lm;
    lm.stress_poly = spec.stress_poly;
    ColumnRoles roles;  // default temperature/stress names match the generator
    Dataset aug = augment_features(ds, lm, false, roles);
    std::size_t col = aug.feature_count() - 1;
    for (std::size_t i = 0; i < aug.size(); ++i)
        CHECK(aug.features.at(i, col) == doctest::Approx(aug.target[i]).epsilon(1e-12));
}

TEST_CASE("augment_features error paths") {
    Dataset ds = make_ss316_like();
    TtpModel lm;
    lm.kind = TtpKind::kLarsonMiller;
    lm.stress_poly = {23000.0, 0.0, 0.0, 0.0};

    ColumnRoles missing = ss316_roles();
    missing.temperature = "T_missing";
    CHECK_THROWS_WITH_AS(augment_features(ds, lm, false, missing),
                         doctest::Contains("temperature"), std::runtime_error);

    ColumnRoles unit = ss316_roles();
    unit.temperature_unit = TemperatureUnit::kCelsius;
    CHECK_THROWS_WITH_AS(augment_features(ds, lm, false, unit),
                         doctest::Contains("unit"), std::runtime_error);

    ColumnRoles no_comp;
    CHECK_THROWS_AS(augment_features(ds, lm, true, no_comp), std::runtime_error);
}

TEST_CASE("manson-haferd grid fit recovers on-grid constants") {
    // Build data from an MH model whose constants sit on grid nodes.
    Rng rng(17);
    TtpModel truth;
    truth.kind = TtpKind::kMansonHaferd;
    truth.log10_t_in = 10.0;
    truth.stress_poly = {-0.05, 0.012, 0.0, 0.0};
    std::vector<double> log_tf, temperature, stress;
    double min_temp = 800.0;
    truth.t_in = min_temp - 200.0;
    for (int i = 0; i < 80; ++i) {
        double t = (i == 0) ? min_temp : rng.uniform(min_temp, 1000.0);
        double s = rng.uniform(50.0, 280.0);
        temperature.push_back(t);
        stress.push_back(s);
        log_tf.push_back(estimate_creep_life(truth, s, t));
    }
    TtpModel fitted = fit_manson_haferd(log_tf, temperature, stress, TemperatureUnit::kKelvin);
    // Recovered model reproduces the training targets.
    for (std::size_t i = 0; i < log_tf.size(); ++i)
        CHECK(estimate_creep_life(fitted, stress[i], temperature[i]) ==
              doctest::Approx(log_tf[i]).epsilon(1e-6));
    CHECK(fitted.log10_t_in == doctest::Approx(10.0));
    CHECK(fitted.t_in == doctest::Approx(600.0));
}
