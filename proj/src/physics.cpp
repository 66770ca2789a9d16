#include "creepuq/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

namespace creepuq {

TtpKind ttp_kind_from_string(const std::string& s) {
    if (s == "larson_miller") return TtpKind::kLarsonMiller;
    if (s == "manson_haferd") return TtpKind::kMansonHaferd;
    if (s == "orr_sherby_dorn") return TtpKind::kOrrSherbyDorn;
    throw std::invalid_argument("unknown TTP kind: " + s);
}

std::string to_string(TtpKind k) {
    switch (k) {
        case TtpKind::kLarsonMiller: return "larson_miller";
        case TtpKind::kMansonHaferd: return "manson_haferd";
        case TtpKind::kOrrSherbyDorn: return "orr_sherby_dorn";
    }
    return "?";
}

TemperatureUnit temperature_unit_from_string(const std::string& s) {
    if (s == "kelvin" || s == "K") return TemperatureUnit::kKelvin;
    if (s == "celsius" || s == "C") return TemperatureUnit::kCelsius;
    throw std::invalid_argument("unknown temperature unit: " + s);
}

std::string to_string(TemperatureUnit u) {
    return u == TemperatureUnit::kKelvin ? "kelvin" : "celsius";
}

double TtpModel::stress_function(double stress) const {
    if (stress <= 0.0) throw std::domain_error("TtpModel: stress must be positive");
    double x = std::log10(stress);
    return stress_poly[0] + x * (stress_poly[1] + x * (stress_poly[2] + x * stress_poly[3]));
}

double ttp_parameter(const TtpModel& model, double log10_tf, double temperature) {
    switch (model.kind) {
        case TtpKind::kLarsonMiller:
            if (temperature <= 0.0)
                throw std::domain_error("ttp_parameter: Larson-Miller requires T > 0");
            return temperature * (model.c_lm + log10_tf);
        case TtpKind::kMansonHaferd:
            if (temperature == model.t_in)
                throw std::domain_error("ttp_parameter: Manson-Haferd singular at T = T_in");
            return (log10_tf - model.log10_t_in) / (temperature - model.t_in);
        case TtpKind::kOrrSherbyDorn:
            if (temperature <= 0.0)
                throw std::domain_error("ttp_parameter: Orr-Sherby-Dorn requires T > 0");
            return log10_tf - model.q_over_r / temperature;
    }
    throw std::logic_error("unreachable");
}

double estimate_creep_life(const TtpModel& model, double stress, double temperature) {
    double fs = model.stress_function(stress);
    switch (model.kind) {
        case TtpKind::kLarsonMiller:
            if (temperature <= 0.0)
                throw std::domain_error("estimate_creep_life: Larson-Miller requires T > 0");
            return fs / temperature - model.c_lm;
        case TtpKind::kMansonHaferd:
            if (temperature == model.t_in)
                throw std::domain_error("estimate_creep_life: Manson-Haferd singular at T = T_in");
            return model.log10_t_in + fs * (temperature - model.t_in);
        case TtpKind::kOrrSherbyDorn:
            if (temperature <= 0.0)
                throw std::domain_error("estimate_creep_life: Orr-Sherby-Dorn requires T > 0");
            return fs + model.q_over_r / temperature;
    }
    throw std::logic_error("unreachable");
}

std::array<double, 4> fit_stress_polynomial(
    const std::vector<std::pair<double, double>>& parameter_stress_pairs) {
    std::size_t n = parameter_stress_pairs.size();
    if (n < 4) throw std::runtime_error("fit_stress_polynomial: need at least 4 pairs");
    std::set<double> distinct;
    for (const auto& [p, s] : parameter_stress_pairs) {
        if (s <= 0.0) throw std::runtime_error("fit_stress_polynomial: stress must be positive");
        distinct.insert(s);
    }
    if (distinct.size() < 4)
        throw std::runtime_error("fit_stress_polynomial: rank-deficient design (fewer than 4 distinct stresses)");

    Eigen::MatrixXd design(n, 4);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::log10(parameter_stress_pairs[i].second);
        design(static_cast<Eigen::Index>(i), 0) = 1.0;
        design(static_cast<Eigen::Index>(i), 1) = x;
        design(static_cast<Eigen::Index>(i), 2) = x * x;
        design(static_cast<Eigen::Index>(i), 3) = x * x * x;
        rhs(static_cast<Eigen::Index>(i)) = parameter_stress_pairs[i].first;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 4)
        throw std::runtime_error("fit_stress_polynomial: rank-deficient design matrix");
    Eigen::Vector4d c = qr.solve(rhs);
    return {c(0), c(1), c(2), c(3)};
}

namespace {

std::vector<std::pair<double, double>> parameter_pairs(const TtpModel& model,
                                                       const std::vector<double>& log10_tf,
                                                       const std::vector<double>& temperature,
                                                       const std::vector<double>& stress) {
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(log10_tf.size());
    for (std::size_t i = 0; i < log10_tf.size(); ++i)
        pairs.emplace_back(ttp_parameter(model, log10_tf[i], temperature[i]), stress[i]);
    return pairs;
}

double fit_sse(const TtpModel& model, const std::vector<std::pair<double, double>>& pairs) {
    double sse = 0.0;
    for (const auto& [p, s] : pairs) {
        double r = p - model.stress_function(s);
        sse += r * r;
    }
    return sse;
}

}  // namespace

TtpModel fit_ttp_stress_polynomial(TtpModel model,
                                   const std::vector<double>& log10_tf,
                                   const std::vector<double>& temperature,
                                   const std::vector<double>& stress) {
    if (log10_tf.size() != temperature.size() || log10_tf.size() != stress.size())
        throw std::runtime_error("fit_ttp_stress_polynomial: input length mismatch");
    auto pairs = parameter_pairs(model, log10_tf, temperature, stress);
    model.stress_poly = fit_stress_polynomial(pairs);
    return model;
}

TtpModel fit_manson_haferd(const std::vector<double>& log10_tf,
                           const std::vector<double>& temperature,
                           const std::vector<double>& stress,
                           TemperatureUnit unit) {
    if (log10_tf.empty() || log10_tf.size() != temperature.size() ||
        log10_tf.size() != stress.size())
        throw std::runtime_error("fit_manson_haferd: input length mismatch");
    double min_temp = *std::min_element(temperature.begin(), temperature.end());

    TtpModel best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (double lt = 8.0; lt <= 22.0 + 1e-9; lt += 0.5) {
        for (double tin = min_temp - 400.0; tin <= min_temp - 10.0 + 1e-9; tin += 10.0) {
            TtpModel cand;
            cand.kind = TtpKind::kMansonHaferd;
            cand.unit = unit;
            cand.log10_t_in = lt;
            cand.t_in = tin;
            auto pairs = parameter_pairs(cand, log10_tf, temperature, stress);
            std::array<double, 4> coef;
            try {
                coef = fit_stress_polynomial(pairs);
            } catch (const std::runtime_error&) {
                continue;  // degenerate stress design at this grid point
            }
            cand.stress_poly = coef;
            double sse = fit_sse(cand, pairs);
            if (sse < best_sse) {
                best_sse = sse;
                best = cand;
            }
        }
    }
    if (!std::isfinite(best_sse))
        throw std::runtime_error("fit_manson_haferd: no grid point produced a valid fit");
    return best;
}

double stacking_fault_energy(const Composition& comp) {
    constexpr double kBaseSfe = 39.0;  // pure austenitic iron, mJ/m^2
    double cn = comp.c + 1.2 * comp.n;
    double mix = comp.c + 1.2 * comp.cr + comp.mn + comp.mo;
    double nicrmn = comp.ni * (comp.cr + comp.mn);
    if (cn < 0.0 || mix < 0.0 || nicrmn < 0.0)
        throw std::domain_error("stacking_fault_energy: negative radicand");
    return kBaseSfe + 1.59 * comp.ni - 1.34 * comp.mn + 0.06 * comp.mn * comp.mn -
           1.75 * comp.cr + 0.01 * comp.cr * comp.cr + 15.21 * comp.mo - 5.59 * comp.si -
           60.69 * std::sqrt(cn) + 26.27 * cn * std::sqrt(mix) + 0.6 * std::sqrt(nicrmn);
}

std::pair<double, double> pi_loss_terms(const std::vector<double>& predictions,
                                        double upper_bound) {
    if (upper_bound <= 0.0) throw std::invalid_argument("pi_loss_terms: upper bound must be > 0");
    if (predictions.empty()) return {0.0, 0.0};
    double b1 = 0.0, b2 = 0.0;
    for (double y : predictions) {
        b1 += std::max(0.0, -y);
        b2 += std::max(0.0, y - upper_bound);
    }
    double n = static_cast<double>(predictions.size());
    return {b1 / n, b2 / n};
}

double composite_pi_loss(double base_loss, double l_b1, double l_b2,
                         double lambda1, double lambda2) {
    if (lambda1 < 0.0 || lambda2 < 0.0)
        throw std::invalid_argument("composite_pi_loss: weights must be non-negative");
    return base_loss + lambda1 * l_b1 + lambda2 * l_b2;
}

PiLossNodes pi_loss_nodes(Graph& g, Graph::NodeId predictions, double upper_bound) {
    if (upper_bound <= 0.0) throw std::invalid_argument("pi_loss_nodes: upper bound must be > 0");
    PiLossNodes out;
    out.l_b1 = g.mean(g.relu(g.neg(predictions)));
    out.l_b2 = g.mean(g.relu(g.affine(predictions, 1.0, -upper_bound)));
    return out;
}

Graph::NodeId composite_pi_loss_node(Graph& g, Graph::NodeId base_loss,
                                     const PiLossNodes& pi, double lambda1,
                                     double lambda2) {
    if (lambda1 < 0.0 || lambda2 < 0.0)
        throw std::invalid_argument("composite_pi_loss_node: weights must be non-negative");
    return g.add(base_loss, g.add(g.affine(pi.l_b1, lambda1, 0.0),
                                  g.affine(pi.l_b2, lambda2, 0.0)));
}

namespace {

double column_value(const Dataset& ds, int idx, std::size_t row) {
    return ds.features.at(row, static_cast<std::size_t>(idx));
}

}  // namespace

Dataset augment_features(const Dataset& ds, const TtpModel& ttp, bool include_sfe,
                         const ColumnRoles& roles) {
    if (ds.normalization_bounds)
        throw std::runtime_error("augment_features: must run before normalization");
    if (roles.temperature_unit != ttp.unit)
        throw std::runtime_error("augment_features: dataset temperature unit (" +
                                 to_string(roles.temperature_unit) + ") differs from TTP model unit (" +
                                 to_string(ttp.unit) + ")");
    int t_idx = ds.feature_index(roles.temperature);
    int s_idx = ds.feature_index(roles.stress);
    if (t_idx < 0) throw std::runtime_error("augment_features: missing temperature column '" +
                                            roles.temperature + "'");
    if (s_idx < 0) throw std::runtime_error("augment_features: missing stress column '" +
                                            roles.stress + "'");

    static const char* kElements[] = {"Ni", "Mn", "Cr", "Mo", "Si", "C", "N"};
    std::array<int, 7> comp_idx{};
    if (include_sfe) {
        for (std::size_t e = 0; e < 7; ++e) {
            auto it = roles.composition.find(kElements[e]);
            if (it == roles.composition.end())
                throw std::runtime_error(std::string("augment_features: no column mapped for element ") +
                                         kElements[e]);
            int idx = ds.feature_index(it->second);
            if (idx < 0)
                throw std::runtime_error("augment_features: missing composition column '" +
                                         it->second + "'");
            comp_idx[e] = idx;
        }
    }

    std::size_t n = ds.size();
    std::size_t d = ds.feature_count();
    std::size_t extra = include_sfe ? 2 : 1;
    Dataset out = ds;
    out.feature_names.push_back("ttp_life_est");
    if (include_sfe) out.feature_names.push_back("sfe");
    out.features = Tensor({n, d + extra});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) out.features.at(r, c) = ds.features.at(r, c);
        double temperature = column_value(ds, t_idx, r);
        double stress = column_value(ds, s_idx, r);
        out.features.at(r, d) = estimate_creep_life(ttp, stress, temperature);
        if (include_sfe) {
            Composition comp;
            comp.ni = column_value(ds, comp_idx[0], r);
            comp.mn = column_value(ds, comp_idx[1], r);
            comp.cr = column_value(ds, comp_idx[2], r);
            comp.mo = column_value(ds, comp_idx[3], r);
            comp.si = column_value(ds, comp_idx[4], r);
            comp.c = column_value(ds, comp_idx[5], r);
            comp.n = column_value(ds, comp_idx[6], r);
            out.features.at(r, d + 1) = stacking_fault_energy(comp);
        }
    }
    auto appended = nlohmann::json::array();
    appended.push_back("ttp_life_est");
    if (include_sfe) appended.push_back("sfe");
    out.metadata["physics_features"] = appended;
    out.metadata["ttp_model"] = {
        {"kind", to_string(ttp.kind)},
        {"unit", to_string(ttp.unit)},
        {"c_lm", ttp.c_lm},
        {"log10_t_in", ttp.log10_t_in},
        {"t_in", ttp.t_in},
        {"q_over_r", ttp.q_over_r},
        {"stress_poly", {ttp.stress_poly[0], ttp.stress_poly[1], ttp.stress_poly[2], ttp.stress_poly[3]}},
    };
    return out;
}

}  // namespace creepuq
