#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "creepuq/dataset.hpp"
#include "creepuq/graph.hpp"

namespace creepuq {

enum class TtpKind { kLarsonMiller, kMansonHaferd, kOrrSherbyDorn };

enum class TemperatureUnit { kKelvin, kCelsius };

TtpKind ttp_kind_from_string(const std::string& s);
std::string to_string(TtpKind k);
TemperatureUnit temperature_unit_from_string(const std::string& s);
std::string to_string(TemperatureUnit u);

/// Time-temperature-parameter creep model: P(tf, T) = f(sigma) with a cubic
/// log-stress polynomial f. Constants are interpreted in `unit`; evaluating
/// against data in a different unit is rejected upstream.
struct TtpModel {
    TtpKind kind = TtpKind::kLarsonMiller;
    TemperatureUnit unit = TemperatureUnit::kKelvin;
    double c_lm = 20.0;          // Larson-Miller constant
    double log10_t_in = 0.0;     // Manson-Haferd intersection (log10 hours)
    double t_in = 0.0;           // Manson-Haferd intersection temperature
    double q_over_r = 0.0;       // Orr-Sherby-Dorn Q_C / (2.3 R)
    std::array<double, 4> stress_poly{0.0, 0.0, 0.0, 0.0};

    double stress_function(double stress) const;
};

/// P(tf, T) for the model's parameterization.
double ttp_parameter(const TtpModel& model, double log10_tf, double temperature);

/// Inverts P(tf, T) = f(sigma) for log10 tf in closed form.
double estimate_creep_life(const TtpModel& model, double stress, double temperature);

/// OLS fit of P on [1, log10 s, log10^2 s, log10^3 s]. Needs >= 4 pairs,
/// all stresses positive, and a full-rank design (>= 4 distinct stresses).
std::array<double, 4> fit_stress_polynomial(
    const std::vector<std::pair<double, double>>& parameter_stress_pairs);

/// Fits the stress polynomial for a model whose constants are known, from
/// per-sample (log10 tf, T, stress) observations.
TtpModel fit_ttp_stress_polynomial(TtpModel model,
                                   const std::vector<double>& log10_tf,
                                   const std::vector<double>& temperature,
                                   const std::vector<double>& stress);

/// Manson-Haferd with unknown intersection constants: joint grid search over
/// log10 t_in in [8, 22] (step 0.5) and T_in in [min T - 400, min T - 10]
/// (step 10), minimizing the cubic-fit residual.
TtpModel fit_manson_haferd(const std::vector<double>& log10_tf,
                           const std::vector<double>& temperature,
                           const std::vector<double>& stress,
                           TemperatureUnit unit);

/// Alloying-element weight percents for the stacking-fault-energy estimate.
struct Composition {
    double ni = 0.0, mn = 0.0, cr = 0.0, mo = 0.0, si = 0.0, c = 0.0, n = 0.0;
};

/// SFE in mJ/m^2 from composition; 39.0 for pure austenitic iron.
double stacking_fault_energy(const Composition& comp);

/// Boundary-violation penalties on predicted log10 life:
/// L_B1 = mean(ReLU(-y)), L_B2 = mean(ReLU(y - a)).
std::pair<double, double> pi_loss_terms(const std::vector<double>& predictions,
                                        double upper_bound);

double composite_pi_loss(double base_loss, double l_b1, double l_b2,
                         double lambda1, double lambda2);

/// Same penalties as differentiable graph nodes.
struct PiLossNodes {
    Graph::NodeId l_b1;
    Graph::NodeId l_b2;
};
PiLossNodes pi_loss_nodes(Graph& g, Graph::NodeId predictions, double upper_bound);

Graph::NodeId composite_pi_loss_node(Graph& g, Graph::NodeId base_loss,
                                     const PiLossNodes& pi, double lambda1,
                                     double lambda2);

/// Column-name roles used when deriving physics features from a dataset.
struct ColumnRoles {
    std::string temperature = "temperature";
    std::string stress = "stress";
    // Element symbol (Ni, Mn, Cr, Mo, Si, C, N) -> dataset column name.
    std::map<std::string, std::string> composition;
    TemperatureUnit temperature_unit = TemperatureUnit::kKelvin;
};

/// Appends the TTP log10-life estimate (column "ttp_life_est") and, when
/// requested, the SFE column ("sfe"). Run before normalization.
Dataset augment_features(const Dataset& ds, const TtpModel& ttp, bool include_sfe,
                         const ColumnRoles& roles);

}  // namespace creepuq
