#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "aaupower/dataset.hpp"
#include "aaupower/nn.hpp"

namespace aau {

struct MetricsReport {
    double mae_w = 0.0;
    double mape_pct = 0.0;
    std::size_t n = 0;
    std::map<double, double> coverage; // nominal CI level -> empirical fraction
};

double mae(std::span<const double> preds, std::span<const double> truths);

/// 100 * mean(|pred - truth| / truth); every truth must be > 0.
double mape(std::span<const double> preds, std::span<const double> truths);

/// Two-sided standard-normal quantile: z such that P(|Z| <= z) = level.
double normal_quantile_two_sided(double level);

/// Empirical CI coverage per nominal level.
std::map<double, double> calibration(const std::vector<GaussianPrediction>& preds,
                                     std::span<const double> truths,
                                     std::span<const double> levels);

/// Predicts the whole dataset and assembles MAE/MAPE/coverage against
/// power_w.
MetricsReport evaluate_model(const ModelParams& params, const Dataset& dataset,
                             std::span<const double> levels);

void write_metrics_report(const MetricsReport& report, const std::string& path);

/// One row per sample for the load-vs-power scatter: the sample's mean load
/// over present carriers, true and estimated power (raw and normalized), and
/// a group key "type|pmax=<sorted p_max list>".
struct ScatterRow {
    double load = 0.0;
    double true_power_w = 0.0;
    double est_power_w = 0.0;
    double true_power_norm = 0.0;
    double est_power_norm = 0.0;
    std::string group;
};

std::vector<ScatterRow> export_scatter(const ModelParams& params, const Dataset& dataset);
std::string scatter_csv(const std::vector<ScatterRow>& rows);
void write_scatter_csv(const std::vector<ScatterRow>& rows, const std::string& path);

} // namespace aau
