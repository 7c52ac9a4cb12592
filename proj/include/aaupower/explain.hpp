#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "aaupower/features.hpp"
#include "aaupower/nn.hpp"

namespace aau {

/// Named set of encoded-input positions attributed as one unit.
struct FeatureGroup {
    std::string name;
    std::vector<int> indices;
};

struct Attribution {
    std::vector<std::string> group_names;
    std::vector<double> phi; // same units as the explained output
    double base_value = 0.0; // expected output with all groups at background
    double prediction = 0.0; // f(instance)
};

/// Scalar model being explained. For trained networks this is mu_w.
using PredictFn = std::function<double(std::span<const double>)>;

PredictFn mu_w_predictor(const ModelParams& params);

/// Shapley attribution of f(instance) relative to a background sample set.
/// Exact subset enumeration is used automatically when groups.size() <= 10;
/// otherwise the Monte Carlo permutation estimator with n_permutations
/// sampled permutations (each paired with a sampled background row).
/// Features not covered by any group stay at the instance's values.
Attribution shapley(const PredictFn& f, std::span<const double> instance,
                    const Matrix& background, const std::vector<FeatureGroup>& groups,
                    int n_permutations, std::uint64_t seed);

Attribution shapley_exact(const PredictFn& f, std::span<const double> instance,
                          const Matrix& background, const std::vector<FeatureGroup>& groups);

Attribution shapley_monte_carlo(const PredictFn& f, std::span<const double> instance,
                                const Matrix& background,
                                const std::vector<FeatureGroup>& groups, int n_permutations,
                                std::uint64_t seed);
Attribution shapley_monte_carlo_serial(const PredictFn& f, std::span<const double> instance,
                                       const Matrix& background,
                                       const std::vector<FeatureGroup>& groups,
                                       int n_permutations, std::uint64_t seed);

/// Mean |phi| per group over a seeded subsample of instance rows.
std::vector<double> global_importance(const PredictFn& f, const Matrix& instances,
                                      const Matrix& background,
                                      const std::vector<FeatureGroup>& groups,
                                      int n_instances, int n_permutations, std::uint64_t seed);

/// Metric degradation when one group's columns are shuffled across rows
/// (jointly, one permutation per group). Returns the MAPE increase in
/// percentage points per group.
std::vector<double> permutation_importance(const ModelParams& params, const Dataset& dataset,
                                           const std::vector<FeatureGroup>& groups,
                                           std::uint64_t seed);

/// The Table-1 feature groups over an encoder's layout: aau_type (the
/// one-hot segment), num_trx, and one group per carrier feature spanning all
/// carrier slots.
std::vector<FeatureGroup> table_feature_groups(const EncoderSpec& spec);

struct AttributionReportRow {
    std::string group;
    double mean_phi = 0.0;
    double mean_abs_phi = 0.0;
};

void write_attribution_csv(const std::vector<AttributionReportRow>& rows, const std::string& path);

/// Per-instance export: (instance, group, phi, feature_value) where
/// feature_value is the mean encoded value of the group's positions.
struct InstanceAttributionRow {
    int instance = 0;
    std::string group;
    double phi = 0.0;
    double feature_value = 0.0;
};

void write_instance_attribution_csv(const std::vector<InstanceAttributionRow>& rows,
                                    const std::string& path);

} // namespace aau
