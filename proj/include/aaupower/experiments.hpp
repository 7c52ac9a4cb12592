#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aaupower/eval.hpp"
#include "aaupower/nn.hpp"
#include "aaupower/teacher.hpp"

namespace aau {

enum class NoisePolicy {
    Default,          // per-type sigma0/sigma1 as sampled
    Zero,             // sigma0 = sigma1 = 0
    ConstantFraction, // sigma0 = value * fleet mean power, sigma1 = 0
};

enum class DimsPolicy {
    Paper,  // hidden layers 40 / 15
    Scaled, // hidden layers round(12c) / round(4c)
};

struct FleetConfig {
    int n_types = 5;
    int aaus_per_type = 50;
    int c_max = 6;
    int days = 12;
};

struct ExperimentConfig {
    FleetConfig fleet;
    int test_days = 2;
    double val_fraction = 0.2;
    TrainConfig train;
    int train_repeats = 1; // models per condition; metrics averaged over repeats
    DimsPolicy dims = DimsPolicy::Paper;
    double dims_c = 1.0;
    NoisePolicy noise = NoisePolicy::Default;
    double noise_value = 0.02;
    std::uint64_t seed = 42;

    // scaling experiment
    std::vector<int> type_counts = {5, 10, 15, 20};
    double c_grid_step = 0.25;
    double c_grid_max = 4.0;
    double scaling_tolerance_pct = 1.0;        // absolute MAPE points over the baseline
    std::string scaling_policy = "both";       // fixed_c1 | scaled | both

    // data-availability experiment
    std::vector<int> aaus_counts = {5, 15, 30, 50, 70, 85};
};

/// Strict JSON <-> config mapping; unknown keys raise ConfigError.
ExperimentConfig parse_config_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

/// Tuned desk-scale defaults per experiment (fleet sizes and train budgets
/// sized so the suite finishes in minutes).
ExperimentConfig default_experiment_config(const std::string& name);

struct ConditionResult {
    std::string label;
    double axis = 0.0; // N, AAUs-per-type, ... depending on the experiment
    double aux = 0.0;  // experiment-specific (selected scaling factor c)
    MetricsReport metrics;
};

struct ExperimentReport {
    std::string name;
    std::string config_echo; // resolved config, JSON
    std::vector<ConditionResult> conditions;
    std::vector<std::pair<std::string, std::string>> artifacts; // filename -> contents
    double wall_seconds = 0.0; // console only, never written to report files
};

/// General model on the full fleet; also emits the load-vs-power scatter for
/// the most populous type when written.
ExperimentReport exp_overall(const ExperimentConfig& config);

/// Dedicated single-carrier model vs the general model, both evaluated on
/// the identical single-carrier test cohort.
ExperimentReport exp_multicarrier(const ExperimentConfig& config);

/// Single-AAU-type model trained without carrier-shutdown rows vs the
/// general model, evaluated on shutdown-active test hours of that type.
/// Includes the ablation where the shutdown rows are restored.
ExperimentReport exp_generalization(const ExperimentConfig& config);

/// Fixed 12/4 network over growing type counts, then the smallest scaling
/// factor c per count that keeps MAPE within the configured tolerance of the
/// first count's baseline.
ExperimentReport exp_scaling(const ExperimentConfig& config);

/// Training sets restricted to the first k AAUs per type (nested across k),
/// all evaluated on the full test days.
ExperimentReport exp_data_availability(const ExperimentConfig& config);

ExperimentReport run_experiment(const std::string& name, const ExperimentConfig& config);

/// report.txt plus results.csv (axis,label,mae_w,mape_pct) in `dir`.
/// Repeat runs with the same config produce byte-identical files.
void write_experiment_report(const ExperimentReport& report, const std::string& dir);

// Shared pipeline pieces (also used by the CLI and tests).
Fleet build_fleet(const ExperimentConfig& config);
SplitSpec day_split_spec(int days, int test_days, double val_fraction);
LayerDims dims_for(const ExperimentConfig& config, int input_width);

} // namespace aau
