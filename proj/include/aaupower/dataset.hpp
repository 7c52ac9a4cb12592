#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aau {

/// One carrier block of a measurement row. Absent blocks (present=false)
/// are all-zero by construction.
struct CarrierSample {
    bool present = false;
    std::string tx_mode;
    double freq_mhz = 0.0;
    double bw_mhz = 0.0;
    double p_max_w = 0.0;
    double load = 0.0;
    double d_cs = 0.0;
    double d_chs = 0.0;
    double d_ss = 0.0;
    double d_dd = 0.0; // deep dormancy, replicated across present blocks
};

/// One hourly measurement of one AAU.
struct SampleRecord {
    std::string aau_id;
    std::string type_id;
    int day = 0;
    int hour = 0;
    int num_trx = 0;
    std::vector<CarrierSample> carriers; // size == dataset c_max
    double power_w = 0.0;                // measured (noisy) power
    std::optional<double> true_power_w;  // teacher ground truth, never a feature

    int carrier_count() const;
    bool has_carrier_shutdown() const; // any present block with d_cs > 0
};

struct Dataset {
    int c_max = 0;
    std::vector<SampleRecord> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

bool operator==(const CarrierSample& a, const CarrierSample& b);
bool operator==(const SampleRecord& a, const SampleRecord& b);

// CSV persistence. Schema (exact header):
//   aau_id,type_id,day,hour,num_trx,
//   then for k in 0..c_max-1:
//     ck_present,ck_tx_mode,ck_freq_mhz,ck_bw_mhz,ck_pmax_w,ck_load,ck_dcs,ck_dchs,ck_dss,ck_ddd,
//   then power_w,true_power_w
// Floats are written with 17 significant digits so the round-trip is exact.
void write_csv(const Dataset& dataset, const std::string& path);
Dataset read_csv(const std::string& path);

struct SplitSpec {
    std::vector<int> train_days;
    std::vector<int> test_days;
    double val_fraction = 0.2;
};

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Day-based test split plus a seeded row-wise train/val partition of the
/// remaining rows. Every day present in the dataset must be listed in
/// exactly one of train_days/test_days.
SplitResult split(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed);

/// Row filter over the cohort axes the experiments need. Unset fields match
/// everything; set fields must all match (AND).
struct FilterSpec {
    std::optional<std::vector<std::string>> type_ids;
    std::optional<int> carrier_count;
    std::optional<bool> has_carrier_shutdown;
};

Dataset filter(const Dataset& dataset, const FilterSpec& spec);
Dataset filter_rows(const Dataset& dataset, const std::function<bool(const SampleRecord&)>& keep);

struct FeatureStat {
    double min = 0.0;
    double max = 0.0;
    bool constant = false; // min == max in the training data; encoded as 0
};

/// Min-max statistics computed from training rows only. Target scaling is
/// [0, headroom * max(power_w)] so the sigmoid output head has room above
/// the observed maximum.
struct NormStats {
    FeatureStat num_trx;
    FeatureStat freq_mhz;
    FeatureStat bw_mhz;
    FeatureStat p_max_w;
    FeatureStat load;
    FeatureStat d_cs;
    FeatureStat d_chs;
    FeatureStat d_ss;
    FeatureStat d_dd;
    double power_min_w = 0.0;
    double power_max_w = 1.0;
    double headroom = 1.2;
};

NormStats compute_norm_stats(const Dataset& train);

} // namespace aau
