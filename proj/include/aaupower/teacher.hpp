#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aaupower/dataset.hpp"

namespace aau {

/// Hardware parameters of one AAU type, including the noise model
/// sigma(y) = sigma0 + sigma1 * y used when synthesizing measurements.
struct AAUTypeSpec {
    std::string type_id;
    int num_trx = 0;   // antenna ports / MCPAs
    int num_bands = 0; // transceivers
    int max_carriers = 1;
    double p_base_w = 0.0;        // always-on baseband/overhead
    double p_mcpa0_w = 0.0;       // single-carrier MCPA static power
    double gamma = 1.0;           // MCPA sub-linearity exponent, (0,1]
    double p_fix_carrier_w = 0.0; // per-carrier transceiver fixed power
    double kappa = 0.0;           // PA slope (W consumed per W*load)
    double eta_ss = 0.0;          // symbol-shutdown savable share of p_fix
    double eta_ch = 0.0;          // max RF-chain reduction under channel shutdown
    double p_dorm_w = 0.0;        // deep-dormancy floor
    double sigma0_w = 0.0;
    double sigma1 = 0.0;

    void validate() const; // throws ArgumentError on invariant violation
};

struct CarrierSpec {
    int carrier_idx = 0;
    std::string band_id;
    double freq_mhz = 0.0;
    double bw_mhz = 0.0;
    double p_max_w = 0.0;
    std::string tx_mode;
    int mcpa_group = 0;
};

struct AAUInstance {
    std::string aau_id;
    std::string type_id;
    std::vector<CarrierSpec> carriers; // canonical order (freq, then p_max desc)
};

struct Fleet {
    std::vector<AAUTypeSpec> types;
    std::vector<AAUInstance> aaus;
    int c_max = 0;
    std::uint64_t seed = 0;

    const AAUTypeSpec& type_of(const AAUInstance& aau) const;
};

/// One hour of operating state for one AAU; vectors are per carrier, in the
/// AAU's canonical carrier order.
struct HourState {
    std::vector<double> load;
    std::vector<double> d_cs;
    std::vector<double> d_chs;
    std::vector<double> d_ss;
    double d_dd = 0.0;

    void validate(std::size_t n_carriers) const;
};

/// Draws a synthetic fleet. Deterministic per seed; type and AAU parameters
/// come from per-index sub-streams, so fleets with the same seed nest: the
/// first k types (or AAUs per type) are identical across different counts.
Fleet sample_fleet(int n_types, int aaus_per_type, int c_max, std::uint64_t seed);

/// Hour-averaged ground-truth power draw:
///   y = d_dd*p_dorm + (1-d_dd) * [ p_base
///       + sum_g p_mcpa0 * n_g^gamma * (1 - off_g)
///       + sum_c (1-d_cs_c) * m_c * (p_fix*(1-eta_ss*d_ss_c) + kappa*load_c*p_max_c) ]
/// with n_g the carrier count of MCPA group g, off_g = min over the group of
/// d_cs_c (an MCPA powers down only while all its carriers are off), and
/// m_c = 1 - eta_ch*d_chs_c.
double teacher_power(const AAUTypeSpec& type, const std::vector<CarrierSpec>& carriers,
                     const HourState& state);

/// Overrides the measurement-noise parameters of every type in place.
void set_noise(Fleet& fleet, double sigma0_w, double sigma1);

/// 24 * n_days rows per AAU, ordered by (aau, day, hour). Loads follow a
/// seeded diurnal profile; energy-saving durations correlate inversely with
/// load; power_w = y + n, n ~ N(0, sigma0 + sigma1*y), resampled until
/// power_w > 0. The serial variant is the reference implementation; the
/// parallel one distributes AAUs across threads and must produce identical
/// bytes (each AAU owns an independent sub-stream).
Dataset generate_dataset(const Fleet& fleet, int n_days, std::uint64_t seed);
Dataset generate_dataset_serial(const Fleet& fleet, int n_days, std::uint64_t seed);

void write_fleet_manifest(const Fleet& fleet, const std::string& path);
Fleet read_fleet_manifest(const std::string& path);

} // namespace aau
