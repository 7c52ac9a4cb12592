#include "aaupower/features.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "aaupower/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aau {

int EncoderSpec::type_index(const std::string& type_id) const {
    const auto it = std::lower_bound(type_registry.begin(), type_registry.end(), type_id);
    if (it == type_registry.end() || *it != type_id)
        throw EncodingError("unknown type_id '" + type_id + "'");
    return static_cast<int>(it - type_registry.begin());
}

double EncoderSpec::tx_mode_code(const std::string& mode) const {
    const auto it = std::lower_bound(tx_mode_registry.begin(), tx_mode_registry.end(), mode);
    if (it == tx_mode_registry.end() || *it != mode)
        throw EncodingError("unknown tx_mode '" + mode + "'");
    // Ordinal code in (0,1]: a present block can never be all-zero padding.
    const auto idx = static_cast<double>(it - tx_mode_registry.begin());
    return (idx + 1.0) / static_cast<double>(tx_mode_registry.size());
}

namespace {

bool stat_eq(const FeatureStat& a, const FeatureStat& b) {
    return a.min == b.min && a.max == b.max && a.constant == b.constant;
}

bool norm_eq(const NormStats& a, const NormStats& b) {
    return stat_eq(a.num_trx, b.num_trx) && stat_eq(a.freq_mhz, b.freq_mhz) &&
           stat_eq(a.bw_mhz, b.bw_mhz) && stat_eq(a.p_max_w, b.p_max_w) &&
           stat_eq(a.load, b.load) && stat_eq(a.d_cs, b.d_cs) && stat_eq(a.d_chs, b.d_chs) &&
           stat_eq(a.d_ss, b.d_ss) && stat_eq(a.d_dd, b.d_dd) &&
           a.power_min_w == b.power_min_w && a.power_max_w == b.power_max_w &&
           a.headroom == b.headroom;
}

double scale(double value, const FeatureStat& stat) {
    if (stat.constant) return 0.0;
    const double v = (value - stat.min) / (stat.max - stat.min);
    return std::clamp(v, 0.0, 1.0);
}

} // namespace

bool operator==(const EncoderSpec& a, const EncoderSpec& b) {
    return a.type_registry == b.type_registry && a.tx_mode_registry == b.tx_mode_registry &&
           a.c_max == b.c_max && norm_eq(a.norm, b.norm);
}

EncoderSpec fit_encoder(const Dataset& train, int c_max) {
    if (train.rows.empty()) throw ArgumentError("fit_encoder: empty training data");
    if (c_max < 1) throw ArgumentError("fit_encoder: c_max must be >= 1");

    std::set<std::string> types;
    std::set<std::string> modes;
    for (const auto& r : train.rows) {
        types.insert(r.type_id);
        for (const auto& c : r.carriers)
            if (c.present) modes.insert(c.tx_mode);
    }

    EncoderSpec spec;
    spec.type_registry.assign(types.begin(), types.end());
    spec.tx_mode_registry.assign(modes.begin(), modes.end());
    spec.c_max = c_max;
    spec.norm = compute_norm_stats(train);
    return spec;
}

std::vector<double> encode(const SampleRecord& record, const EncoderSpec& spec) {
    const int n_types = static_cast<int>(spec.type_registry.size());
    std::vector<double> x(static_cast<std::size_t>(spec.input_width()), 0.0);

    x[static_cast<std::size_t>(spec.type_index(record.type_id))] = 1.0;

    std::vector<const CarrierSample*> present;
    for (const auto& c : record.carriers)
        if (c.present) present.push_back(&c);
    if (static_cast<int>(present.size()) > spec.c_max)
        throw EncodingError("record has " + std::to_string(present.size()) +
                            " carriers, encoder supports " + std::to_string(spec.c_max));

    std::sort(present.begin(), present.end(), [](const CarrierSample* a, const CarrierSample* b) {
        return std::tie(a->freq_mhz, b->p_max_w, b->bw_mhz, a->tx_mode, a->load, a->d_cs, a->d_chs,
                        a->d_ss) < std::tie(b->freq_mhz, a->p_max_w, a->bw_mhz, b->tx_mode, b->load,
                                            b->d_cs, b->d_chs, b->d_ss);
    });

    const NormStats& norm = spec.norm;
    for (std::size_t slot = 0; slot < present.size(); ++slot) {
        const CarrierSample& c = *present[slot];
        double* block = x.data() + n_types + slot * EncoderSpec::kCarrierBlock;
        block[0] = spec.tx_mode_code(c.tx_mode);
        block[1] = scale(static_cast<double>(record.num_trx), norm.num_trx);
        block[2] = scale(c.freq_mhz, norm.freq_mhz);
        block[3] = scale(c.bw_mhz, norm.bw_mhz);
        block[4] = scale(c.p_max_w, norm.p_max_w);
        block[5] = scale(c.load, norm.load);
        block[6] = scale(c.d_cs, norm.d_cs);
        block[7] = scale(c.d_chs, norm.d_chs);
        block[8] = scale(c.d_ss, norm.d_ss);
        block[9] = scale(c.d_dd, norm.d_dd);
    }
    return x;
}

double encode_target(double power_w, const NormStats& norm) {
    return (power_w - norm.power_min_w) / (norm.power_max_w - norm.power_min_w);
}

namespace {

Matrix encode_impl(const std::vector<SampleRecord>& records, const EncoderSpec& spec,
                   bool parallel) {
    Matrix m(records.size(), static_cast<std::size_t>(spec.input_width()));
    std::vector<std::string> errors(records.size());
    bool failed = false;

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(records.size()); ++i) {
            try {
                const auto x = encode(records[static_cast<std::size_t>(i)], spec);
                std::copy(x.begin(), x.end(), m.row(static_cast<std::size_t>(i)));
            } catch (const EncodingError& e) {
                errors[static_cast<std::size_t>(i)] = e.what();
#pragma omp atomic write
                failed = true;
            }
        }
    } else {
        for (std::size_t i = 0; i < records.size(); ++i) {
            try {
                const auto x = encode(records[i], spec);
                std::copy(x.begin(), x.end(), m.row(i));
            } catch (const EncodingError& e) {
                errors[i] = e.what();
                failed = true;
            }
        }
    }

    if (failed) {
        std::string msg = "encode_batch failed:";
        int shown = 0;
        for (std::size_t i = 0; i < errors.size() && shown < 5; ++i) {
            if (errors[i].empty()) continue;
            msg += " [row " + std::to_string(i) + "] " + errors[i] + ";";
            ++shown;
        }
        throw EncodingError(msg);
    }
    return m;
}

} // namespace

Matrix encode_batch(const std::vector<SampleRecord>& records, const EncoderSpec& spec) {
    return encode_impl(records, spec, true);
}

Matrix encode_batch_serial(const std::vector<SampleRecord>& records, const EncoderSpec& spec) {
    return encode_impl(records, spec, false);
}

} // namespace aau
