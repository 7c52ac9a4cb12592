#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aaupower/dataset.hpp"

namespace aau {

/// Dense row-major matrix of encoded rows.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Fitted input encoding: one-hot AAU type followed by c_max blocks of 10
/// per-carrier values, zero-padded. Input width n_i = N_AAU + 10 * c_max.
///
/// Per-carrier block order:
///   tx_mode_code, num_trx, freq_mhz, bw_mhz, p_max_w, load, d_cs, d_chs, d_ss, d_dd
/// tx_mode is squeezed into one neuron as an ordinal code in (0,1], so a
/// present block is never the all-zero padding vector.
struct EncoderSpec {
    std::vector<std::string> type_registry;    // lexicographic, fixed at fit
    std::vector<std::string> tx_mode_registry; // lexicographic, fixed at fit
    int c_max = 0;
    NormStats norm;

    static constexpr int kCarrierBlock = 10;

    int input_width() const {
        return static_cast<int>(type_registry.size()) + kCarrierBlock * c_max;
    }
    int type_index(const std::string& type_id) const;   // throws EncodingError
    double tx_mode_code(const std::string& mode) const; // throws EncodingError
};

bool operator==(const EncoderSpec& a, const EncoderSpec& b);

/// Fits registries (types and tx modes seen in training data) and min-max
/// stats from the training rows only.
EncoderSpec fit_encoder(const Dataset& train, int c_max);

/// Encodes one record. Present carriers are canonically reordered
/// (freq asc, p_max desc, bw desc, then remaining fields) before filling
/// blocks, so slot assignment never depends on input order.
std::vector<double> encode(const SampleRecord& record, const EncoderSpec& spec);

/// Normalized target: power mapped to [0,1] by the train-fitted scaling.
double encode_target(double power_w, const NormStats& norm);

Matrix encode_batch(const std::vector<SampleRecord>& records, const EncoderSpec& spec);
Matrix encode_batch_serial(const std::vector<SampleRecord>& records, const EncoderSpec& spec);

} // namespace aau
