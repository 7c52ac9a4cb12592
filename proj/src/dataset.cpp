#include "aaupower/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "aaupower/errors.hpp"
#include "aaupower/format.hpp"
#include "aaupower/rng.hpp"

namespace aau {

int SampleRecord::carrier_count() const {
    int n = 0;
    for (const auto& c : carriers)
        if (c.present) ++n;
    return n;
}

bool SampleRecord::has_carrier_shutdown() const {
    for (const auto& c : carriers)
        if (c.present && c.d_cs > 0.0) return true;
    return false;
}

bool operator==(const CarrierSample& a, const CarrierSample& b) {
    return a.present == b.present && a.tx_mode == b.tx_mode && a.freq_mhz == b.freq_mhz &&
           a.bw_mhz == b.bw_mhz && a.p_max_w == b.p_max_w && a.load == b.load &&
           a.d_cs == b.d_cs && a.d_chs == b.d_chs && a.d_ss == b.d_ss && a.d_dd == b.d_dd;
}

bool operator==(const SampleRecord& a, const SampleRecord& b) {
    return a.aau_id == b.aau_id && a.type_id == b.type_id && a.day == b.day && a.hour == b.hour &&
           a.num_trx == b.num_trx && a.carriers == b.carriers && a.power_w == b.power_w &&
           a.true_power_w == b.true_power_w;
}

namespace {

const char* const kCarrierFields[] = {"present", "tx_mode", "freq_mhz", "bw_mhz", "pmax_w",
                                      "load",    "dcs",     "dchs",     "dss",    "ddd"};

std::vector<std::string> expected_header(int c_max) {
    std::vector<std::string> cols = {"aau_id", "type_id", "day", "hour", "num_trx"};
    for (int k = 0; k < c_max; ++k) {
        for (const char* field : kCarrierFields) {
            cols.push_back("c" + std::to_string(k) + "_" + field);
        }
    }
    cols.push_back("power_w");
    cols.push_back("true_power_w");
    return cols;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string token;
    std::stringstream ss(line);
    while (std::getline(ss, token, ',')) out.push_back(token);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& token, long row, const std::string& column) {
    double v = 0.0;
    if (!parse_double(token, v)) throw ParseError("unparsable numeric cell '" + token + "'", row, column);
    return v;
}

long parse_int_cell(const std::string& token, long row, const std::string& column) {
    long v = 0;
    if (!parse_long(token, v)) throw ParseError("unparsable integer cell '" + token + "'", row, column);
    return v;
}

} // namespace

void write_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");

    const auto header = expected_header(dataset.c_max);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';

    for (const auto& r : dataset.rows) {
        out << r.aau_id << ',' << r.type_id << ',' << r.day << ',' << r.hour << ',' << r.num_trx;
        for (const auto& c : r.carriers) {
            out << ',' << (c.present ? 1 : 0) << ',' << c.tx_mode << ',' << fmt_g17(c.freq_mhz)
                << ',' << fmt_g17(c.bw_mhz) << ',' << fmt_g17(c.p_max_w) << ',' << fmt_g17(c.load)
                << ',' << fmt_g17(c.d_cs) << ',' << fmt_g17(c.d_chs) << ',' << fmt_g17(c.d_ss)
                << ',' << fmt_g17(c.d_dd);
        }
        out << ',' << fmt_g17(r.power_w) << ',';
        if (r.true_power_w) out << fmt_g17(*r.true_power_w);
        out << '\n';
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file", 0, "header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto cols = split_line(line);
    // 5 head columns + 10 per carrier + 2 tail columns
    if (cols.size() < 7 || (cols.size() - 7) % 10 != 0)
        throw ParseError("header has " + std::to_string(cols.size()) + " columns", 0, "header");
    const int c_max = static_cast<int>((cols.size() - 7) / 10);
    const auto expected = expected_header(c_max);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (cols[i] != expected[i])
            throw ParseError("expected column '" + expected[i] + "', found '" + cols[i] + "'", 0,
                             expected[i]);
    }

    Dataset ds;
    ds.c_max = c_max;
    long row_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row_no;
        const auto cells = split_line(line);
        if (cells.size() != expected.size())
            throw ParseError("row has " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(expected.size()),
                             row_no, "row");

        SampleRecord r;
        std::size_t i = 0;
        r.aau_id = cells[i++];
        r.type_id = cells[i++];
        r.day = static_cast<int>(parse_int_cell(cells[i], row_no, expected[i])), ++i;
        r.hour = static_cast<int>(parse_int_cell(cells[i], row_no, expected[i])), ++i;
        r.num_trx = static_cast<int>(parse_int_cell(cells[i], row_no, expected[i])), ++i;
        r.carriers.resize(c_max);
        for (int k = 0; k < c_max; ++k) {
            auto& c = r.carriers[k];
            c.present = parse_int_cell(cells[i], row_no, expected[i]) != 0, ++i;
            c.tx_mode = cells[i++];
            c.freq_mhz = parse_cell(cells[i], row_no, expected[i]), ++i;
            c.bw_mhz = parse_cell(cells[i], row_no, expected[i]), ++i;
            c.p_max_w = parse_cell(cells[i], row_no, expected[i]), ++i;
            c.load = parse_cell(cells[i], row_no, expected[i]), ++i;
            c.d_cs = parse_cell(cells[i], row_no, expected[i]), ++i;
            c.d_chs = parse_cell(cells[i], row_no, expected[i]), ++i;
            c.d_ss = parse_cell(cells[i], row_no, expected[i]), ++i;
            c.d_dd = parse_cell(cells[i], row_no, expected[i]), ++i;
        }
        r.power_w = parse_cell(cells[i], row_no, expected[i]), ++i;
        if (!cells[i].empty()) r.true_power_w = parse_cell(cells[i], row_no, expected[i]);
        ds.rows.push_back(std::move(r));
    }
    return ds;
}

SplitResult split(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed) {
    if (spec.val_fraction <= 0.0 || spec.val_fraction >= 1.0)
        throw ConfigError("val_fraction must be in (0,1)");

    std::set<int> train_days(spec.train_days.begin(), spec.train_days.end());
    std::set<int> test_days(spec.test_days.begin(), spec.test_days.end());
    for (int d : test_days)
        if (train_days.count(d))
            throw ConfigError("day " + std::to_string(d) + " listed as both train and test");

    std::set<int> present;
    for (const auto& r : dataset.rows) present.insert(r.day);
    for (int d : train_days)
        if (!present.count(d)) throw ConfigError("train day " + std::to_string(d) + " not in dataset");
    for (int d : test_days)
        if (!present.count(d)) throw ConfigError("test day " + std::to_string(d) + " not in dataset");
    for (int d : present)
        if (!train_days.count(d) && !test_days.count(d))
            throw ConfigError("day " + std::to_string(d) + " not assigned to train or test");

    std::vector<std::size_t> pool;
    SplitResult result;
    result.train.c_max = result.val.c_max = result.test.c_max = dataset.c_max;
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
        if (test_days.count(dataset.rows[i].day))
            result.test.rows.push_back(dataset.rows[i]);
        else
            pool.push_back(i);
    }

    const auto n_val = static_cast<std::size_t>(
        std::llround(spec.val_fraction * static_cast<double>(pool.size())));
    if (pool.empty() || n_val == 0 || n_val == pool.size() || result.test.rows.empty())
        throw ConfigError("split produces an empty partition");

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(sub_seed(seed, {0x53504c49ULL})); // split stream tag
    rng.shuffle(order);

    std::vector<bool> is_val(pool.size(), false);
    for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        (is_val[i] ? result.val : result.train).rows.push_back(dataset.rows[pool[i]]);
    }
    return result;
}

Dataset filter_rows(const Dataset& dataset, const std::function<bool(const SampleRecord&)>& keep) {
    Dataset out;
    out.c_max = dataset.c_max;
    for (const auto& r : dataset.rows)
        if (keep(r)) out.rows.push_back(r);
    return out;
}

Dataset filter(const Dataset& dataset, const FilterSpec& spec) {
    return filter_rows(dataset, [&](const SampleRecord& r) {
        if (spec.type_ids &&
            std::find(spec.type_ids->begin(), spec.type_ids->end(), r.type_id) == spec.type_ids->end())
            return false;
        if (spec.carrier_count && r.carrier_count() != *spec.carrier_count) return false;
        if (spec.has_carrier_shutdown && r.has_carrier_shutdown() != *spec.has_carrier_shutdown)
            return false;
        return true;
    });
}

namespace {

struct StatAcc {
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void observe(double v) {
        min = std::min(min, v);
        max = std::max(max, v);
    }

    FeatureStat finish() const {
        FeatureStat s;
        if (min > max) return {0.0, 0.0, true}; // no observations
        s.min = min;
        s.max = max;
        s.constant = (min == max);
        return s;
    }
};

} // namespace

NormStats compute_norm_stats(const Dataset& train) {
    if (train.rows.empty()) throw ArgumentError("compute_norm_stats: empty training data");

    StatAcc num_trx, freq, bw, pmax, load, dcs, dchs, dss, ddd;
    double power_max = 0.0;
    for (const auto& r : train.rows) {
        num_trx.observe(static_cast<double>(r.num_trx));
        for (const auto& c : r.carriers) {
            if (!c.present) continue;
            freq.observe(c.freq_mhz);
            bw.observe(c.bw_mhz);
            pmax.observe(c.p_max_w);
            load.observe(c.load);
            dcs.observe(c.d_cs);
            dchs.observe(c.d_chs);
            dss.observe(c.d_ss);
            ddd.observe(c.d_dd);
        }
        power_max = std::max(power_max, r.power_w);
    }

    NormStats stats;
    stats.num_trx = num_trx.finish();
    stats.freq_mhz = freq.finish();
    stats.bw_mhz = bw.finish();
    stats.p_max_w = pmax.finish();
    stats.load = load.finish();
    stats.d_cs = dcs.finish();
    stats.d_chs = dchs.finish();
    stats.d_ss = dss.finish();
    stats.d_dd = ddd.finish();
    stats.power_min_w = 0.0;
    stats.headroom = 1.2;
    stats.power_max_w = stats.headroom * power_max;
    if (stats.power_max_w <= 0.0) throw ArgumentError("compute_norm_stats: non-positive power range");
    return stats;
}

} // namespace aau
