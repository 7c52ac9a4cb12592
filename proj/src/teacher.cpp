#include "aaupower/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <tuple>

#include <nlohmann/json.hpp>

#include "aaupower/errors.hpp"
#include "aaupower/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aau {

namespace {

// Fleet-sampling ranges. Power fields are sized so idle/full-load totals sit
// in the hundreds-of-watts range.
constexpr double kPBaseMin = 50.0, kPBaseMax = 150.0;
constexpr double kPMcpa0Min = 40.0, kPMcpa0Max = 120.0;
constexpr double kGammaMin = 0.55, kGammaMax = 0.95;
constexpr double kPFixMin = 8.0, kPFixMax = 60.0;
// Wide PA-slope range: the per-type slope diversity is what forces network
// capacity to grow with the number of modeled types.
constexpr double kKappaMin = 0.8, kKappaMax = 9.0;
// Duration responses are strongly type-specific; carrier-shutdown savings
// stay structural (the (1-d_cs) gate does not depend on these).
constexpr double kEtaSsMin = 0.05, kEtaSsMax = 0.95;
constexpr double kEtaChMin = 0.05, kEtaChMax = 0.95;
constexpr double kPDormMin = 10.0, kPDormMax = 30.0;
constexpr double kSigma0Min = 0.5, kSigma0Max = 1.5;
// Relative noise is uniform across types so every cohort has the same MAPE
// floor; per-type floors would otherwise dominate cross-cohort comparisons.
constexpr double kSigma1Min = 0.015, kSigma1Max = 0.015;

const std::vector<int> kTrxOptions = {2, 4, 8, 16, 32, 64};
const std::vector<double> kBandFreqs = {700.0, 1800.0, 2100.0, 2600.0, 3500.0, 4900.0};
const std::vector<double> kBandwidths = {10.0, 20.0, 40.0, 60.0, 80.0, 100.0};
const std::vector<double> kPMaxOptions = {20.0, 30.0, 40.0, 60.0, 80.0};
const std::vector<std::string> kTxModes = {"4T4R", "8T8R", "32T32R", "64T64R"};

constexpr double kLoadJitter = 0.08;

// Sub-stream tags.
constexpr std::uint64_t kTypeStream = 1;
constexpr std::uint64_t kAauStream = 2;
constexpr std::uint64_t kHourStream = 3;
constexpr std::uint64_t kBehaviorStream = 4;

// Traffic and energy-saving management profile of one AAU type. Each type
// runs its own policy (thresholds, activation rates, duration ranges), so
// fleets stay heterogeneous in behavior, not just in hardware parameters.
// Derived deterministically from the fleet seed and the type index.
struct TypeBehavior {
    double load_base_lo, load_base_hi; // per-AAU diurnal mean range
    double load_amp_lo, load_amp_hi;
    double cs_threshold; // carrier shutdown allowed below this load
    double cs_prob;
    double chs_threshold;
    double chs_prob;
    double dss_lo, dss_hi; // symbol-shutdown fraction of idle time
    double dd_threshold;   // deep dormancy needs every carrier below this
    double dd_prob;
};

TypeBehavior behavior_for(std::uint64_t fleet_seed, int type_index) {
    Rng rng(sub_seed(fleet_seed, {kBehaviorStream, static_cast<std::uint64_t>(type_index)}));
    TypeBehavior b;
    // Energy-saving prevalence is kept uniform across types: per-type rates
    // would skew each cohort's share of low-power hours and with it the
    // cohort MAPE floor. Types still differ in their duration responses
    // (eta_ss, eta_ch, gamma) and in symbol-shutdown aggressiveness.
    b.load_base_lo = 0.15;
    b.load_base_hi = 0.55;
    b.load_amp_lo = 0.15;
    b.load_amp_hi = 0.40;
    b.cs_threshold = 0.30;
    b.cs_prob = 0.55;
    b.chs_threshold = 0.50;
    b.chs_prob = 0.70;
    b.dss_lo = rng.uniform(0.30, 0.60);
    b.dss_hi = b.dss_lo + rng.uniform(0.20, 0.35);
    b.dd_threshold = 0.12;
    b.dd_prob = 0.35;
    return b;
}

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

struct BandTemplate {
    std::string band_id;
    double freq_mhz;
    std::string tx_mode;
    std::vector<double> p_max_options;
    std::vector<double> bw_options; // varies per carrier deployment, not per type
};

struct TypeTemplates {
    std::vector<BandTemplate> bands;
    int mcpa_group_span = 2; // carriers per MCPA group; fixed per type so the
                             // grouping is a function of (type, carrier count)
};

void canonical_sort(std::vector<CarrierSpec>& carriers) {
    std::sort(carriers.begin(), carriers.end(), [](const CarrierSpec& a, const CarrierSpec& b) {
        return std::tie(a.freq_mhz, b.p_max_w, b.bw_mhz, a.tx_mode, a.band_id) <
               std::tie(b.freq_mhz, a.p_max_w, a.bw_mhz, b.tx_mode, b.band_id);
    });
    for (std::size_t i = 0; i < carriers.size(); ++i) carriers[i].carrier_idx = static_cast<int>(i);
}

} // namespace

void AAUTypeSpec::validate() const {
    if (num_trx < 1 || num_bands < 1 || max_carriers < 1)
        throw ArgumentError("AAUTypeSpec " + type_id + ": counts must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ArgumentError("AAUTypeSpec " + type_id + ": gamma must be in (0,1]");
    if (eta_ss < 0.0 || eta_ss > 1.0 || eta_ch < 0.0 || eta_ch > 1.0)
        throw ArgumentError("AAUTypeSpec " + type_id + ": eta fractions must be in [0,1]");
    if (p_base_w < 0 || p_mcpa0_w < 0 || p_fix_carrier_w < 0 || kappa < 0 || p_dorm_w < 0 ||
        sigma0_w < 0 || sigma1 < 0)
        throw ArgumentError("AAUTypeSpec " + type_id + ": power fields must be >= 0");
    if (!(p_dorm_w < p_base_w + p_mcpa0_w))
        throw ArgumentError("AAUTypeSpec " + type_id + ": dormancy must save power");
}

void HourState::validate(std::size_t n_carriers) const {
    if (load.size() != n_carriers || d_cs.size() != n_carriers || d_chs.size() != n_carriers ||
        d_ss.size() != n_carriers)
        throw ArgumentError("HourState: per-carrier vectors must match carrier count");
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(d_dd)) throw ArgumentError("HourState: d_dd out of [0,1]");
    for (std::size_t c = 0; c < n_carriers; ++c) {
        if (!in01(load[c]) || !in01(d_cs[c]) || !in01(d_chs[c]) || !in01(d_ss[c]))
            throw ArgumentError("HourState: fraction out of [0,1] at carrier " + std::to_string(c));
        if (d_cs[c] + d_dd > 1.0 + 1e-12)
            throw ArgumentError("HourState: d_cs + d_dd > 1 at carrier " + std::to_string(c));
        if (d_cs[c] == 1.0 && load[c] != 0.0)
            throw ArgumentError("HourState: nonzero load on fully shut-down carrier " +
                                std::to_string(c));
    }
}

const AAUTypeSpec& Fleet::type_of(const AAUInstance& aau) const {
    for (const auto& t : types)
        if (t.type_id == aau.type_id) return t;
    throw ArgumentError("unknown type_id " + aau.type_id);
}

double teacher_power(const AAUTypeSpec& type, const std::vector<CarrierSpec>& carriers,
                     const HourState& state) {
    if (carriers.empty()) throw ArgumentError("teacher_power: no carriers");
    state.validate(carriers.size());

    // MCPA group sizes and the fraction of the hour the whole group is off.
    std::map<int, std::pair<int, double>> groups; // group -> (count, min d_cs)
    for (std::size_t c = 0; c < carriers.size(); ++c) {
        auto [it, inserted] = groups.try_emplace(carriers[c].mcpa_group, 0, 1.0);
        it->second.first += 1;
        it->second.second = std::min(it->second.second, state.d_cs[c]);
    }

    double active = type.p_base_w;
    for (const auto& [group, info] : groups) {
        const auto& [count, off] = info;
        active += type.p_mcpa0_w * std::pow(static_cast<double>(count), type.gamma) * (1.0 - off);
    }
    for (std::size_t c = 0; c < carriers.size(); ++c) {
        const double chains = 1.0 - type.eta_ch * state.d_chs[c];
        const double fixed = type.p_fix_carrier_w * (1.0 - type.eta_ss * state.d_ss[c]);
        const double dynamic = type.kappa * state.load[c] * carriers[c].p_max_w;
        active += (1.0 - state.d_cs[c]) * chains * (fixed + dynamic);
    }
    return state.d_dd * type.p_dorm_w + (1.0 - state.d_dd) * active;
}

Fleet sample_fleet(int n_types, int aaus_per_type, int c_max, std::uint64_t seed) {
    if (n_types < 1 || aaus_per_type < 1 || c_max < 1)
        throw ArgumentError("sample_fleet: counts must be >= 1");

    Fleet fleet;
    fleet.c_max = c_max;
    fleet.seed = seed;

    std::vector<TypeTemplates> templates(n_types);
    for (int t = 0; t < n_types; ++t) {
        Rng rng(sub_seed(seed, {kTypeStream, static_cast<std::uint64_t>(t)}));
        AAUTypeSpec spec;
        spec.type_id = "T" + zero_pad(t, 2);
        spec.num_trx = rng.pick(kTrxOptions);
        spec.num_bands = rng.uniform_int(2, 3);
        // Near-uniform structural complexity across types; per-AAU carrier
        // counts still span 1..max_carriers, so single-carrier AAUs exist.
        spec.max_carriers = c_max <= 2 ? c_max : rng.uniform_int(c_max - 1, c_max);
        spec.p_base_w = rng.uniform(kPBaseMin, kPBaseMax);
        spec.p_mcpa0_w = rng.uniform(kPMcpa0Min, kPMcpa0Max);
        spec.gamma = rng.uniform(kGammaMin, kGammaMax);
        spec.p_fix_carrier_w = rng.uniform(kPFixMin, kPFixMax);
        spec.kappa = rng.uniform(kKappaMin, kKappaMax);
        spec.eta_ss = rng.uniform(kEtaSsMin, kEtaSsMax);
        spec.eta_ch = rng.uniform(kEtaChMin, kEtaChMax);
        spec.p_dorm_w = rng.uniform(kPDormMin, kPDormMax);
        spec.sigma0_w = rng.uniform(kSigma0Min, kSigma0Max);
        spec.sigma1 = rng.uniform(kSigma1Min, kSigma1Max);
        spec.validate();
        fleet.types.push_back(spec);

        // Per-band carrier templates; every AAU of the type draws from these.
        auto freqs = kBandFreqs;
        rng.shuffle(freqs);
        TypeTemplates& tt = templates[t];
        tt.mcpa_group_span = rng.uniform_int(2, 3);
        for (int b = 0; b < spec.num_bands; ++b) {
            BandTemplate band;
            band.band_id = "B" + std::to_string(b);
            band.freq_mhz = freqs[b];
            band.tx_mode = rng.pick(kTxModes);
            const int n_bw = rng.uniform_int(2, 3);
            auto bws = kBandwidths;
            rng.shuffle(bws);
            bws.resize(n_bw);
            std::sort(bws.begin(), bws.end());
            band.bw_options = bws;
            const int n_opts = rng.uniform_int(3, 4);
            auto opts = kPMaxOptions;
            rng.shuffle(opts);
            opts.resize(n_opts);
            std::sort(opts.begin(), opts.end());
            band.p_max_options = opts;
            tt.bands.push_back(band);
        }
    }

    const int id_width = std::max(4, static_cast<int>(std::to_string(n_types * aaus_per_type).size()));
    for (int t = 0; t < n_types; ++t) {
        const AAUTypeSpec& spec = fleet.types[t];
        const TypeTemplates& tt = templates[t];
        for (int j = 0; j < aaus_per_type; ++j) {
            Rng rng(sub_seed(seed, {kAauStream, static_cast<std::uint64_t>(t),
                                    static_cast<std::uint64_t>(j)}));
            AAUInstance aau;
            aau.aau_id = "A" + zero_pad(t * aaus_per_type + j, id_width);
            aau.type_id = spec.type_id;

            const int n_carriers = rng.uniform_int(1, spec.max_carriers);
            for (int c = 0; c < n_carriers; ++c) {
                const BandTemplate& band = tt.bands[c % tt.bands.size()];
                CarrierSpec carrier;
                carrier.band_id = band.band_id;
                // center frequency varies within the band per deployment
                carrier.freq_mhz = band.freq_mhz + 5.0 * rng.uniform_int(0, 15);
                carrier.bw_mhz = rng.pick(band.bw_options);
                carrier.tx_mode = band.tx_mode;
                carrier.p_max_w = rng.pick(band.p_max_options);
                aau.carriers.push_back(carrier);
            }
            canonical_sort(aau.carriers);
            // MCPA sharing follows the type's hardware: span carriers per
            // amplifier, assigned over the canonical order so AAUs with
            // identical carrier configurations group identically.
            const int n_groups = (n_carriers + tt.mcpa_group_span - 1) / tt.mcpa_group_span;
            for (int c = 0; c < n_carriers; ++c) aau.carriers[c].mcpa_group = c % n_groups;
            fleet.aaus.push_back(std::move(aau));
        }
    }
    return fleet;
}

void set_noise(Fleet& fleet, double sigma0_w, double sigma1) {
    for (auto& t : fleet.types) {
        t.sigma0_w = sigma0_w;
        t.sigma1 = sigma1;
    }
}

namespace {

void generate_aau_rows(const Fleet& fleet, std::size_t aau_index, int type_index, int n_days,
                       std::uint64_t seed, SampleRecord* out) {
    const AAUInstance& aau = fleet.aaus[aau_index];
    const AAUTypeSpec& type = fleet.types[static_cast<std::size_t>(type_index)];
    const std::size_t n_carriers = aau.carriers.size();
    const TypeBehavior b = behavior_for(fleet.seed, type_index);

    Rng rng(sub_seed(seed, {kHourStream, aau_index}));

    // Per-AAU diurnal profile.
    const double base = rng.uniform(b.load_base_lo, b.load_base_hi);
    const double amp = rng.uniform(b.load_amp_lo, b.load_amp_hi);
    const double phase = rng.uniform(0.0, 24.0);
    std::vector<double> carrier_mult(n_carriers);
    for (auto& m : carrier_mult) m = rng.uniform(0.7, 1.0);

    HourState state;
    state.load.resize(n_carriers);
    state.d_cs.resize(n_carriers);
    state.d_chs.resize(n_carriers);
    state.d_ss.resize(n_carriers);

    std::size_t slot = 0;
    for (int day = 0; day < n_days; ++day) {
        for (int hour = 0; hour < 24; ++hour) {
            const double wave = std::sin(2.0 * 3.141592653589793 * (hour - phase) / 24.0);
            double max_load = 0.0;
            for (std::size_t c = 0; c < n_carriers; ++c) {
                const double raw = base * carrier_mult[c] + amp * wave +
                                   rng.uniform(-kLoadJitter, kLoadJitter);
                state.load[c] = std::clamp(raw, 0.0, 1.0);
                max_load = std::max(max_load, state.load[c]);
            }
            for (std::size_t c = 0; c < n_carriers; ++c) {
                const double idle = 1.0 - state.load[c];
                state.d_ss[c] = idle * rng.uniform(b.dss_lo, b.dss_hi);
                state.d_chs[c] = 0.0;
                if (state.load[c] < b.chs_threshold && rng.uniform() < b.chs_prob)
                    state.d_chs[c] =
                        std::clamp((b.chs_threshold - state.load[c]) * rng.uniform(0.0, 2.0), 0.0, 1.0);
                state.d_cs[c] = 0.0;
                if (state.load[c] < b.cs_threshold && rng.uniform() < b.cs_prob) {
                    state.d_cs[c] = rng.uniform(0.4, 1.0);
                    if (state.d_cs[c] > 0.95) {
                        state.d_cs[c] = 1.0;
                        state.load[c] = 0.0;
                    }
                }
            }
            state.d_dd = 0.0;
            if (max_load < b.dd_threshold && rng.uniform() < b.dd_prob) {
                state.d_dd = rng.uniform(0.2, 0.9);
                for (std::size_t c = 0; c < n_carriers; ++c)
                    state.d_cs[c] = std::min(state.d_cs[c], 1.0 - state.d_dd);
            }

            const double y = teacher_power(type, aau.carriers, state);
            const double sigma = type.sigma0_w + type.sigma1 * y;
            double y_bar = y + sigma * rng.normal();
            while (y_bar <= 0.0) y_bar = y + sigma * rng.normal();

            SampleRecord& r = out[slot++];
            r.aau_id = aau.aau_id;
            r.type_id = aau.type_id;
            r.day = day;
            r.hour = hour;
            r.num_trx = type.num_trx;
            r.carriers.assign(fleet.c_max, CarrierSample{});
            for (std::size_t c = 0; c < n_carriers; ++c) {
                CarrierSample& cs = r.carriers[c];
                cs.present = true;
                cs.tx_mode = aau.carriers[c].tx_mode;
                cs.freq_mhz = aau.carriers[c].freq_mhz;
                cs.bw_mhz = aau.carriers[c].bw_mhz;
                cs.p_max_w = aau.carriers[c].p_max_w;
                cs.load = state.load[c];
                cs.d_cs = state.d_cs[c];
                cs.d_chs = state.d_chs[c];
                cs.d_ss = state.d_ss[c];
                cs.d_dd = state.d_dd;
            }
            r.power_w = y_bar;
            r.true_power_w = y;
        }
    }
}

Dataset generate_impl(const Fleet& fleet, int n_days, std::uint64_t seed, bool parallel) {
    if (n_days < 1) throw ArgumentError("generate_dataset: n_days must be >= 1");
    if (fleet.aaus.empty()) throw ArgumentError("generate_dataset: empty fleet");

    const std::size_t rows_per_aau = static_cast<std::size_t>(24) * n_days;
    Dataset ds;
    ds.c_max = fleet.c_max;
    ds.rows.resize(fleet.aaus.size() * rows_per_aau);

    std::vector<int> type_index(fleet.aaus.size());
    for (std::size_t a = 0; a < fleet.aaus.size(); ++a) {
        const auto it = std::find_if(fleet.types.begin(), fleet.types.end(), [&](const AAUTypeSpec& t) {
            return t.type_id == fleet.aaus[a].type_id;
        });
        if (it == fleet.types.end())
            throw ArgumentError("generate_dataset: unknown type_id " + fleet.aaus[a].type_id);
        type_index[a] = static_cast<int>(it - fleet.types.begin());
    }

    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long a = 0; a < static_cast<long>(fleet.aaus.size()); ++a) {
            generate_aau_rows(fleet, static_cast<std::size_t>(a), type_index[static_cast<std::size_t>(a)],
                              n_days, seed, ds.rows.data() + a * rows_per_aau);
        }
    } else {
        for (std::size_t a = 0; a < fleet.aaus.size(); ++a) {
            generate_aau_rows(fleet, a, type_index[a], n_days, seed, ds.rows.data() + a * rows_per_aau);
        }
    }
    return ds;
}

} // namespace

Dataset generate_dataset(const Fleet& fleet, int n_days, std::uint64_t seed) {
    return generate_impl(fleet, n_days, seed, true);
}

Dataset generate_dataset_serial(const Fleet& fleet, int n_days, std::uint64_t seed) {
    return generate_impl(fleet, n_days, seed, false);
}

namespace {

using nlohmann::json;

json type_to_json(const AAUTypeSpec& t) {
    return json{{"type_id", t.type_id},
                {"num_trx", t.num_trx},
                {"num_bands", t.num_bands},
                {"max_carriers", t.max_carriers},
                {"p_base_w", t.p_base_w},
                {"p_mcpa0_w", t.p_mcpa0_w},
                {"gamma", t.gamma},
                {"p_fix_carrier_w", t.p_fix_carrier_w},
                {"kappa", t.kappa},
                {"eta_ss", t.eta_ss},
                {"eta_ch", t.eta_ch},
                {"p_dorm_w", t.p_dorm_w},
                {"sigma0_w", t.sigma0_w},
                {"sigma1", t.sigma1}};
}

AAUTypeSpec type_from_json(const json& j) {
    AAUTypeSpec t;
    t.type_id = j.at("type_id").get<std::string>();
    t.num_trx = j.at("num_trx").get<int>();
    t.num_bands = j.at("num_bands").get<int>();
    t.max_carriers = j.at("max_carriers").get<int>();
    t.p_base_w = j.at("p_base_w").get<double>();
    t.p_mcpa0_w = j.at("p_mcpa0_w").get<double>();
    t.gamma = j.at("gamma").get<double>();
    t.p_fix_carrier_w = j.at("p_fix_carrier_w").get<double>();
    t.kappa = j.at("kappa").get<double>();
    t.eta_ss = j.at("eta_ss").get<double>();
    t.eta_ch = j.at("eta_ch").get<double>();
    t.p_dorm_w = j.at("p_dorm_w").get<double>();
    t.sigma0_w = j.at("sigma0_w").get<double>();
    t.sigma1 = j.at("sigma1").get<double>();
    return t;
}

} // namespace

void write_fleet_manifest(const Fleet& fleet, const std::string& path) {
    json j;
    j["format"] = "aaupower-fleet";
    j["version"] = 1;
    j["seed"] = fleet.seed;
    j["c_max"] = fleet.c_max;
    j["types"] = json::array();
    for (const auto& t : fleet.types) j["types"].push_back(type_to_json(t));
    j["aaus"] = json::array();
    for (const auto& a : fleet.aaus) {
        json ja{{"aau_id", a.aau_id}, {"type_id", a.type_id}, {"carriers", json::array()}};
        for (const auto& c : a.carriers) {
            ja["carriers"].push_back(json{{"carrier_idx", c.carrier_idx},
                                          {"band_id", c.band_id},
                                          {"freq_mhz", c.freq_mhz},
                                          {"bw_mhz", c.bw_mhz},
                                          {"p_max_w", c.p_max_w},
                                          {"tx_mode", c.tx_mode},
                                          {"mcpa_group", c.mcpa_group}});
        }
        j["aaus"].push_back(std::move(ja));
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

Fleet read_fleet_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid fleet manifest: ") + e.what(), 0, "json");
    }
    if (j.value("format", "") != "aaupower-fleet" || j.value("version", 0) != 1)
        throw ParseError("unsupported fleet manifest format/version", 0, "format");

    Fleet fleet;
    fleet.seed = j.at("seed").get<std::uint64_t>();
    fleet.c_max = j.at("c_max").get<int>();
    for (const auto& jt : j.at("types")) fleet.types.push_back(type_from_json(jt));
    for (const auto& ja : j.at("aaus")) {
        AAUInstance a;
        a.aau_id = ja.at("aau_id").get<std::string>();
        a.type_id = ja.at("type_id").get<std::string>();
        for (const auto& jc : ja.at("carriers")) {
            CarrierSpec c;
            c.carrier_idx = jc.at("carrier_idx").get<int>();
            c.band_id = jc.at("band_id").get<std::string>();
            c.freq_mhz = jc.at("freq_mhz").get<double>();
            c.bw_mhz = jc.at("bw_mhz").get<double>();
            c.p_max_w = jc.at("p_max_w").get<double>();
            c.tx_mode = jc.at("tx_mode").get<std::string>();
            c.mcpa_group = jc.at("mcpa_group").get<int>();
            a.carriers.push_back(std::move(c));
        }
        fleet.aaus.push_back(std::move(a));
    }
    return fleet;
}

} // namespace aau
