#include "aaupower/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <set>

#include "aaupower/errors.hpp"
#include "aaupower/eval.hpp"
#include "aaupower/format.hpp"
#include "aaupower/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aau {

namespace {

constexpr std::uint64_t kShapleyStream = 21;
constexpr std::uint64_t kImportanceStream = 22;
constexpr std::uint64_t kPermutationStream = 23;
constexpr int kExactGroupLimit = 10;

void validate_groups(const std::vector<FeatureGroup>& groups, std::size_t width) {
    if (groups.empty()) throw ArgumentError("shapley: no feature groups");
    std::set<int> seen;
    for (const auto& g : groups) {
        if (g.indices.empty()) throw ArgumentError("shapley: empty group '" + g.name + "'");
        for (int idx : g.indices) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= width)
                throw ArgumentError("shapley: index out of range in group '" + g.name + "'");
            if (!seen.insert(idx).second)
                throw ArgumentError("shapley: groups overlap at index " + std::to_string(idx));
        }
    }
}

std::vector<std::string> group_names(const std::vector<FeatureGroup>& groups) {
    std::vector<std::string> names;
    names.reserve(groups.size());
    for (const auto& g : groups) names.push_back(g.name);
    return names;
}

} // namespace

PredictFn mu_w_predictor(const ModelParams& params) {
    auto shared = std::make_shared<ModelParams>(params);
    return [shared](std::span<const double> x) { return forward(*shared, x).mu_w; };
}

Attribution shapley_exact(const PredictFn& f, std::span<const double> instance,
                          const Matrix& background, const std::vector<FeatureGroup>& groups) {
    validate_groups(groups, instance.size());
    if (background.rows == 0) throw ArgumentError("shapley: empty background");
    const int n = static_cast<int>(groups.size());
    if (n > 20) throw ArgumentError("shapley_exact: too many groups for enumeration");

    // v(S) = mean over the background of f(instance with groups outside S
    // replaced by the background row's values).
    const std::size_t n_masks = std::size_t{1} << n;
    std::vector<double> v(n_masks, 0.0);
    std::vector<double> z(instance.begin(), instance.end());
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
        double sum = 0.0;
        for (std::size_t b = 0; b < background.rows; ++b) {
            std::copy(instance.begin(), instance.end(), z.begin());
            const double* bg = background.row(b);
            for (int g = 0; g < n; ++g) {
                if (mask & (std::size_t{1} << g)) continue;
                for (int idx : groups[static_cast<std::size_t>(g)].indices)
                    z[static_cast<std::size_t>(idx)] = bg[idx];
            }
            sum += f(z);
        }
        v[mask] = sum / static_cast<double>(background.rows);
    }

    std::vector<double> factorial(static_cast<std::size_t>(n) + 1, 1.0);
    for (int k = 1; k <= n; ++k) factorial[static_cast<std::size_t>(k)] = factorial[k - 1] * k;

    Attribution attr;
    attr.group_names = group_names(groups);
    attr.phi.assign(static_cast<std::size_t>(n), 0.0);
    for (int g = 0; g < n; ++g) {
        const std::size_t bit = std::size_t{1} << g;
        double phi = 0.0;
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            if (mask & bit) continue;
            const int k = std::popcount(mask);
            const double w = factorial[static_cast<std::size_t>(k)] *
                             factorial[static_cast<std::size_t>(n - 1 - k)] /
                             factorial[static_cast<std::size_t>(n)];
            phi += w * (v[mask | bit] - v[mask]);
        }
        attr.phi[static_cast<std::size_t>(g)] = phi;
    }
    attr.base_value = v[0];
    attr.prediction = f(instance);
    return attr;
}

namespace {

Attribution shapley_mc_impl(const PredictFn& f, std::span<const double> instance,
                            const Matrix& background, const std::vector<FeatureGroup>& groups,
                            int n_permutations, std::uint64_t seed, bool parallel) {
    validate_groups(groups, instance.size());
    if (background.rows == 0) throw ArgumentError("shapley: empty background");
    if (n_permutations < 1) throw ArgumentError("shapley: n_permutations must be >= 1");
    const int n = static_cast<int>(groups.size());

    // Pre-draw every permutation and its paired background row so results do
    // not depend on scheduling.
    Rng rng(sub_seed(seed, {kShapleyStream}));
    std::vector<std::size_t> bg_rows(static_cast<std::size_t>(n_permutations));
    std::vector<int> orders(static_cast<std::size_t>(n_permutations) * n);
    std::vector<int> base_order(static_cast<std::size_t>(n));
    std::iota(base_order.begin(), base_order.end(), 0);
    for (int t = 0; t < n_permutations; ++t) {
        bg_rows[static_cast<std::size_t>(t)] = rng.below(background.rows);
        std::vector<int> order = base_order;
        rng.shuffle(order);
        std::copy(order.begin(), order.end(), orders.begin() + static_cast<std::size_t>(t) * n);
    }

    std::vector<double> phi_slots(static_cast<std::size_t>(n_permutations) * n, 0.0);
    std::vector<double> base_slots(static_cast<std::size_t>(n_permutations), 0.0);

    auto run_permutation = [&](int t) {
        std::vector<double> z(instance.begin(), instance.end());
        const double* bg = background.row(bg_rows[static_cast<std::size_t>(t)]);
        for (const auto& g : groups)
            for (int idx : g.indices) z[static_cast<std::size_t>(idx)] = bg[idx];
        double prev = f(z);
        base_slots[static_cast<std::size_t>(t)] = prev;
        const int* order = orders.data() + static_cast<std::size_t>(t) * n;
        for (int step = 0; step < n; ++step) {
            const auto g = static_cast<std::size_t>(order[step]);
            for (int idx : groups[g].indices)
                z[static_cast<std::size_t>(idx)] = instance[static_cast<std::size_t>(idx)];
            const double cur = f(z);
            phi_slots[static_cast<std::size_t>(t) * n + static_cast<std::size_t>(g)] = cur - prev;
            prev = cur;
        }
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < n_permutations; ++t) run_permutation(t);
    } else {
        for (int t = 0; t < n_permutations; ++t) run_permutation(t);
    }

    Attribution attr;
    attr.group_names = group_names(groups);
    attr.phi.assign(static_cast<std::size_t>(n), 0.0);
    double base = 0.0;
    for (int t = 0; t < n_permutations; ++t) { // fixed-order reduction
        base += base_slots[static_cast<std::size_t>(t)];
        for (int g = 0; g < n; ++g)
            attr.phi[static_cast<std::size_t>(g)] +=
                phi_slots[static_cast<std::size_t>(t) * n + static_cast<std::size_t>(g)];
    }
    for (double& p : attr.phi) p /= static_cast<double>(n_permutations);
    attr.base_value = base / static_cast<double>(n_permutations);
    attr.prediction = f(instance);
    return attr;
}

} // namespace

Attribution shapley_monte_carlo(const PredictFn& f, std::span<const double> instance,
                                const Matrix& background,
                                const std::vector<FeatureGroup>& groups, int n_permutations,
                                std::uint64_t seed) {
    return shapley_mc_impl(f, instance, background, groups, n_permutations, seed, true);
}

Attribution shapley_monte_carlo_serial(const PredictFn& f, std::span<const double> instance,
                                       const Matrix& background,
                                       const std::vector<FeatureGroup>& groups,
                                       int n_permutations, std::uint64_t seed) {
    return shapley_mc_impl(f, instance, background, groups, n_permutations, seed, false);
}

Attribution shapley(const PredictFn& f, std::span<const double> instance, const Matrix& background,
                    const std::vector<FeatureGroup>& groups, int n_permutations,
                    std::uint64_t seed) {
    if (static_cast<int>(groups.size()) <= kExactGroupLimit)
        return shapley_exact(f, instance, background, groups);
    return shapley_monte_carlo(f, instance, background, groups, n_permutations, seed);
}

std::vector<double> global_importance(const PredictFn& f, const Matrix& instances,
                                      const Matrix& background,
                                      const std::vector<FeatureGroup>& groups, int n_instances,
                                      int n_permutations, std::uint64_t seed) {
    if (instances.rows == 0) throw ArgumentError("global_importance: no instances");
    validate_groups(groups, instances.cols);

    std::vector<std::size_t> rows(instances.rows);
    std::iota(rows.begin(), rows.end(), 0);
    Rng rng(sub_seed(seed, {kImportanceStream}));
    rng.shuffle(rows);
    const auto take = std::min<std::size_t>(rows.size(), static_cast<std::size_t>(n_instances));
    rows.resize(take);
    std::sort(rows.begin(), rows.end());

    std::vector<double> mean_abs(groups.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::span<const double> x(instances.row(rows[i]), instances.cols);
        const Attribution attr =
            shapley(f, x, background, groups, n_permutations, sub_seed(seed, {kImportanceStream, i}));
        for (std::size_t g = 0; g < groups.size(); ++g) mean_abs[g] += std::abs(attr.phi[g]);
    }
    for (double& v : mean_abs) v /= static_cast<double>(rows.size());
    return mean_abs;
}

std::vector<double> permutation_importance(const ModelParams& params, const Dataset& dataset,
                                           const std::vector<FeatureGroup>& groups,
                                           std::uint64_t seed) {
    if (dataset.rows.empty()) throw ArgumentError("permutation_importance: empty dataset");
    Matrix x = encode_batch(dataset.rows, params.encoder);
    validate_groups(groups, x.cols);

    std::vector<double> truth(dataset.rows.size());
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = dataset.rows[i].power_w;

    auto mape_of = [&](const Matrix& m) {
        const auto preds = predict_batch(params, m);
        std::vector<double> mu(preds.size());
        for (std::size_t i = 0; i < preds.size(); ++i) mu[i] = preds[i].mu_w;
        return mape(mu, truth);
    };
    const double baseline = mape_of(x);

    std::vector<double> deltas(groups.size(), 0.0);
    std::vector<double> saved(x.rows);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<std::size_t> perm(x.rows);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(sub_seed(seed, {kPermutationStream, g}));
        rng.shuffle(perm);

        // One shared row permutation for the whole group's column block.
        for (int col : groups[g].indices) {
            for (std::size_t i = 0; i < x.rows; ++i) saved[i] = x.at(i, static_cast<std::size_t>(col));
            for (std::size_t i = 0; i < x.rows; ++i)
                x.at(i, static_cast<std::size_t>(col)) = saved[perm[i]];
        }
        deltas[g] = mape_of(x) - baseline;
        for (int col : groups[g].indices) {
            for (std::size_t i = 0; i < x.rows; ++i) saved[i] = x.at(i, static_cast<std::size_t>(col));
            for (std::size_t i = 0; i < x.rows; ++i)
                x.at(perm[i], static_cast<std::size_t>(col)) = saved[i];
        }
    }
    return deltas;
}

// The ten measurement-feature groups. The type one-hot is deliberately not a
// group: it is an identity encoding, so attribution is conditional on the
// instance's type (the uncovered segment stays at the instance's values) and
// the ten groups keep the exact enumerator in reach.
std::vector<FeatureGroup> table_feature_groups(const EncoderSpec& spec) {
    const int n_types = static_cast<int>(spec.type_registry.size());
    std::vector<FeatureGroup> groups;
    const char* const names[] = {"tx_mode", "num_trx", "carrier_freq", "carrier_bw", "p_max",
                                 "load",    "d_cs",    "d_chs",        "d_ss",       "d_dd"};
    for (int field = 0; field < EncoderSpec::kCarrierBlock; ++field) {
        FeatureGroup g{names[field], {}};
        for (int slot = 0; slot < spec.c_max; ++slot)
            g.indices.push_back(n_types + slot * EncoderSpec::kCarrierBlock + field);
        groups.push_back(std::move(g));
    }
    return groups;
}

void write_attribution_csv(const std::vector<AttributionReportRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "group,phi,mean_abs_phi\n";
    for (const auto& r : rows)
        out << r.group << ',' << fmt_g17(r.mean_phi) << ',' << fmt_g17(r.mean_abs_phi) << '\n';
}

void write_instance_attribution_csv(const std::vector<InstanceAttributionRow>& rows,
                                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "instance,group,phi,feature_value\n";
    for (const auto& r : rows)
        out << r.instance << ',' << r.group << ',' << fmt_g17(r.phi) << ','
            << fmt_g17(r.feature_value) << '\n';
}

} // namespace aau
