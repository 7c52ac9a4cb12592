#include "aaupower/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "aaupower/errors.hpp"
#include "aaupower/format.hpp"

namespace aau {

double mae(std::span<const double> preds, std::span<const double> truths) {
    if (preds.size() != truths.size() || preds.empty())
        throw ArgumentError("mae: inputs must be non-empty and of equal length");
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) sum += std::abs(preds[i] - truths[i]);
    return sum / static_cast<double>(preds.size());
}

double mape(std::span<const double> preds, std::span<const double> truths) {
    if (preds.size() != truths.size() || preds.empty())
        throw ArgumentError("mape: inputs must be non-empty and of equal length");
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (truths[i] <= 0.0)
            throw ArgumentError("mape: non-positive truth at index " + std::to_string(i));
        sum += std::abs(preds[i] - truths[i]) / truths[i];
    }
    return 100.0 * sum / static_cast<double>(preds.size());
}

namespace {

// Wichura's AS241 (PPND16): inverse standard-normal CDF, ~1e-15 accurate.
double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("inverse_normal_cdf: p must be in (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) *
                        r +
                    4.5921953931549871457e4) *
                       r +
                   1.3731693765509461125e4) *
                      r +
                  1.9715909503065514427e3) *
                     r +
                 1.3314166789178437745e2) *
                    r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) *
                        r +
                    2.1213794301586595867e4) *
                       r +
                   5.3941960214247511077e3) *
                      r +
                  6.8718700749205790830e2) *
                     r +
                 4.2313330701600911252e1) *
                    r +
                1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) *
                         r +
                     1.27045825245236838258e0) *
                        r +
                    3.64784832476320460504e0) *
                       r +
                   5.76949722146069140550e0) *
                      r +
                  4.63033784615654529590e0) *
                     r +
                 1.42343711074968357734e0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) *
                         r +
                     1.48103976427480074590e-1) *
                        r +
                    6.89767334985100004550e-1) *
                       r +
                   1.67638483018380384940e0) *
                      r +
                  2.05319162663775882187e0) *
                     r +
                 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) *
                         r +
                     2.65321895265761230930e-2) *
                        r +
                    2.96560571828504891230e-1) *
                       r +
                   1.78482653991729133580e0) *
                      r +
                  5.46378491116411436990e0) *
                     r +
                 6.65790464350110377720e0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) *
                         r +
                     7.86869131145613259100e-4) *
                        r +
                    1.48753612908506148525e-2) *
                       r +
                   1.36929880922735805310e-1) *
                      r +
                  5.99832206555887937690e-1) *
                     r +
                 1.0);
    }
    return q < 0.0 ? -value : value;
}

} // namespace

double normal_quantile_two_sided(double level) {
    if (!(level > 0.0 && level < 1.0))
        throw ArgumentError("normal_quantile_two_sided: level must be in (0,1)");
    return inverse_normal_cdf(0.5 * (1.0 + level));
}

std::map<double, double> calibration(const std::vector<GaussianPrediction>& preds,
                                     std::span<const double> truths,
                                     std::span<const double> levels) {
    if (preds.size() != truths.size() || preds.empty())
        throw ArgumentError("calibration: inputs must be non-empty and of equal length");
    for (const auto& p : preds)
        if (!(p.sigma_w > 0.0)) throw ArgumentError("calibration: sigma_w must be positive");

    std::map<double, double> coverage;
    for (double level : levels) {
        const double z = normal_quantile_two_sided(level);
        std::size_t inside = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const Interval ci = preds[i].ci(z);
            if (truths[i] >= ci.lo_w && truths[i] <= ci.hi_w) ++inside;
        }
        coverage[level] = static_cast<double>(inside) / static_cast<double>(preds.size());
    }
    return coverage;
}

MetricsReport evaluate_model(const ModelParams& params, const Dataset& dataset,
                             std::span<const double> levels) {
    if (dataset.rows.empty()) throw ArgumentError("evaluate_model: empty dataset");
    const Matrix x = encode_batch(dataset.rows, params.encoder);
    const auto preds = predict_batch(params, x);

    std::vector<double> mu(preds.size());
    std::vector<double> truth(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        mu[i] = preds[i].mu_w;
        truth[i] = dataset.rows[i].power_w;
    }

    MetricsReport report;
    report.mae_w = mae(mu, truth);
    report.mape_pct = mape(mu, truth);
    report.n = preds.size();
    report.coverage = calibration(preds, truth, levels);
    return report;
}

void write_metrics_report(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "n " << report.n << '\n';
    out << "mae_w " << fmt_g17(report.mae_w) << '\n';
    out << "mape_pct " << fmt_g17(report.mape_pct) << '\n';
    for (const auto& [level, cov] : report.coverage)
        out << "coverage_" << fmt_short(level) << " " << fmt_g17(cov) << '\n';
}

std::vector<ScatterRow> export_scatter(const ModelParams& params, const Dataset& dataset) {
    if (dataset.rows.empty()) return {};
    const Matrix x = encode_batch(dataset.rows, params.encoder);
    const auto preds = predict_batch(params, x);
    const double range = params.power_max_w - params.power_min_w;

    std::vector<ScatterRow> rows(dataset.rows.size());
    for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
        const SampleRecord& r = dataset.rows[i];
        ScatterRow& s = rows[i];
        double load_sum = 0.0;
        int n_present = 0;
        std::vector<double> pmaxes;
        for (const auto& c : r.carriers) {
            if (!c.present) continue;
            load_sum += c.load;
            ++n_present;
            pmaxes.push_back(c.p_max_w);
        }
        std::sort(pmaxes.begin(), pmaxes.end());
        std::ostringstream group;
        group << r.type_id << "|pmax=";
        for (std::size_t k = 0; k < pmaxes.size(); ++k) {
            if (k) group << '+';
            group << fmt_g17(pmaxes[k]);
        }
        s.load = n_present > 0 ? load_sum / n_present : 0.0;
        const double truth = r.true_power_w.value_or(r.power_w);
        s.true_power_w = truth;
        s.est_power_w = preds[i].mu_w;
        s.true_power_norm = (truth - params.power_min_w) / range;
        s.est_power_norm = preds[i].mu_norm;
        s.group = group.str();
    }
    return rows;
}

std::string scatter_csv(const std::vector<ScatterRow>& rows) {
    std::ostringstream out;
    out << "load,true_power_w,est_power_w,true_power_norm,est_power_norm,group\n";
    for (const auto& r : rows) {
        out << fmt_g17(r.load) << ',' << fmt_g17(r.true_power_w) << ',' << fmt_g17(r.est_power_w)
            << ',' << fmt_g17(r.true_power_norm) << ',' << fmt_g17(r.est_power_norm) << ','
            << r.group << '\n';
    }
    return out.str();
}

void write_scatter_csv(const std::vector<ScatterRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << scatter_csv(rows);
}

} // namespace aau
