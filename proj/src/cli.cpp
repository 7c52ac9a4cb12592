#include "aaupower/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aaupower/errors.hpp"
#include "aaupower/eval.hpp"
#include "aaupower/experiments.hpp"
#include "aaupower/explain.hpp"
#include "aaupower/format.hpp"
#include "aaupower/rng.hpp"
#include "aaupower/teacher.hpp"

namespace aau {

namespace {

using nlohmann::json;

namespace fs = std::filesystem;

constexpr std::uint64_t kCliTrainStream = 41;
constexpr std::uint64_t kCliExplainStream = 42;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

json load_config_json(const std::string& path, const std::string& fallback) {
    if (path.empty()) return json::parse(fallback);
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid config file '" + path + "': " + e.what());
    }
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like key.path=value: '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* node = &j;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError("empty key segment in '" + assignment + "'");
        parts.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);

    try {
        (*node)[parts.back()] = json::parse(value);
    } catch (const json::exception&) {
        (*node)[parts.back()] = value; // bare strings allowed
    }
}

ExperimentConfig resolve_config(const CommonOpts& opts, const std::string& fallback) {
    json j = load_config_json(opts.config_path, fallback);
    for (const auto& o : opts.overrides) apply_override(j, o);
    ExperimentConfig config = parse_config_json(j.dump());
    if (opts.seed) config.seed = *opts.seed;
    return config;
}

fs::path make_run_dir(const CommonOpts& opts, std::uint64_t seed) {
    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        return opts.out_dir;
    }
    const char* base_env = std::getenv("AAUPOWER_RUN_DIR");
    const fs::path base = base_env && *base_env ? fs::path(base_env) : fs::path("runs");

    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_utc);

    fs::path dir = base / (std::string(stamp) + "-seed" + std::to_string(seed));
    for (int n = 1; fs::exists(dir); ++n)
        dir = base / (std::string(stamp) + "-seed" + std::to_string(seed) + "-" + std::to_string(n));
    fs::create_directories(dir);
    return dir;
}

void record_config(const ExperimentConfig& config, const fs::path& dir) {
    std::ofstream out(dir / "resolved_config.json");
    if (!out) throw Error("cannot write resolved_config.json");
    out << config_to_json(config) << '\n';
}

/// Split derived from the distinct days actually present in a CSV: the last
/// `test_days` days become the test set.
SplitResult split_tail_days(const Dataset& ds, int test_days, double val_fraction,
                            std::uint64_t seed) {
    std::set<int> days;
    for (const auto& r : ds.rows) days.insert(r.day);
    if (static_cast<int>(days.size()) <= test_days)
        throw ConfigError("dataset has too few distinct days for test_days=" +
                          std::to_string(test_days));
    SplitSpec spec;
    spec.val_fraction = val_fraction;
    const int cut = static_cast<int>(days.size()) - test_days;
    int i = 0;
    for (int d : days) (i++ < cut ? spec.train_days : spec.test_days).push_back(d);
    return split(ds, spec, seed);
}

int cmd_generate(const CommonOpts& opts) {
    const ExperimentConfig config = resolve_config(opts, config_to_json(ExperimentConfig{}));
    const fs::path dir = make_run_dir(opts, config.seed);
    record_config(config, dir);

    const Fleet fleet = build_fleet(config);
    const Dataset ds = generate_dataset(fleet, config.fleet.days, sub_seed(config.seed, {31}));
    write_fleet_manifest(fleet, (dir / "fleet.json").string());
    write_csv(ds, (dir / "dataset.csv").string());
    std::cout << (dir / "dataset.csv").string() << '\n' << (dir / "fleet.json").string() << '\n';
    return kExitOk;
}

int cmd_train(const CommonOpts& opts, const std::string& data_path) {
    const ExperimentConfig config = resolve_config(opts, config_to_json(ExperimentConfig{}));
    const fs::path dir = make_run_dir(opts, config.seed);
    record_config(config, dir);

    const Dataset ds = read_csv(data_path);
    const SplitResult sr =
        split_tail_days(ds, config.test_days, config.val_fraction, sub_seed(config.seed, {32}));
    const EncoderSpec encoder = fit_encoder(sr.train, ds.c_max);
    const LayerDims dims = dims_for(config, encoder.input_width());
    auto train_cfg = config.train;
    train_cfg.seed = sub_seed(config.seed, {kCliTrainStream});
    auto [params, report] = train_model(sr.train, sr.val, encoder, dims, train_cfg);

    save_model(params, (dir / "model.json").string());
    {
        std::ofstream out(dir / "train_report.txt");
        out << "stopped_epoch " << report.stopped_epoch << '\n'
            << "best_val_loss " << fmt_g17(report.best_val_loss) << '\n';
    }
    {
        std::ofstream out(dir / "train_curve.csv");
        out << "epoch,train_nll,val_nll\n";
        for (std::size_t e = 0; e < report.train_loss.size(); ++e)
            out << (e + 1) << ',' << fmt_g17(report.train_loss[e]) << ','
                << fmt_g17(report.val_loss[e]) << '\n';
    }
    std::cerr << "trained " << report.stopped_epoch << " epochs in "
              << fmt_g17(report.wall_seconds) << " s\n";
    std::cout << (dir / "model.json").string() << '\n';
    return kExitOk;
}

int cmd_predict(const CommonOpts& opts, const std::string& model_path,
                const std::string& data_path, double z) {
    if (z <= 0.0) throw ConfigError("--z must be positive");
    const ModelParams params = load_model(model_path);
    const Dataset ds = read_csv(data_path);
    const fs::path dir = make_run_dir(opts, opts.seed.value_or(0));

    const Matrix x = encode_batch(ds.rows, params.encoder);
    const auto preds = predict_batch(params, x);

    std::ofstream out(dir / "predictions.csv");
    if (!out) throw Error("cannot write predictions.csv");
    out << "aau_id,day,hour,mu_w,sigma_w,ci_lo_w,ci_hi_w\n";
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto ci = preds[i].ci(z);
        out << ds.rows[i].aau_id << ',' << ds.rows[i].day << ',' << ds.rows[i].hour << ','
            << fmt_g17(preds[i].mu_w) << ',' << fmt_g17(preds[i].sigma_w) << ','
            << fmt_g17(ci.lo_w) << ',' << fmt_g17(ci.hi_w) << '\n';
    }
    std::cout << (dir / "predictions.csv").string() << '\n';
    return kExitOk;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& model_path,
                 const std::string& data_path) {
    const ModelParams params = load_model(model_path);
    const Dataset ds = read_csv(data_path);
    const fs::path dir = make_run_dir(opts, opts.seed.value_or(0));

    const std::vector<double> levels = {0.8, 0.9, 0.95};
    const MetricsReport report = evaluate_model(params, ds, levels);
    write_metrics_report(report, (dir / "metrics.txt").string());
    std::cout << (dir / "metrics.txt").string() << '\n';
    return kExitOk;
}

int cmd_explain(const CommonOpts& opts, const std::string& model_path, const std::string& data_path,
                const std::string& groups_csv, int n_instances, int n_permutations,
                int background_size) {
    const ModelParams params = load_model(model_path);
    const Dataset ds = read_csv(data_path);
    if (ds.rows.empty()) throw ConfigError("explain: empty dataset");
    const std::uint64_t seed = opts.seed.value_or(0);
    const fs::path dir = make_run_dir(opts, seed);

    std::vector<FeatureGroup> groups = table_feature_groups(params.encoder);
    if (!groups_csv.empty()) {
        std::set<std::string> want;
        std::stringstream ss(groups_csv);
        std::string name;
        while (std::getline(ss, name, ',')) want.insert(name);
        std::vector<FeatureGroup> selected;
        for (auto& g : groups)
            if (want.count(g.name)) selected.push_back(std::move(g));
        if (selected.size() != want.size()) throw ConfigError("unknown group name in --groups");
        groups = std::move(selected);
    }

    const Matrix x = encode_batch(ds.rows, params.encoder);
    const auto bg_rows = std::min<std::size_t>(x.rows, static_cast<std::size_t>(background_size));
    Matrix background(bg_rows, x.cols);
    {
        std::vector<std::size_t> order(x.rows);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(sub_seed(seed, {kCliExplainStream, 1}));
        rng.shuffle(order);
        order.resize(bg_rows);
        std::sort(order.begin(), order.end());
        for (std::size_t i = 0; i < bg_rows; ++i)
            std::copy(x.row(order[i]), x.row(order[i]) + x.cols, background.row(i));
    }

    std::vector<std::size_t> inst(x.rows);
    std::iota(inst.begin(), inst.end(), 0);
    Rng rng(sub_seed(seed, {kCliExplainStream, 2}));
    rng.shuffle(inst);
    inst.resize(std::min<std::size_t>(inst.size(), static_cast<std::size_t>(n_instances)));
    std::sort(inst.begin(), inst.end());

    const PredictFn f = mu_w_predictor(params);
    std::vector<double> mean_phi(groups.size(), 0.0);
    std::vector<double> mean_abs_phi(groups.size(), 0.0);
    std::vector<InstanceAttributionRow> per_instance;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const std::span<const double> xi(x.row(inst[i]), x.cols);
        const Attribution attr = shapley(f, xi, background, groups, n_permutations,
                                         sub_seed(seed, {kCliExplainStream, 3, i}));
        for (std::size_t g = 0; g < groups.size(); ++g) {
            mean_phi[g] += attr.phi[g];
            mean_abs_phi[g] += std::abs(attr.phi[g]);
            double value = 0.0;
            for (int idx : groups[g].indices) value += xi[static_cast<std::size_t>(idx)];
            value /= static_cast<double>(groups[g].indices.size());
            per_instance.push_back({static_cast<int>(inst[i]), groups[g].name, attr.phi[g], value});
        }
    }

    std::vector<AttributionReportRow> rows;
    for (std::size_t g = 0; g < groups.size(); ++g)
        rows.push_back({groups[g].name, mean_phi[g] / static_cast<double>(inst.size()),
                        mean_abs_phi[g] / static_cast<double>(inst.size())});
    write_attribution_csv(rows, (dir / "attribution.csv").string());
    write_instance_attribution_csv(per_instance, (dir / "instance_attributions.csv").string());
    std::cout << (dir / "attribution.csv").string() << '\n';
    return kExitOk;
}

int cmd_experiment(const CommonOpts& opts, const std::string& name) {
    ExperimentConfig config;
    if (opts.config_path.empty()) {
        json j = json::parse(config_to_json(default_experiment_config(name)));
        for (const auto& o : opts.overrides) apply_override(j, o);
        config = parse_config_json(j.dump());
        if (opts.seed) config.seed = *opts.seed;
    } else {
        config = resolve_config(opts, "");
    }
    const fs::path dir = make_run_dir(opts, config.seed);
    record_config(config, dir);

    const ExperimentReport report = run_experiment(name, config);
    write_experiment_report(report, dir.string());
    std::cerr << "experiment " << name << " finished in " << fmt_g17(report.wall_seconds) << " s\n";
    std::cout << (dir / "report.txt").string() << '\n';
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Synthetic multi-carrier AAU power modeling lab"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string data_path, model_path, name, groups_csv;
    double z = 1.6448536269514722; // 90% two-sided interval
    int n_instances = 50;
    int n_permutations = 2000;
    int background_size = 100;

    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) {
            sub->add_option("--config", opts.config_path, "JSON config file");
            sub->add_option("--set", opts.overrides, "dotted-key override, e.g. train.max_epochs=50");
        }
        sub->add_option("--seed", opts.seed, "seed override");
        sub->add_option("--out", opts.out_dir, "run directory (default: timestamped)");
    };

    auto* generate = app.add_subcommand("generate", "sample a fleet and synthesize a dataset CSV");
    add_common(generate, true);

    auto* train = app.add_subcommand("train", "train a model on a dataset CSV");
    add_common(train, true);
    train->add_option("--data", data_path, "dataset CSV")->required();

    auto* predict = app.add_subcommand("predict", "per-row (mu, sigma, CI) predictions");
    add_common(predict, false);
    predict->add_option("--model", model_path, "model file")->required();
    predict->add_option("--data", data_path, "dataset CSV")->required();
    predict->add_option("--z", z, "CI half-width in sigmas (default: 90% two-sided)");

    auto* evaluate = app.add_subcommand("evaluate", "MAE/MAPE/coverage of a model on a CSV");
    add_common(evaluate, false);
    evaluate->add_option("--model", model_path, "model file")->required();
    evaluate->add_option("--data", data_path, "dataset CSV")->required();

    auto* explain = app.add_subcommand("explain", "Shapley feature-group attribution");
    add_common(explain, false);
    explain->add_option("--model", model_path, "model file")->required();
    explain->add_option("--data", data_path, "dataset CSV")->required();
    explain->add_option("--groups", groups_csv, "comma-separated group names (default: all)");
    explain->add_option("--instances", n_instances, "instances to attribute");
    explain->add_option("--permutations", n_permutations, "Monte Carlo permutations");
    explain->add_option("--background", background_size, "background sample size");

    auto* experiment = app.add_subcommand("experiment", "run a named experiment");
    add_common(experiment, true);
    experiment
        ->add_option("--name", name,
                     "overall | multicarrier | generalization | scaling | data_availability")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(opts);
        if (train->parsed()) return cmd_train(opts, data_path);
        if (predict->parsed()) return cmd_predict(opts, model_path, data_path, z);
        if (evaluate->parsed()) return cmd_evaluate(opts, model_path, data_path);
        if (explain->parsed())
            return cmd_explain(opts, model_path, data_path, groups_csv, n_instances, n_permutations,
                               background_size);
        if (experiment->parsed()) return cmd_experiment(opts, name);
        std::cerr << "error: kind=usage msg=no subcommand\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: kind=config msg=" << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "error: kind=numeric msg=" << e.what() << '\n';
        return kExitNumeric;
    } catch (const ParseError& e) {
        std::cerr << "error: kind=data msg=" << e.what() << '\n';
        return kExitData;
    } catch (const EncodingError& e) {
        std::cerr << "error: kind=data msg=" << e.what() << '\n';
        return kExitData;
    } catch (const ModelIoError& e) {
        std::cerr << "error: kind=data msg=" << e.what() << '\n';
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: kind=data msg=" << e.what() << '\n';
        return kExitData;
    }
}

} // namespace aau
