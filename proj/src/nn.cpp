#include "aaupower/nn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "aaupower/errors.hpp"
#include "aaupower/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace aau {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kShuffleStream = 12;

// Fixed accumulation chunk for mini-batch gradients. Chunk boundaries depend
// only on the batch, never on the thread count, and chunk buffers are reduced
// in index order, so parallel and serial results are bit-identical.
constexpr int kGradChunk = 32;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Workspace {
    std::vector<double> h1, h2, dh1, dh2;

    void resize(const LayerDims& dims) {
        h1.resize(static_cast<std::size_t>(dims.l1));
        h2.resize(static_cast<std::size_t>(dims.l2));
        dh1.resize(static_cast<std::size_t>(dims.l1));
        dh2.resize(static_cast<std::size_t>(dims.l2));
    }
};

struct RawOutput {
    double z_mu = 0.0;
    double z_sigma = 0.0;
    double mu_norm = 0.0;
    double sigma_norm = 0.0;
};

RawOutput forward_raw(const ModelParams& p, const double* x, Workspace& ws, bool sigma_frozen) {
    const auto& d = p.dims;
    for (int j = 0; j < d.l1; ++j) {
        const double* w = p.w1.data() + static_cast<std::size_t>(j) * d.n_i;
        double acc = p.b1[static_cast<std::size_t>(j)];
        for (int i = 0; i < d.n_i; ++i) acc += w[i] * x[i];
        ws.h1[static_cast<std::size_t>(j)] = acc > 0.0 ? acc : 0.0;
    }
    for (int k = 0; k < d.l2; ++k) {
        const double* w = p.w2.data() + static_cast<std::size_t>(k) * d.l1;
        double acc = p.b2[static_cast<std::size_t>(k)];
        for (int j = 0; j < d.l1; ++j) acc += w[j] * ws.h1[static_cast<std::size_t>(j)];
        ws.h2[static_cast<std::size_t>(k)] = acc > 0.0 ? acc : 0.0;
    }
    RawOutput out;
    for (int o = 0; o < 2; ++o) {
        const double* w = p.w3.data() + static_cast<std::size_t>(o) * d.l2;
        double acc = p.b3[static_cast<std::size_t>(o)];
        for (int k = 0; k < d.l2; ++k) acc += w[k] * ws.h2[static_cast<std::size_t>(k)];
        (o == 0 ? out.z_mu : out.z_sigma) = acc;
    }
    out.mu_norm = sigmoid(out.z_mu);
    out.sigma_norm = sigma_frozen
                         ? 0.5 * (p.sigma_min + p.sigma_max)
                         : p.sigma_min + sigmoid(out.z_sigma) * (p.sigma_max - p.sigma_min);
    return out;
}

double nll_of(double y, const RawOutput& out) {
    const double r = y - out.mu_norm;
    return std::log(out.sigma_norm) + r * r / (2.0 * out.sigma_norm * out.sigma_norm);
}

// Accumulates the gradient of nll_of into g. Requires ws filled by a
// preceding forward_raw on the same x.
void backward_accumulate(const ModelParams& p, const double* x, double y, const RawOutput& out,
                         Workspace& ws, bool sigma_frozen, Gradients& g) {
    const auto& d = p.dims;
    const double mu = out.mu_norm;
    const double sg = out.sigma_norm;
    const double resid = y - mu;

    const double dl_dmu = -resid / (sg * sg);
    double dz[2];
    dz[0] = dl_dmu * mu * (1.0 - mu);
    if (sigma_frozen) {
        dz[1] = 0.0;
    } else {
        const double dl_dsigma = 1.0 / sg - resid * resid / (sg * sg * sg);
        const double s = sigmoid(out.z_sigma);
        dz[1] = dl_dsigma * (p.sigma_max - p.sigma_min) * s * (1.0 - s);
    }

    for (int o = 0; o < 2; ++o) {
        g.b3[static_cast<std::size_t>(o)] += dz[o];
        double* gw = g.w3.data() + static_cast<std::size_t>(o) * d.l2;
        for (int k = 0; k < d.l2; ++k) gw[k] += dz[o] * ws.h2[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < d.l2; ++k) {
        double acc = 0.0;
        for (int o = 0; o < 2; ++o) acc += p.w3[static_cast<std::size_t>(o) * d.l2 + k] * dz[o];
        ws.dh2[static_cast<std::size_t>(k)] = ws.h2[static_cast<std::size_t>(k)] > 0.0 ? acc : 0.0;
    }
    for (int k = 0; k < d.l2; ++k) {
        const double gk = ws.dh2[static_cast<std::size_t>(k)];
        if (gk == 0.0) continue;
        g.b2[static_cast<std::size_t>(k)] += gk;
        double* gw = g.w2.data() + static_cast<std::size_t>(k) * d.l1;
        for (int j = 0; j < d.l1; ++j) gw[j] += gk * ws.h1[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < d.l1; ++j) {
        double acc = 0.0;
        for (int k = 0; k < d.l2; ++k)
            acc += p.w2[static_cast<std::size_t>(k) * d.l1 + j] * ws.dh2[static_cast<std::size_t>(k)];
        ws.dh1[static_cast<std::size_t>(j)] = ws.h1[static_cast<std::size_t>(j)] > 0.0 ? acc : 0.0;
    }
    for (int j = 0; j < d.l1; ++j) {
        const double gj = ws.dh1[static_cast<std::size_t>(j)];
        if (gj == 0.0) continue;
        g.b1[static_cast<std::size_t>(j)] += gj;
        double* gw = g.w1.data() + static_cast<std::size_t>(j) * d.n_i;
        for (int i = 0; i < d.n_i; ++i) gw[i] += gj * x[i];
    }
}

GaussianPrediction to_prediction(const ModelParams& p, const RawOutput& out) {
    GaussianPrediction pred;
    pred.mu_norm = out.mu_norm;
    pred.sigma_norm = out.sigma_norm;
    const double range = p.power_max_w - p.power_min_w;
    pred.mu_w = p.power_min_w + out.mu_norm * range;
    pred.sigma_w = out.sigma_norm * range;
    return pred;
}

Gradients batch_gradient_impl(const ModelParams& params, const Matrix& x,
                              const std::vector<double>& y, std::span<const int> indices,
                              double* loss_sum, bool sigma_frozen, bool parallel) {
    const std::size_t n = indices.size();
    const std::size_t n_chunks = (n + kGradChunk - 1) / kGradChunk;

    std::vector<Gradients> chunk_grads(n_chunks);
    std::vector<double> chunk_loss(n_chunks, 0.0);

    auto run_chunk = [&](std::size_t chunk) {
        Gradients& g = chunk_grads[chunk];
        g.resize(params.dims);
        Workspace ws;
        ws.resize(params.dims);
        double loss = 0.0;
        const std::size_t lo = chunk * kGradChunk;
        const std::size_t hi = std::min(n, lo + kGradChunk);
        for (std::size_t s = lo; s < hi; ++s) {
            const auto row = static_cast<std::size_t>(indices[s]);
            const double* xr = x.row(row);
            const RawOutput out = forward_raw(params, xr, ws, sigma_frozen);
            loss += nll_of(y[row], out);
            backward_accumulate(params, xr, y[row], out, ws, sigma_frozen, g);
        }
        chunk_loss[chunk] = loss;
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long c = 0; c < static_cast<long>(n_chunks); ++c) run_chunk(static_cast<std::size_t>(c));
    } else {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    }

    Gradients total;
    total.resize(params.dims);
    double loss = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) { // fixed-order reduction
        total.add(chunk_grads[c]);
        loss += chunk_loss[c];
    }
    if (loss_sum) *loss_sum = loss;
    return total;
}

std::vector<GaussianPrediction> predict_impl(const ModelParams& params, const Matrix& x,
                                             bool parallel) {
    std::vector<GaussianPrediction> preds(x.rows);
    if (parallel) {
#pragma omp parallel
        {
            Workspace ws;
            ws.resize(params.dims);
#pragma omp for schedule(static)
            for (long i = 0; i < static_cast<long>(x.rows); ++i) {
                const RawOutput out =
                    forward_raw(params, x.row(static_cast<std::size_t>(i)), ws, false);
                preds[static_cast<std::size_t>(i)] = to_prediction(params, out);
            }
        }
    } else {
        Workspace ws;
        ws.resize(params.dims);
        for (std::size_t i = 0; i < x.rows; ++i) {
            const RawOutput out = forward_raw(params, x.row(i), ws, false);
            preds[i] = to_prediction(params, out);
        }
    }
    return preds;
}

} // namespace

LayerDims LayerDims::scaled(int n_i, double c) {
    if (c <= 0.0) throw ArgumentError("LayerDims::scaled: c must be positive");
    return {n_i, std::max(1, static_cast<int>(std::lround(12.0 * c))),
            std::max(1, static_cast<int>(std::lround(4.0 * c)))};
}

std::size_t LayerDims::param_count() const {
    const auto ni = static_cast<std::size_t>(n_i);
    const auto a = static_cast<std::size_t>(l1);
    const auto b = static_cast<std::size_t>(l2);
    return ni * a + a + a * b + b + b * 2 + 2;
}

bool operator==(const LayerDims& a, const LayerDims& b) {
    return a.n_i == b.n_i && a.l1 == b.l1 && a.l2 == b.l2;
}

void Gradients::resize(const LayerDims& dims) {
    w1.assign(static_cast<std::size_t>(dims.n_i) * dims.l1, 0.0);
    b1.assign(static_cast<std::size_t>(dims.l1), 0.0);
    w2.assign(static_cast<std::size_t>(dims.l1) * dims.l2, 0.0);
    b2.assign(static_cast<std::size_t>(dims.l2), 0.0);
    w3.assign(static_cast<std::size_t>(dims.l2) * 2, 0.0);
    b3.assign(2, 0.0);
}

void Gradients::zero() {
    for (auto* v : {&w1, &b1, &w2, &b2, &w3, &b3}) std::fill(v->begin(), v->end(), 0.0);
}

void Gradients::add(const Gradients& other) {
    auto add_vec = [](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add_vec(w1, other.w1);
    add_vec(b1, other.b1);
    add_vec(w2, other.w2);
    add_vec(b2, other.b2);
    add_vec(w3, other.w3);
    add_vec(b3, other.b3);
}

void Gradients::scale(double factor) {
    for (auto* v : {&w1, &b1, &w2, &b2, &w3, &b3})
        for (double& x : *v) x *= factor;
}

ModelParams init_params(const LayerDims& dims, std::uint64_t seed) {
    if (dims.n_i < 1 || dims.l1 < 1 || dims.l2 < 1)
        throw ArgumentError("init_params: layer widths must be >= 1");

    ModelParams p;
    p.dims = dims;
    p.init_seed = seed;
    Rng rng(sub_seed(seed, {kInitStream}));

    auto glorot = [&rng](std::vector<double>& w, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        w.resize(static_cast<std::size_t>(fan_in) * fan_out);
        for (double& v : w) v = rng.uniform(-limit, limit);
    };
    glorot(p.w1, dims.n_i, dims.l1);
    p.b1.assign(static_cast<std::size_t>(dims.l1), 0.0);
    glorot(p.w2, dims.l1, dims.l2);
    p.b2.assign(static_cast<std::size_t>(dims.l2), 0.0);
    glorot(p.w3, dims.l2, 2);
    p.b3.assign(2, 0.0);
    return p;
}

GaussianPrediction forward(const ModelParams& params, std::span<const double> x) {
    if (static_cast<int>(x.size()) != params.dims.n_i)
        throw ArgumentError("forward: input width " + std::to_string(x.size()) + " != n_i " +
                            std::to_string(params.dims.n_i));
    Workspace ws;
    ws.resize(params.dims);
    return to_prediction(params, forward_raw(params, x.data(), ws, false));
}

double nll_loss(double y_bar_norm, const GaussianPrediction& pred) {
    const double r = y_bar_norm - pred.mu_norm;
    return std::log(pred.sigma_norm) + r * r / (2.0 * pred.sigma_norm * pred.sigma_norm);
}

Gradients backward(const ModelParams& params, std::span<const double> x, double y_bar_norm) {
    if (static_cast<int>(x.size()) != params.dims.n_i)
        throw ArgumentError("backward: input width mismatch");
    Workspace ws;
    ws.resize(params.dims);
    Gradients g;
    g.resize(params.dims);
    const RawOutput out = forward_raw(params, x.data(), ws, false);
    backward_accumulate(params, x.data(), y_bar_norm, out, ws, false, g);
    return g;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, int t,
               const TrainConfig& config) {
    if (t < 1) throw ArgumentError("adam_step: t must be >= 1");
    if (state.m.size() != params.dims.param_count()) state.resize(params.dims.param_count());

    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);
    std::size_t off = 0;
    auto update = [&](std::vector<double>& p, const std::vector<double>& g) {
        for (std::size_t i = 0; i < p.size(); ++i, ++off) {
            const double gi = g[i];
            state.m[off] = config.beta1 * state.m[off] + (1.0 - config.beta1) * gi;
            state.v[off] = config.beta2 * state.v[off] + (1.0 - config.beta2) * gi * gi;
            const double m_hat = state.m[off] / bc1;
            const double v_hat = state.v[off] / bc2;
            p[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
        }
    };
    update(params.w1, grads.w1);
    update(params.b1, grads.b1);
    update(params.w2, grads.w2);
    update(params.b2, grads.b2);
    update(params.w3, grads.w3);
    update(params.b3, grads.b3);
}

std::vector<double*> param_view(ModelParams& params) {
    std::vector<double*> view;
    view.reserve(params.dims.param_count());
    for (auto* v : {&params.w1, &params.b1, &params.w2, &params.b2, &params.w3, &params.b3})
        for (double& x : *v) view.push_back(&x);
    return view;
}

std::vector<double*> grad_view(Gradients& grads) {
    std::vector<double*> view;
    for (auto* v : {&grads.w1, &grads.b1, &grads.w2, &grads.b2, &grads.w3, &grads.b3})
        for (double& x : *v) view.push_back(&x);
    return view;
}

Gradients batch_gradient(const ModelParams& params, const Matrix& x, const std::vector<double>& y,
                         std::span<const int> indices, double* loss_sum) {
    return batch_gradient_impl(params, x, y, indices, loss_sum, false, true);
}

Gradients batch_gradient_serial(const ModelParams& params, const Matrix& x,
                                const std::vector<double>& y, std::span<const int> indices,
                                double* loss_sum) {
    return batch_gradient_impl(params, x, y, indices, loss_sum, false, false);
}

std::vector<GaussianPrediction> predict_batch(const ModelParams& params, const Matrix& x) {
    return predict_impl(params, x, true);
}

std::vector<GaussianPrediction> predict_batch_serial(const ModelParams& params, const Matrix& x) {
    return predict_impl(params, x, false);
}

double mean_nll(const ModelParams& params, const Matrix& x, const std::vector<double>& y) {
    if (x.rows == 0) throw ArgumentError("mean_nll: empty data");
    std::vector<double> losses(x.rows, 0.0);
#pragma omp parallel
    {
        Workspace ws;
        ws.resize(params.dims);
#pragma omp for schedule(static)
        for (long i = 0; i < static_cast<long>(x.rows); ++i) {
            const RawOutput out = forward_raw(params, x.row(static_cast<std::size_t>(i)), ws, false);
            losses[static_cast<std::size_t>(i)] = nll_of(y[static_cast<std::size_t>(i)], out);
        }
    }
    double sum = 0.0; // fixed-order reduction
    for (double l : losses) sum += l;
    return sum / static_cast<double>(x.rows);
}

std::pair<ModelParams, TrainReport> train(const Matrix& x_train, const std::vector<double>& y_train,
                                          const Matrix& x_val, const std::vector<double>& y_val,
                                          const LayerDims& dims, const TrainConfig& config) {
    if (x_train.rows == 0 || x_val.rows == 0) throw ArgumentError("train: empty train or val set");
    if (x_train.cols != static_cast<std::size_t>(dims.n_i))
        throw ArgumentError("train: matrix width != dims.n_i");
    if (y_train.size() != x_train.rows || y_val.size() != x_val.rows)
        throw ArgumentError("train: target length mismatch");
    if (config.batch_size < 1 || config.patience < 1 || config.learning_rate <= 0.0)
        throw ArgumentError("train: invalid config");

    const auto t_start = std::chrono::steady_clock::now();

    ModelParams params = init_params(dims, config.seed);
    AdamState adam;
    adam.resize(dims.param_count());

    std::vector<int> indices(x_train.rows);
    std::iota(indices.begin(), indices.end(), 0);
    Rng shuffle_rng(sub_seed(config.seed, {kShuffleStream}));

    const int warmup_epochs = config.sigma_warmup ? std::max(1, config.max_epochs / 10) : 0;

    EarlyStopper stopper(config.patience);
    ModelParams best = params;
    TrainReport report;
    int t = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(indices);
        const bool frozen = epoch <= warmup_epochs;

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        int batch_index = 0;
        for (std::size_t off = 0; off < indices.size(); off += config.batch_size, ++batch_index) {
            const std::size_t len = std::min<std::size_t>(config.batch_size, indices.size() - off);
            const std::span<const int> idx(indices.data() + off, len);
            double loss_sum = 0.0;
            Gradients grads = batch_gradient_impl(params, x_train, y_train, idx, &loss_sum, frozen, true);
            if (!std::isfinite(loss_sum))
                throw NumericError("non-finite training loss", epoch, batch_index);
            grads.scale(1.0 / static_cast<double>(len));
            adam_step(params, grads, adam, ++t, config);
            epoch_loss += loss_sum;
            seen += len;
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(seen));

        const double val = mean_nll(params, x_val, y_val);
        if (!std::isfinite(val)) throw NumericError("non-finite validation loss", epoch, -1);
        report.val_loss.push_back(val);

        if (stopper.observe(epoch, val)) best = params;
        report.stopped_epoch = epoch;
        if (stopper.should_stop()) break;
    }

    report.best_val_loss = stopper.best();
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(best), std::move(report)};
}

std::pair<ModelParams, TrainReport> train_model(const Dataset& train_ds, const Dataset& val_ds,
                                                const EncoderSpec& encoder, const LayerDims& dims,
                                                const TrainConfig& config) {
    const Matrix x_train = encode_batch(train_ds.rows, encoder);
    const Matrix x_val = encode_batch(val_ds.rows, encoder);
    std::vector<double> y_train(train_ds.rows.size());
    std::vector<double> y_val(val_ds.rows.size());
    for (std::size_t i = 0; i < y_train.size(); ++i)
        y_train[i] = encode_target(train_ds.rows[i].power_w, encoder.norm);
    for (std::size_t i = 0; i < y_val.size(); ++i)
        y_val[i] = encode_target(val_ds.rows[i].power_w, encoder.norm);

    auto [params, report] = train(x_train, y_train, x_val, y_val, dims, config);
    params.encoder = encoder;
    params.power_min_w = encoder.norm.power_min_w;
    params.power_max_w = encoder.norm.power_max_w;
    return {std::move(params), std::move(report)};
}

namespace {

using nlohmann::json;

constexpr int kModelVersion = 1;
constexpr const char* kModelFormat = "aaupower-model";

json stat_to_json(const FeatureStat& s) {
    return json{{"min", s.min}, {"max", s.max}, {"constant", s.constant}};
}

FeatureStat stat_from_json(const json& j) {
    return {j.at("min").get<double>(), j.at("max").get<double>(), j.at("constant").get<bool>()};
}

} // namespace

void save_model(const ModelParams& params, const std::string& path) {
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["dims"] = {{"n_i", params.dims.n_i}, {"l1", params.dims.l1}, {"l2", params.dims.l2}};
    j["hidden_activation"] = params.hidden_activation;
    j["sigma_min"] = params.sigma_min;
    j["sigma_max"] = params.sigma_max;
    j["power_min_w"] = params.power_min_w;
    j["power_max_w"] = params.power_max_w;
    j["init_seed"] = params.init_seed;

    const NormStats& n = params.encoder.norm;
    j["encoder"] = {{"type_registry", params.encoder.type_registry},
                    {"tx_mode_registry", params.encoder.tx_mode_registry},
                    {"c_max", params.encoder.c_max},
                    {"norm",
                     {{"num_trx", stat_to_json(n.num_trx)},
                      {"freq_mhz", stat_to_json(n.freq_mhz)},
                      {"bw_mhz", stat_to_json(n.bw_mhz)},
                      {"p_max_w", stat_to_json(n.p_max_w)},
                      {"load", stat_to_json(n.load)},
                      {"d_cs", stat_to_json(n.d_cs)},
                      {"d_chs", stat_to_json(n.d_chs)},
                      {"d_ss", stat_to_json(n.d_ss)},
                      {"d_dd", stat_to_json(n.d_dd)},
                      {"power_min_w", n.power_min_w},
                      {"power_max_w", n.power_max_w},
                      {"headroom", n.headroom}}}};

    j["w1"] = params.w1;
    j["b1"] = params.b1;
    j["w2"] = params.w2;
    j["b2"] = params.b2;
    j["w3"] = params.w3;
    j["b3"] = params.b3;

    std::ofstream out(path);
    if (!out) throw ModelIoError("cannot open '" + path + "' for writing");
    out << j.dump() << '\n';
    if (!out) throw ModelIoError("write failed for '" + path + "'");
}

ModelParams load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelIoError("cannot open '" + path + "' for reading");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ModelIoError("corrupt model file '" + path + "': " + e.what());
    }

    try {
        if (j.at("format").get<std::string>() != kModelFormat)
            throw ModelIoError("'" + path + "' is not a model file");
        if (j.at("version").get<int>() != kModelVersion)
            throw ModelIoError("unsupported model version " + j.at("version").dump() + " in '" +
                               path + "'");

        ModelParams p;
        p.dims = {j.at("dims").at("n_i").get<int>(), j.at("dims").at("l1").get<int>(),
                  j.at("dims").at("l2").get<int>()};
        p.hidden_activation = j.at("hidden_activation").get<std::string>();
        p.sigma_min = j.at("sigma_min").get<double>();
        p.sigma_max = j.at("sigma_max").get<double>();
        p.power_min_w = j.at("power_min_w").get<double>();
        p.power_max_w = j.at("power_max_w").get<double>();
        p.init_seed = j.at("init_seed").get<std::uint64_t>();

        const json& je = j.at("encoder");
        p.encoder.type_registry = je.at("type_registry").get<std::vector<std::string>>();
        p.encoder.tx_mode_registry = je.at("tx_mode_registry").get<std::vector<std::string>>();
        p.encoder.c_max = je.at("c_max").get<int>();
        const json& jn = je.at("norm");
        NormStats& n = p.encoder.norm;
        n.num_trx = stat_from_json(jn.at("num_trx"));
        n.freq_mhz = stat_from_json(jn.at("freq_mhz"));
        n.bw_mhz = stat_from_json(jn.at("bw_mhz"));
        n.p_max_w = stat_from_json(jn.at("p_max_w"));
        n.load = stat_from_json(jn.at("load"));
        n.d_cs = stat_from_json(jn.at("d_cs"));
        n.d_chs = stat_from_json(jn.at("d_chs"));
        n.d_ss = stat_from_json(jn.at("d_ss"));
        n.d_dd = stat_from_json(jn.at("d_dd"));
        n.power_min_w = jn.at("power_min_w").get<double>();
        n.power_max_w = jn.at("power_max_w").get<double>();
        n.headroom = jn.at("headroom").get<double>();

        p.w1 = j.at("w1").get<std::vector<double>>();
        p.b1 = j.at("b1").get<std::vector<double>>();
        p.w2 = j.at("w2").get<std::vector<double>>();
        p.b2 = j.at("b2").get<std::vector<double>>();
        p.w3 = j.at("w3").get<std::vector<double>>();
        p.b3 = j.at("b3").get<std::vector<double>>();

        const auto& d = p.dims;
        if (p.w1.size() != static_cast<std::size_t>(d.n_i) * d.l1 ||
            p.b1.size() != static_cast<std::size_t>(d.l1) ||
            p.w2.size() != static_cast<std::size_t>(d.l1) * d.l2 ||
            p.b2.size() != static_cast<std::size_t>(d.l2) ||
            p.w3.size() != static_cast<std::size_t>(d.l2) * 2 || p.b3.size() != 2)
            throw ModelIoError("weight shapes inconsistent with dims in '" + path + "'");
        if (p.sigma_min <= 0.0) throw ModelIoError("sigma_min must be positive in '" + path + "'");
        return p;
    } catch (const json::exception& e) {
        throw ModelIoError("malformed model file '" + path + "': " + e.what());
    }
}

} // namespace aau
