// Compares the OpenMP kernels against their serial reference implementations
// and checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "aaupower/explain.hpp"
#include "aaupower/features.hpp"
#include "aaupower/nn.hpp"
#include "aaupower/teacher.hpp"

using namespace aau;

namespace {

double time_of(const std::function<void()>& fn, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, dt);
    }
    return best;
}

void report(const std::string& name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-22s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   identical %s\n",
                name.c_str(), serial_s * 1e3, parallel_s * 1e3, serial_s / parallel_s,
                identical ? "yes" : "NO");
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both paths run serially\n");
#endif

    const Fleet fleet = sample_fleet(5, 40, 6, 7);
    Dataset serial_ds, parallel_ds;
    const double t_gen_serial = time_of([&] { serial_ds = generate_dataset_serial(fleet, 4, 7); }, 3);
    const double t_gen_parallel = time_of([&] { parallel_ds = generate_dataset(fleet, 4, 7); }, 3);
    report("generate_dataset", t_gen_serial, t_gen_parallel, serial_ds.rows == parallel_ds.rows);

    const EncoderSpec encoder = fit_encoder(serial_ds, fleet.c_max);
    Matrix x_serial, x_parallel;
    const double t_enc_serial =
        time_of([&] { x_serial = encode_batch_serial(serial_ds.rows, encoder); }, 3);
    const double t_enc_parallel = time_of([&] { x_parallel = encode_batch(serial_ds.rows, encoder); }, 3);
    report("encode_batch", t_enc_serial, t_enc_parallel, x_serial.data == x_parallel.data);

    ModelParams params = init_params(LayerDims::paper(encoder.input_width()), 7);
    params.encoder = encoder;
    params.power_min_w = encoder.norm.power_min_w;
    params.power_max_w = encoder.norm.power_max_w;

    std::vector<GaussianPrediction> p_serial, p_parallel;
    const double t_pred_serial = time_of([&] { p_serial = predict_batch_serial(params, x_serial); }, 3);
    const double t_pred_parallel = time_of([&] { p_parallel = predict_batch(params, x_serial); }, 3);
    bool preds_equal = p_serial.size() == p_parallel.size();
    for (std::size_t i = 0; preds_equal && i < p_serial.size(); ++i)
        preds_equal = p_serial[i].mu_w == p_parallel[i].mu_w &&
                      p_serial[i].sigma_w == p_parallel[i].sigma_w;
    report("predict_batch", t_pred_serial, t_pred_parallel, preds_equal);

    std::vector<double> y(x_serial.rows);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = encode_target(serial_ds.rows[i].power_w, encoder.norm);
    std::vector<int> idx(x_serial.rows);
    std::iota(idx.begin(), idx.end(), 0);
    Gradients g_serial, g_parallel;
    double loss_serial = 0.0, loss_parallel = 0.0;
    const double t_grad_serial =
        time_of([&] { g_serial = batch_gradient_serial(params, x_serial, y, idx, &loss_serial); }, 3);
    const double t_grad_parallel =
        time_of([&] { g_parallel = batch_gradient(params, x_serial, y, idx, &loss_parallel); }, 3);
    const bool grads_equal = g_serial.w1 == g_parallel.w1 && g_serial.b1 == g_parallel.b1 &&
                             g_serial.w2 == g_parallel.w2 && g_serial.b2 == g_parallel.b2 &&
                             g_serial.w3 == g_parallel.w3 && g_serial.b3 == g_parallel.b3 &&
                             loss_serial == loss_parallel;
    report("batch_gradient", t_grad_serial, t_grad_parallel, grads_equal);

    Matrix background(64, x_serial.cols);
    for (std::size_t i = 0; i < background.rows; ++i)
        std::copy(x_serial.row(i), x_serial.row(i) + x_serial.cols, background.row(i));
    const auto groups = table_feature_groups(encoder);
    const PredictFn f = mu_w_predictor(params);
    const std::span<const double> instance(x_serial.row(background.rows), x_serial.cols);
    Attribution a_serial, a_parallel;
    const double t_shap_serial = time_of(
        [&] { a_serial = shapley_monte_carlo_serial(f, instance, background, groups, 400, 7); }, 3);
    const double t_shap_parallel =
        time_of([&] { a_parallel = shapley_monte_carlo(f, instance, background, groups, 400, 7); }, 3);
    report("shapley_monte_carlo", t_shap_serial, t_shap_parallel, a_serial.phi == a_parallel.phi);

    return 0;
}
