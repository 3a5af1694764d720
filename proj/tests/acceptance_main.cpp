// Acceptance suite: runs every acceptance criterion end to end and prints
// one PASS/FAIL line per criterion. The first argument is the path to the
// locagen CLI binary (used by the determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "locagen/dataset.hpp"
#include "locagen/locate.hpp"
#include "locagen/models.hpp"
#include "locagen/rng.hpp"
#include "locagen/simulate.hpp"
#include "locagen/stats.hpp"

using namespace locagen;
namespace fs = std::filesystem;
using steady = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail,
            steady::time_point t0) {
    const auto secs =
        std::chrono::duration_cast<std::chrono::milliseconds>(steady::now() - t0).count() /
        1000.0;
    std::printf("C%02d %s  %-38s %s  [%.1fs]\n", id, pass ? "PASS" : "FAIL", name.c_str(),
                detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

int thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

// ---- shared experiment state ------------------------------------------

struct TrainedSet {
    data::SplitDataset split;
    ml::TrainedModel rf;
    ml::TrainedModel mlp;
    std::vector<double> truth;
    std::vector<double> rf_pred;
    std::vector<double> mlp_pred;
    std::vector<double> baseline_pred;
};

TrainedSet build_at_rate(double fs, bool with_rf) {
    sim::SimConfig cfg;
    cfg.geometry = ArrayGeometry::equilateral(0.1);
    cfg.sampling.sample_rate = fs;
    cfg.master_seed = 20240601;

    const auto batch = sim::run_batch(cfg, 24000, 100.0, thread_count());
    std::vector<data::LabeledSample> samples;
    samples.reserve(batch.size());
    for (const auto& obs : batch) samples.push_back(data::to_labeled(obs));

    TrainedSet out;
    out.split = data::split(samples, 0.8, 1337);

    if (with_rf) {
        ml::RfParams rfp;
        rfp.seed = 11;
        rfp.n_threads = thread_count();
        out.rf = ml::train_rf(out.split.train, rfp);
    }
    ml::MlpParams mp;
    mp.seed = 11;
    out.mlp = ml::train_mlp(out.split.train, mp);

    for (const auto& s : out.split.validation) {
        out.truth.push_back(s.azimuth_deg);
        if (with_rf) out.rf_pred.push_back(ml::predict_rf(out.rf, s.features).angle_deg);
        out.mlp_pred.push_back(ml::predict_mlp(out.mlp, s.features));
        const TdoaPair tdoa = TdoaPair::from_taus(s.features[0], s.features[1]);
        out.baseline_pred.push_back(
            loc::localize_pipeline(tdoa, cfg.geometry, cfg.medium).azimuth_deg);
    }
    return out;
}

// ---- criteria -----------------------------------------------------------

void criterion_1_quantization_floor() {
    const auto t0 = steady::now();
    const double floor_m = quantization_floor(343.0, 48000.0);
    const bool pass = floor_m >= 7.14e-3 && floor_m <= 7.15e-3;
    report(1, pass, "quantization floor 343/48000", fmt("%.4f mm", floor_m * 1e3), t0);
}

void criterion_2_azimuth_clustering() {
    const auto t0 = steady::now();
    sim::SimConfig cfg;
    cfg.geometry = ArrayGeometry::equilateral(0.1);
    cfg.sampling.sample_rate = 10000.0;
    cfg.master_seed = 424242;
    const auto batch = sim::run_batch(cfg, 10000, 100.0, thread_count());
    int near30 = 0;
    for (const auto& obs : batch) {
        const auto est = loc::localize_pipeline(obs.estimated, cfg.geometry, cfg.medium);
        double nearest = std::round(est.azimuth_deg / 30.0) * 30.0;
        if (circular_distance_deg(est.azimuth_deg, nearest) <= 5.0) ++near30;
    }
    const double frac = static_cast<double>(near30) / static_cast<double>(batch.size());
    report(2, frac >= 0.95, "baseline azimuths cluster at 30 deg",
           fmt("fraction within 5 deg of a multiple = %.3f (need >= 0.95)", frac), t0);
}

void criterion_3_4_6_models_at_10k(const TrainedSet& set10) {
    {
        const auto t0 = steady::now();
        const double mae = ml::circular_mae(set10.rf_pred, set10.truth);
        report(3, mae <= 16.0, "RF validation MAE at 10 kHz", fmt("%.2f deg (need <= 16)", mae),
               t0);
    }
    {
        const auto t0 = steady::now();
        const double mae = ml::circular_mae(set10.mlp_pred, set10.truth);
        report(4, mae <= 16.0, "MLP validation MAE at 10 kHz", fmt("%.2f deg (need <= 16)", mae),
               t0);
    }
    {
        const auto t0 = steady::now();
        const double base = ml::circular_mae(set10.baseline_pred, set10.truth);
        const double best_model = std::min(ml::circular_mae(set10.rf_pred, set10.truth),
                                           ml::circular_mae(set10.mlp_pred, set10.truth));
        report(6, best_model <= 0.5 * base, "model halves the baseline MAE",
               fmt("model %.2f vs baseline %.2f deg (ratio %.3f, need <= 0.5)", best_model, base,
                   best_model / base),
               t0);
    }
}

void criterion_5_mlp_at_48k() {
    const auto t0 = steady::now();
    const TrainedSet set48 = build_at_rate(48000.0, false);
    const double mae = ml::circular_mae(set48.mlp_pred, set48.truth);
    report(5, mae <= 6.0, "MLP validation MAE at 48 kHz", fmt("%.2f deg (need <= 6)", mae), t0);
}

void criterion_7_offset_anova() {
    const auto t0 = steady::now();
    sim::SimConfig cfg;
    cfg.geometry = ArrayGeometry::equilateral(0.1);
    cfg.sampling.sample_rate = 10000.0;
    cfg.master_seed = 0;
    const auto table =
        sim::run_offset_experiment(cfg, 10000, {0.0, 0.25, 0.5, 0.75}, 100.0, thread_count());
    const auto [a2, a3] = stats::offset_anova(table);
    const bool pass = a2.p_value > 0.05 && a3.p_value > 0.05;
    report(7, pass, "offset experiment ANOVA",
           fmt("p2 = %.3f, p3 = %.3f (need both > 0.05)", a2.p_value, a3.p_value), t0);
}

void criterion_8_gcc_phat_oracle() {
    const auto t0 = steady::now();
    Rng rng(2025);
    int total = 0, agree = 0, clean_total = 0, clean_agree = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = 256 + rng.uniform_index(2048 - 256);
        const int shift = static_cast<int>(rng.uniform_index(65)) - 32;
        const bool noisy = trial % 2 == 1;

        dsp::Waveform a;
        a.sample_rate = 8000.0;
        a.samples.resize(len);
        for (auto& s : a.samples) s = rng.normal();
        dsp::Waveform b;
        b.sample_rate = 8000.0;
        b.samples.assign(len, 0.0);
        for (std::size_t i = 0; i < len; ++i) {
            const long long j = static_cast<long long>(i) - shift;
            if (j >= 0 && j < static_cast<long long>(len))
                b.samples[i] = a.samples[static_cast<std::size_t>(j)];
        }
        if (noisy)
            for (auto& s : b.samples) s += 0.3 * rng.normal();

        const int est = dsp::gcc_phat(a, b, 32, dsp::Interp::none).peak_lag;

        // brute-force time-domain normalized cross-correlation
        int best_lag = -32;
        double best = -1e300;
        for (int lag = -32; lag <= 32; ++lag) {
            double num = 0.0, ea = 0.0, eb = 0.0;
            for (std::size_t n = 0; n < len; ++n) {
                const long long mm = static_cast<long long>(n) + lag;
                if (mm < 0 || mm >= static_cast<long long>(len)) continue;
                num += a.samples[n] * b.samples[static_cast<std::size_t>(mm)];
                ea += a.samples[n] * a.samples[n];
                eb += b.samples[static_cast<std::size_t>(mm)] * b.samples[static_cast<std::size_t>(mm)];
            }
            const double denom = std::sqrt(ea * eb);
            const double v = denom > 0.0 ? num / denom : 0.0;
            if (v > best) {
                best = v;
                best_lag = lag;
            }
        }

        ++total;
        if (est == best_lag) ++agree;
        if (!noisy) {
            ++clean_total;
            if (est == best_lag) ++clean_agree;
        }
    }
    const double frac = static_cast<double>(agree) / total;
    const bool pass = frac >= 0.99 && clean_agree == clean_total;
    report(8, pass, "GCC-PHAT vs brute-force oracle",
           fmt("agreement %.1f%%, noise-free %d/%d", 100.0 * frac, clean_agree, clean_total), t0);
}

void criterion_9_multilateration() {
    const auto t0 = steady::now();
    const auto g = ArrayGeometry::equilateral(0.1);
    const Medium medium{343.0};

    int ok = 0;
    Rng rng(31415);
    for (int i = 0; i < 1000; ++i) {
        const double r = rng.uniform(2.0, 100.0);
        const double az = rng.uniform(0.0, 360.0);
        const SourcePosition src{r * std::cos(deg_to_rad(az)), r * std::sin(deg_to_rad(az))};
        const auto toa = true_toa(g, medium, src);
        loc::MultilaterationProblem p;
        p.geometry = g;
        p.medium = medium;
        p.tdoa = TdoaPair::from_taus(toa[1] - toa[0], toa[2] - toa[0]);
        const auto est = loc::multilaterate(p);
        if (circular_distance_deg(est.azimuth_deg, az) < 0.5) ++ok;
    }

    // gradient vs long-double central differences
    auto oracle = [](const loc::MultilaterationProblem& p, long double x, long double y) {
        auto dist = [&](int i) {
            const long double dx = x - static_cast<long double>(p.geometry.mics[i].x);
            const long double dy = y - static_cast<long double>(p.geometry.mics[i].y);
            return sqrtl(dx * dx + dy * dy);
        };
        const long double c = p.medium.speed_of_sound;
        const long double g2 = dist(1) - dist(0) - c * static_cast<long double>(p.tdoa.tau21);
        const long double g3 = dist(2) - dist(0) - c * static_cast<long double>(p.tdoa.tau31);
        return g2 * g2 + g3 * g3;
    };
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
        loc::MultilaterationProblem p;
        p.geometry = g;
        p.medium = medium;
        p.tdoa = TdoaPair::from_taus(rng.uniform(-3e-4, 3e-4), rng.uniform(-3e-4, 3e-4));
        const double x = rng.uniform(-80.0, 80.0);
        const double y = rng.uniform(-80.0, 80.0);
        if (std::hypot(x, y) < 1.0) continue;
        const auto eval = loc::objective_with_gradient(p, x, y);
        const long double h = 1e-6L * std::max(1.0, std::hypot(x, y));
        const double fx = static_cast<double>((oracle(p, x + h, y) - oracle(p, x - h, y)) /
                                              (2.0L * h));
        const double fy = static_cast<double>((oracle(p, x, y + h) - oracle(p, x, y - h)) /
                                              (2.0L * h));
        const double scale = std::max({std::fabs(fx), std::fabs(fy), 1e-12});
        worst = std::max(worst, std::fabs(eval.grad_x - fx) / scale);
        worst = std::max(worst, std::fabs(eval.grad_y - fy) / scale);
    }

    const bool pass = ok == 1000 && worst < 1e-6;
    report(9, pass, "multilateration correctness",
           fmt("azimuth<0.5deg in %d/1000, grad dev %.1e (need <1e-6)", ok, worst), t0);
}

void criterion_10_mlp_gradient() {
    const auto t0 = steady::now();
    Rng rng(77);
    std::vector<data::LabeledSample> five(5);
    for (auto& s : five) {
        const double az = rng.uniform(0.0, 360.0);
        s.azimuth_deg = az;
        s.features = {rng.normal(0, 1e-4), rng.normal(0, 1e-4), rng.normal()};
        s.bin12 = data::bin12_of(az);
        s.bin24 = data::bin24_of(az);
    }
    ml::MlpParams params;
    params.epochs = 0;
    params.batch_size = 5;
    params.seed = 5;
    auto model = ml::train_mlp(five, params);

    std::vector<std::array<double, 3>> inputs;
    std::vector<std::array<double, 2>> targets;
    for (const auto& s : five) {
        inputs.push_back(model.scaler.transform(s.features));
        const double rad = deg_to_rad(s.azimuth_deg);
        targets.push_back({std::sin(rad), std::cos(rad)});
    }

    auto& net = model.mlp;
    const auto grads = ml::mlp_loss_and_gradients(net, inputs, targets);
    double worst = 0.0;
    const double h = 1e-6;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (std::size_t k = 0; k < net.weights[l].size(); ++k) {
            const double save = net.weights[l][k];
            net.weights[l][k] = save + h;
            const double fp = ml::mlp_loss_and_gradients(net, inputs, targets).loss;
            net.weights[l][k] = save - h;
            const double fm = ml::mlp_loss_and_gradients(net, inputs, targets).loss;
            net.weights[l][k] = save;
            const double fd = (fp - fm) / (2.0 * h);
            const double scale = std::max({std::fabs(fd), std::fabs(grads.weight_grads[l][k]),
                                           1e-8});
            worst = std::max(worst, std::fabs(grads.weight_grads[l][k] - fd) / scale);
        }
        for (std::size_t k = 0; k < net.biases[l].size(); ++k) {
            const double save = net.biases[l][k];
            net.biases[l][k] = save + h;
            const double fp = ml::mlp_loss_and_gradients(net, inputs, targets).loss;
            net.biases[l][k] = save - h;
            const double fm = ml::mlp_loss_and_gradients(net, inputs, targets).loss;
            net.biases[l][k] = save;
            const double fd = (fp - fm) / (2.0 * h);
            const double scale = std::max({std::fabs(fd), std::fabs(grads.bias_grads[l][k]),
                                           1e-8});
            worst = std::max(worst, std::fabs(grads.bias_grads[l][k] - fd) / scale);
        }
    }
    report(10, worst < 1e-4, "MLP analytic gradient check",
           fmt("max relative deviation %.2e (need < 1e-4)", worst), t0);
}

// ---- determinism of the CLI ---------------------------------------------

bool same_bytes(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    const std::string da((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string db((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    return !da.empty() && da == db;
}

void criterion_11_cli_determinism(const std::string& cli) {
    const auto t0 = steady::now();
    if (cli.empty()) {
        report(11, false, "CLI determinism", "no CLI path supplied", t0);
        return;
    }
    const fs::path dir = "acceptance_tmp";
    fs::remove_all(dir);
    fs::create_directories(dir);

    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >> " + (dir / "cli.log").string() + " 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    auto p = [&](const char* name) { return (dir / name).string(); };

    bool ok = true;
    std::string why = "all byte-identical";

    struct Step {
        const char* what;
        std::string args_template;  // %1 and %2 replaced by run-specific paths
        const char* out1;
        const char* out2;
    };

    // simulate
    ok = ok && run("simulate -n 2000 --fs 10000 --seed 5 -o " + p("sim1.csv"));
    ok = ok && run("simulate -n 2000 --fs 10000 --seed 5 -o " + p("sim2.csv"));
    if (ok && !same_bytes(p("sim1.csv"), p("sim2.csv"))) { ok = false; why = "simulate differs"; }

    // train rf
    ok = ok && run("train --data " + p("sim1.csv") + " --kind rf --trees 20 --seed 3 -o " + p("rf1.model"));
    ok = ok && run("train --data " + p("sim1.csv") + " --kind rf --trees 20 --seed 3 -o " + p("rf2.model"));
    if (ok && !same_bytes(p("rf1.model"), p("rf2.model"))) { ok = false; why = "train rf differs"; }

    // train mlp (small run)
    ok = ok && run("train --data " + p("sim1.csv") + " --kind mlp --epochs 20 --seed 3 -o " + p("mlp1.model"));
    ok = ok && run("train --data " + p("sim1.csv") + " --kind mlp --epochs 20 --seed 3 -o " + p("mlp2.model"));
    if (ok && !same_bytes(p("mlp1.model"), p("mlp2.model"))) { ok = false; why = "train mlp differs"; }

    // eval
    ok = ok && run("eval --model " + p("rf1.model") + " --data " + p("sim1.csv") +
                   " --report-prefix " + p("ev1"));
    ok = ok && run("eval --model " + p("rf1.model") + " --data " + p("sim1.csv") +
                   " --report-prefix " + p("ev2"));
    if (ok && (!same_bytes(p("ev1_report.txt"), p("ev2_report.txt")) ||
               !same_bytes(p("ev1_histogram.csv"), p("ev2_histogram.csv")) ||
               !same_bytes(p("ev1_cdf_model.csv"), p("ev2_cdf_model.csv")))) {
        ok = false;
        why = "eval differs";
    }

    // synth + locate
    ok = ok && run("synth --source-x 20 --source-y 30 --fs 48000 --seed 4 -o " + p("cap1.wav"));
    ok = ok && run("synth --source-x 20 --source-y 30 --fs 48000 --seed 4 -o " + p("cap2.wav"));
    if (ok && !same_bytes(p("cap1.wav"), p("cap2.wav"))) { ok = false; why = "synth differs"; }
    ok = ok && run("locate --audio " + p("cap1.wav") + " -o " + p("loc1.txt"));
    ok = ok && run("locate --audio " + p("cap1.wav") + " -o " + p("loc2.txt"));
    if (ok && !same_bytes(p("loc1.txt"), p("loc2.txt"))) { ok = false; why = "locate differs"; }

    // offsets (threaded on purpose: output must be schedule independent)
    ok = ok && run("offsets -n 1000 --seed 6 --threads 4 -o " + p("off1.csv") + " --report " + p("offr1.txt"));
    ok = ok && run("offsets -n 1000 --seed 6 --threads 1 -o " + p("off2.csv") + " --report " + p("offr2.txt"));
    if (ok && (!same_bytes(p("off1.csv"), p("off2.csv")) ||
               !same_bytes(p("offr1.txt"), p("offr2.txt")))) {
        ok = false;
        why = "offsets differ";
    }

    if (!ok && why == "all byte-identical") why = "a subcommand exited nonzero (see cli.log)";
    report(11, ok, "CLI determinism (byte-identical)", why, t0);
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    std::printf("acceptance suite, %d worker threads\n", thread_count());

    criterion_1_quantization_floor();
    criterion_2_azimuth_clustering();

    const auto t_models = steady::now();
    const TrainedSet set10 = build_at_rate(10000.0, true);
    std::printf("-- shared 10 kHz dataset + models built in %.1fs\n",
                std::chrono::duration_cast<std::chrono::milliseconds>(steady::now() - t_models)
                        .count() /
                    1000.0);
    criterion_3_4_6_models_at_10k(set10);
    criterion_5_mlp_at_48k();
    criterion_7_offset_anova();
    criterion_8_gcc_phat_oracle();
    criterion_9_multilateration();
    criterion_10_mlp_gradient();
    criterion_11_cli_determinism(cli);

    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
