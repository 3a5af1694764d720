// locagen command-line tool: simulate datasets, train/evaluate correctors,
// run the sampling-offset experiment and localize 3-channel recordings.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "locagen/dataset.hpp"
#include "locagen/dsp.hpp"
#include "locagen/geometry.hpp"
#include "locagen/locate.hpp"
#include "locagen/models.hpp"
#include "locagen/simulate.hpp"
#include "locagen/stats.hpp"
#include "locagen/wav.hpp"

using namespace locagen;

namespace {

struct GeometryFlags {
    double spacing = 0.1;        // m
    double speed = 343.0;        // m/s
    std::optional<double> temperature;  // C, overrides speed when given
    double tolerance = 0.0;      // m

    Medium medium() const {
        return temperature ? Medium::from_temperature(*temperature) : Medium{speed};
    }
};

void add_geometry_flags(CLI::App* cmd, GeometryFlags& g) {
    cmd->add_option("--spacing", g.spacing, "Microphone spacing d in meters")
        ->capture_default_str();
    cmd->add_option("--speed-of-sound", g.speed, "Speed of sound in m/s")
        ->capture_default_str();
    cmd->add_option("--temperature", g.temperature,
                    "Air temperature in Celsius; derives the speed of sound");
    cmd->add_option("--tolerance", g.tolerance, "Placement tolerance in meters")
        ->capture_default_str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string key_value_report(const loc::LocationEstimate& est) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "azimuth_deg %.17g\nposition_x_m %.17g\nposition_y_m %.17g\n"
                  "residual_m2 %.17g\nconverged %d\niterations %d\nrange_unreliable %d\n",
                  est.azimuth_deg, est.position.x, est.position.y, est.residual,
                  est.converged ? 1 : 0, est.iterations, est.range_unreliable ? 1 : 0);
    return buf;
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
    GeometryFlags geo;
    double fs = 10000.0;
    long long n = 24000;
    double radius = 100.0;
    double noise = 0.0;  // s
    std::string mode = "event";
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = "dataset.csv";
};

int cmd_simulate(const SimulateArgs& args) {
    sim::SimConfig cfg;
    cfg.geometry = ArrayGeometry::equilateral(args.geo.spacing);
    cfg.medium = args.geo.medium();
    cfg.sampling.sample_rate = args.fs;
    cfg.placement_tolerance = args.geo.tolerance;
    cfg.toa_noise_sigma = args.noise;
    cfg.mode = args.mode == "waveform" ? sim::SimMode::waveform : sim::SimMode::event;
    cfg.master_seed = args.seed;

    // fail on bad values before any work starts
    cfg.geometry.validate();
    cfg.sampling.validate();
    if (args.n < 1) throw std::runtime_error("simulate: --samples must be >= 1");
    if (!(args.radius > 0.0)) throw std::runtime_error("simulate: --radius must be > 0");

    const auto batch = sim::run_batch(cfg, args.n, args.radius, args.threads);
    std::vector<data::LabeledSample> samples;
    samples.reserve(batch.size());
    for (const auto& obs : batch) samples.push_back(data::to_labeled(obs));
    data::save(samples, args.out);

    std::printf("wrote %zu samples to %s\n", samples.size(), args.out.c_str());
    std::printf("fs %.17g Hz, spacing %.17g m, c %.17g m/s, seed %" PRIu64 "\n", args.fs,
                args.geo.spacing, cfg.medium.speed_of_sound, args.seed);
    std::printf("dataset fingerprint %016" PRIx64 "\n", data::fingerprint(samples));
    return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string out = "model.locagen";
    std::string kind = "rf";
    double split_fraction = 0.8;
    std::uint64_t split_seed = 1337;
    std::uint64_t seed = 0;
    int threads = 1;
    // rf
    int trees = 100;
    int max_depth = 12;
    int min_leaf = 2;
    int bins = 12;
    // mlp
    int epochs = 300;
    int batch = 64;
    double lr = 1e-3;
    std::vector<int> hidden = {64, 64};
    bool raw_angle = false;
};

int cmd_train(const TrainArgs& args) {
    const auto samples = data::load(args.data);
    const auto split = data::split(samples, args.split_fraction, args.split_seed);
    std::printf("loaded %zu samples (%zu train / %zu validation)\n", samples.size(),
                split.train.size(), split.validation.size());

    ml::TrainedModel model;
    if (args.kind == "rf") {
        ml::RfParams params;
        params.n_trees = args.trees;
        params.max_depth = args.max_depth;
        params.min_samples_leaf = args.min_leaf;
        params.n_bins = args.bins;
        params.seed = args.seed;
        params.n_threads = args.threads;
        model = ml::train_rf(split.train, params);
    } else if (args.kind == "mlp") {
        ml::MlpParams params;
        params.epochs = args.epochs;
        params.batch_size = args.batch;
        params.learning_rate = args.lr;
        params.hidden = args.hidden;
        params.seed = args.seed;
        params.raw_angle = args.raw_angle;
        model = ml::train_mlp(split.train, params);
        std::printf("final training loss %.6g\n", model.epoch_losses.back());
    } else {
        throw CLI::ValidationError("--kind", "must be rf or mlp");
    }

    std::vector<double> pred, truth;
    for (const auto& s : split.validation) {
        pred.push_back(ml::predict_azimuth(model, s.features));
        truth.push_back(s.azimuth_deg);
    }
    std::printf("validation circular MAE %.4f deg\n", ml::circular_mae(pred, truth));

    ml::save_model(model, args.out);
    std::printf("wrote model to %s (fingerprint %016" PRIx64 ")\n", args.out.c_str(),
                ml::model_fingerprint(model));
    return 0;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
    std::string model;
    std::string data;
    std::string report_prefix = "eval";
    GeometryFlags geo;
    double fs = 10000.0;
    double split_fraction = 0.8;
    std::uint64_t split_seed = 1337;
    double hist_width = 5.0;  // degrees
};

int cmd_eval(const EvalArgs& args) {
    const auto model = ml::load_model(args.model);
    const auto samples = data::load(args.data);
    const auto split = data::split(samples, args.split_fraction, args.split_seed);

    const auto geometry = ArrayGeometry::equilateral(args.geo.spacing);
    const Medium medium = args.geo.medium();

    std::vector<double> model_pred, baseline_pred, truth;
    std::vector<double> model_err, baseline_err;
    for (const auto& s : split.validation) {
        const double m = ml::predict_azimuth(model, s.features);
        const TdoaPair tdoa = TdoaPair::from_taus(s.features[0], s.features[1]);
        const auto base = loc::localize_pipeline(tdoa, geometry, medium, nullptr);
        model_pred.push_back(m);
        baseline_pred.push_back(base.azimuth_deg);
        truth.push_back(s.azimuth_deg);
        model_err.push_back(circular_distance_deg(m, s.azimuth_deg));
        baseline_err.push_back(circular_distance_deg(base.azimuth_deg, s.azimuth_deg));
    }

    const double model_mae = ml::circular_mae(model_pred, truth);
    const double baseline_mae = ml::circular_mae(baseline_pred, truth);

    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "validation_rows %zu\nmodel_circular_mae_deg %.17g\n"
                  "baseline_circular_mae_deg %.17g\nmodel_kind %s\n"
                  "dataset_fingerprint %016" PRIx64 "\nmodel_fingerprint %016" PRIx64 "\n",
                  split.validation.size(), model_mae, baseline_mae,
                  model.kind == ml::TrainedModel::Kind::random_forest ? "rf" : "mlp",
                  data::fingerprint(samples), ml::model_fingerprint(model));
    std::string report = buf;

    if (model.kind == ml::TrainedModel::Kind::random_forest) {
        // per-bin classification accuracy over the validation rows
        const int n_bins = model.forest.n_classes;
        std::vector<long> total(static_cast<std::size_t>(n_bins), 0);
        std::vector<long> correct(static_cast<std::size_t>(n_bins), 0);
        for (const auto& s : split.validation) {
            const int true_bin = n_bins == 12 ? s.bin12 : s.bin24;
            const int pred_bin = ml::predict_rf(model, s.features).bin;
            ++total[static_cast<std::size_t>(true_bin)];
            if (pred_bin == true_bin) ++correct[static_cast<std::size_t>(true_bin)];
        }
        for (int b = 0; b < n_bins; ++b) {
            const auto k = static_cast<std::size_t>(b);
            const double acc = total[k] > 0
                                   ? static_cast<double>(correct[k]) / static_cast<double>(total[k])
                                   : 0.0;
            std::snprintf(buf, sizeof buf, "bin%02d_n %ld\nbin%02d_accuracy %.17g\n", b,
                          total[k], b, acc);
            report += buf;
        }
    }
    write_text(args.report_prefix + "_report.txt", report);

    // histogram and CDF tables with model and baseline columns
    const auto mh = stats::histogram(model_err, args.hist_width);
    const auto bh = stats::histogram(baseline_err, args.hist_width);
    std::string hist_csv = "bin_left_edge_deg,model_count,baseline_count\n";
    const std::size_t n_bins = std::max(mh.x.size(), bh.x.size());
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double edge = static_cast<double>(i) * args.hist_width;
        const double mc = i < mh.x.size() ? mh.y[i] : 0.0;
        const double bc = i < bh.x.size() ? bh.y[i] : 0.0;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", edge, mc, bc);
        hist_csv += buf;
    }
    write_text(args.report_prefix + "_histogram.csv", hist_csv);

    write_text(args.report_prefix + "_cdf_model.csv", stats::cdf(model_err).to_csv());
    write_text(args.report_prefix + "_cdf_baseline.csv", stats::cdf(baseline_err).to_csv());

    std::printf("model circular MAE     %.4f deg\n", model_mae);
    std::printf("baseline circular MAE  %.4f deg\n", baseline_mae);
    std::printf("reports written with prefix %s\n", args.report_prefix.c_str());
    return 0;
}

// ------------------------------------------------------------------- locate

struct LocateArgs {
    std::vector<std::string> audio;
    std::string model;
    GeometryFlags geo;
    double resample_to = 0.0;  // Hz; 0 keeps the native rate
    std::string out;           // optional key-value output path
};

int cmd_locate(const LocateArgs& args) {
    std::vector<dsp::Waveform> channels;
    if (args.audio.size() == 1) {
        const auto buf = io::read_wav(args.audio[0]);
        if (buf.channels.size() != 3)
            throw std::runtime_error("locate: expected a 3-channel file, got " +
                                     std::to_string(buf.channels.size()) + " channels");
        for (std::size_t c = 0; c < 3; ++c) channels.push_back(buf.channel(c));
    } else if (args.audio.size() == 3) {
        // one mono file per mic, assumed sample-synchronized
        for (const auto& path : args.audio) {
            const auto buf = io::read_wav(path);
            if (buf.channels.size() != 1)
                throw std::runtime_error("locate: " + path + " is not mono");
            channels.push_back(buf.channel(0));
        }
        if (channels[0].sample_rate != channels[1].sample_rate ||
            channels[0].sample_rate != channels[2].sample_rate)
            throw std::runtime_error("locate: sample rates differ between files");
    } else {
        throw std::runtime_error("locate: pass one 3-channel file or three mono files");
    }

    if (args.resample_to > 0.0)
        for (auto& ch : channels) ch = dsp::resample(ch, args.resample_to);

    const auto geometry = ArrayGeometry::equilateral(args.geo.spacing);
    const Medium medium = args.geo.medium();

    std::optional<ml::TrainedModel> model;
    if (!args.model.empty()) model = ml::load_model(args.model);

    const auto est = loc::localize_pipeline(channels, geometry, medium,
                                            model ? &*model : nullptr);
    const std::string report = key_value_report(est);
    std::fputs(report.c_str(), stdout);
    if (!args.out.empty()) write_text(args.out, report);
    return 0;
}

// ------------------------------------------------------------------ offsets

struct OffsetsArgs {
    GeometryFlags geo;
    double fs = 10000.0;
    long long n = 10000;
    double radius = 100.0;
    std::vector<double> levels = {0.0, 0.25, 0.5, 0.75};
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out = "offsets.csv";
    std::string report;
};

int cmd_offsets(const OffsetsArgs& args) {
    sim::SimConfig cfg;
    cfg.geometry = ArrayGeometry::equilateral(args.geo.spacing);
    cfg.medium = args.geo.medium();
    cfg.sampling.sample_rate = args.fs;
    cfg.placement_tolerance = args.geo.tolerance;
    cfg.master_seed = args.seed;

    cfg.geometry.validate();
    cfg.sampling.validate();
    if (args.n < 1) throw std::runtime_error("offsets: --samples must be >= 1");

    const auto table = sim::run_offset_experiment(cfg, args.n, args.levels, args.radius,
                                                  args.threads);
    write_text(args.out, table.to_csv());

    const auto [anova2, anova3] = stats::offset_anova(table);
    std::string report;
    report += "[offset2]\n" + anova2.to_key_value();
    report += "[offset3]\n" + anova3.to_key_value();
    std::fputs(report.c_str(), stdout);
    if (!args.report.empty()) write_text(args.report, report);

    std::printf("wrote %zu trials to %s\n", table.position_error_m.size(), args.out.c_str());
    return 0;
}

// -------------------------------------------------------------------- synth

struct SynthArgs {
    GeometryFlags geo;
    double fs = 48000.0;
    double source_x = 50.0;
    double source_y = 30.0;
    double duration = 0.1;
    std::string excitation = "chirp";
    double noise = 0.0;  // relative to signal RMS
    std::uint64_t seed = 0;
    std::string out = "array_capture.wav";
    std::string format = "float32";
};

int cmd_synth(const SynthArgs& args) {
    const auto geometry = ArrayGeometry::equilateral(args.geo.spacing);
    const Medium medium = args.geo.medium();
    const auto toa = true_toa(geometry, medium, SourcePosition{args.source_x, args.source_y});

    dsp::Waveform excitation;
    if (args.excitation == "chirp")
        excitation = dsp::make_chirp(500.0, 3000.0, args.duration, args.fs);
    else if (args.excitation == "noise")
        excitation = dsp::make_noise_burst(args.duration, args.fs, args.seed ^ 0xabcdefULL);
    else if (args.excitation == "tone")
        excitation = dsp::make_tone(1000.0, args.duration, args.fs);
    else
        throw CLI::ValidationError("--excitation", "must be chirp, noise or tone");

    const double span = geometry.max_pair_distance() / medium.speed_of_sound;
    excitation.samples.resize(excitation.samples.size() +
                                  static_cast<std::size_t>(std::ceil(span * args.fs)) + 80,
                              0.0);

    const double min_toa = std::min({toa[0], toa[1], toa[2]});
    const double sigma = args.noise * dsp::rms(excitation.samples);

    io::AudioBuffer buf;
    buf.sample_rate = args.fs;
    for (int i = 0; i < 3; ++i) {
        const auto ch = dsp::synthesize_delayed(excitation, toa[static_cast<std::size_t>(i)] - min_toa,
                                                sigma, args.seed + static_cast<std::uint64_t>(i));
        buf.channels.push_back(ch.samples);
    }
    io::write_wav(args.out, buf,
                  args.format == "pcm16" ? io::WavFormat::pcm16 : io::WavFormat::float32);

    std::printf("wrote 3-channel capture to %s\n", args.out.c_str());
    std::printf("true azimuth %.6f deg\n", SourcePosition{args.source_x, args.source_y}.azimuth_deg());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LocaGen: quantization-aware acoustic source localization toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI config file (flags win)");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a labeled TDOA dataset");
    add_geometry_flags(sim_cmd, sim_args.geo);
    sim_cmd->add_option("--fs", sim_args.fs, "Sample rate in Hz")->capture_default_str();
    sim_cmd->add_option("-n,--samples", sim_args.n, "Number of samples")->capture_default_str();
    sim_cmd->add_option("--radius", sim_args.radius, "Source disk radius in meters")
        ->capture_default_str();
    sim_cmd->add_option("--noise", sim_args.noise, "TOA noise sigma in seconds")
        ->capture_default_str();
    sim_cmd->add_option("--mode", sim_args.mode, "event or waveform")
        ->check(CLI::IsMember({"event", "waveform"}))
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim_args.seed, "Master seed")->capture_default_str();
    sim_cmd->add_option("--threads", sim_args.threads, "Worker threads")->capture_default_str();
    sim_cmd->add_option("-o,--out", sim_args.out, "Output CSV path")->capture_default_str();

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a corrector model on a dataset");
    train_cmd->add_option("--data", train_args.data, "Dataset CSV")->required();
    train_cmd->add_option("-o,--out", train_args.out, "Model output path")->capture_default_str();
    train_cmd->add_option("--kind", train_args.kind, "rf or mlp")
        ->check(CLI::IsMember({"rf", "mlp"}))
        ->capture_default_str();
    train_cmd->add_option("--split-fraction", train_args.split_fraction, "Training fraction")
        ->capture_default_str();
    train_cmd->add_option("--split-seed", train_args.split_seed, "Split shuffle seed")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_args.seed, "Training seed")->capture_default_str();
    train_cmd->add_option("--threads", train_args.threads, "Worker threads (rf)")
        ->capture_default_str();
    train_cmd->add_option("--trees", train_args.trees, "Forest size")->capture_default_str();
    train_cmd->add_option("--max-depth", train_args.max_depth, "Tree depth limit")
        ->capture_default_str();
    train_cmd->add_option("--min-leaf", train_args.min_leaf, "Minimum samples per leaf")
        ->capture_default_str();
    train_cmd->add_option("--bins", train_args.bins, "Azimuth bins: 12 or 24")
        ->check(CLI::IsMember({12, 24}))
        ->capture_default_str();
    train_cmd->add_option("--epochs", train_args.epochs, "MLP epochs")->capture_default_str();
    train_cmd->add_option("--batch", train_args.batch, "MLP batch size")->capture_default_str();
    train_cmd->add_option("--lr", train_args.lr, "MLP learning rate")->capture_default_str();
    train_cmd->add_option("--hidden", train_args.hidden, "MLP hidden layer sizes")
        ->capture_default_str();
    train_cmd->add_flag("--raw-angle", train_args.raw_angle,
                        "Regress degrees directly instead of (sin, cos)");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model against the baseline");
    eval_cmd->add_option("--model", eval_args.model, "Model file")->required();
    eval_cmd->add_option("--data", eval_args.data, "Dataset CSV")->required();
    eval_cmd->add_option("--report-prefix", eval_args.report_prefix, "Output path prefix")
        ->capture_default_str();
    add_geometry_flags(eval_cmd, eval_args.geo);
    eval_cmd->add_option("--fs", eval_args.fs, "Sample rate the dataset was generated at")
        ->capture_default_str();
    eval_cmd->add_option("--split-fraction", eval_args.split_fraction, "Training fraction")
        ->capture_default_str();
    eval_cmd->add_option("--split-seed", eval_args.split_seed, "Split shuffle seed")
        ->capture_default_str();
    eval_cmd->add_option("--hist-width", eval_args.hist_width, "Histogram bin width in degrees")
        ->capture_default_str();

    LocateArgs locate_args;
    auto* locate_cmd = app.add_subcommand("locate", "Localize a recorded 3-channel capture");
    locate_cmd->add_option("--audio", locate_args.audio,
                           "One 3-channel WAV or three mono WAVs (mics 1-3)")
        ->required()
        ->expected(1, 3);
    locate_cmd->add_option("--model", locate_args.model, "Optional corrector model");
    add_geometry_flags(locate_cmd, locate_args.geo);
    locate_cmd->add_option("--resample", locate_args.resample_to,
                           "Resample input to this rate in Hz before processing");
    locate_cmd->add_option("-o,--out", locate_args.out, "Also write the estimate to this file");

    OffsetsArgs offsets_args;
    auto* offsets_cmd = app.add_subcommand("offsets", "Sampling-offset experiment with ANOVA");
    add_geometry_flags(offsets_cmd, offsets_args.geo);
    offsets_cmd->add_option("--fs", offsets_args.fs, "Sample rate in Hz")->capture_default_str();
    offsets_cmd->add_option("-n,--samples", offsets_args.n, "Number of trials")
        ->capture_default_str();
    offsets_cmd->add_option("--radius", offsets_args.radius, "Source disk radius in meters")
        ->capture_default_str();
    offsets_cmd->add_option("--levels", offsets_args.levels,
                            "Offset levels as fractions of one sampling period")
        ->capture_default_str();
    offsets_cmd->add_option("--seed", offsets_args.seed, "Master seed")->capture_default_str();
    offsets_cmd->add_option("--threads", offsets_args.threads, "Worker threads")
        ->capture_default_str();
    offsets_cmd->add_option("-o,--out", offsets_args.out, "Trial table CSV path")
        ->capture_default_str();
    offsets_cmd->add_option("--report", offsets_args.report, "ANOVA report path");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Synthesize a 3-channel capture of a source");
    add_geometry_flags(synth_cmd, synth_args.geo);
    synth_cmd->add_option("--fs", synth_args.fs, "Sample rate in Hz")->capture_default_str();
    synth_cmd->add_option("--source-x", synth_args.source_x, "Source x in meters")
        ->capture_default_str();
    synth_cmd->add_option("--source-y", synth_args.source_y, "Source y in meters")
        ->capture_default_str();
    synth_cmd->add_option("--duration", synth_args.duration, "Excitation length in seconds")
        ->capture_default_str();
    synth_cmd->add_option("--excitation", synth_args.excitation, "chirp, noise or tone")
        ->check(CLI::IsMember({"chirp", "noise", "tone"}))
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth_args.noise, "Noise sigma relative to signal RMS")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.seed, "Noise seed")->capture_default_str();
    synth_cmd->add_option("-o,--out", synth_args.out, "Output WAV path")->capture_default_str();
    synth_cmd->add_option("--format", synth_args.format, "pcm16 or float32")
        ->check(CLI::IsMember({"pcm16", "float32"}))
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) return cmd_simulate(sim_args);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (eval_cmd->parsed()) return cmd_eval(eval_args);
        if (locate_cmd->parsed()) return cmd_locate(locate_args);
        if (offsets_cmd->parsed()) return cmd_offsets(offsets_args);
        if (synth_cmd->parsed()) return cmd_synth(synth_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
