// Command-line frontend: synthetic data generation, training, evaluation,
// prediction, and the combinatorial-optimization baseline.
//
// Option precedence, lowest to highest: built-in defaults, --config JSON,
// command-line flags, then the NILM_SEED environment variable for the seed.
// Every run echoes its fully resolved configuration next to its outputs.

#include "CLI11.hpp"
#include "json.hpp"

#include "nilm/baselines.hpp"
#include "nilm/data.hpp"
#include "nilm/metrics.hpp"
#include "nilm/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("config file " + path + ": " + e.what());
    }
}

void check_config_keys(const json& cfg, const std::vector<std::string>& allowed,
                       const std::string& path) {
    if (!cfg.is_object()) throw std::runtime_error("config file " + path + ": not a JSON object");
    for (const auto& item : cfg.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw std::runtime_error("config file " + path + ": unknown key '" + item.key() +
                                     "'");
        }
    }
}

template <typename T>
void cfg_override(const json& cfg, const char* key, const CLI::Option* flag, T& value) {
    if (!cfg.contains(key)) return;
    if (flag != nullptr && flag->count() > 0) return;  // flags win over the file
    try {
        value = cfg.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::runtime_error(std::string("config key '") + key + "' has the wrong type");
    }
}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("NILM_SEED");
    if (raw == nullptr) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(raw, &end, 10);
    if (errno != 0 || end == raw || *end != '\0') {
        throw std::runtime_error("NILM_SEED must be an unsigned integer, got '" +
                                 std::string(raw) + "'");
    }
    return static_cast<std::uint64_t>(v);
}

void write_config_echo(const std::string& out_dir, const std::string& command,
                       const json& resolved) {
    std::filesystem::path path = std::filesystem::path(out_dir) / (command + "_config.json");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << resolved.dump(2) << '\n';
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir);
}

std::string out_file(const std::string& out_dir, const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
}

// Mean submeter power of each full window, per profile appliance, for
// turning window states into energy. Indexed [appliance][window].
std::vector<nilm::Vector> window_true_power(const nilm::MeterData& meter,
                                            const std::vector<nilm::ApplianceProfile>& profiles,
                                            std::size_t window) {
    const std::size_t count = meter.aggregate.size() / window;
    std::vector<nilm::Vector> out(profiles.size(), nilm::Vector(count, 0.0));
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        auto it = std::find(meter.appliance_names.begin(), meter.appliance_names.end(),
                            profiles[k].name);
        if (it == meter.appliance_names.end()) {
            throw std::runtime_error("no submeter column for appliance '" + profiles[k].name +
                                     "'");
        }
        const nilm::PowerSeries& series =
            meter.appliance[static_cast<std::size_t>(it - meter.appliance_names.begin())];
        for (std::size_t w = 0; w < count; ++w) {
            double mean = 0.0;
            for (std::size_t t = 0; t < window; ++t) mean += series.watts[w * window + t];
            out[k][w] = mean / static_cast<double>(window);
        }
    }
    return out;
}

// Per-class F1 plus energy metrics for one prediction method. Rows of
// `predicted`/`truth` align with `window_idx`, which indexes into the
// per-window true power table. An appliance with zero true energy gets NaN
// energy metrics and a warning instead of failing the whole run.
nilm::EvalReport evaluate_method(const std::string& method,
                                 const std::vector<nilm::ApplianceProfile>& profiles,
                                 const std::vector<nilm::Vector>& predicted,
                                 const std::vector<nilm::Vector>& truth,
                                 const std::vector<std::size_t>& window_idx,
                                 const std::vector<nilm::Vector>& true_power, double window_hours) {
    nilm::EvalReport report;
    report.method = method;
    report.macro_f1 = nilm::macro_f1(predicted, truth);
    report.micro_f1 = nilm::micro_f1(predicted, truth);

    std::vector<nilm::ConfusionCounts> counts = nilm::per_class_counts(predicted, truth);
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        nilm::ApplianceEval e;
        e.name = profiles[k].name;
        e.f1 = nilm::f1_score(counts[k]);

        nilm::Vector true_e(predicted.size()), est_e(predicted.size());
        nilm::Vector states(predicted.size());
        for (std::size_t r = 0; r < predicted.size(); ++r) {
            true_e[r] = true_power[k][window_idx[r]] * window_hours;
            states[r] = predicted[r][k];
        }
        est_e = nilm::estimate_energy(states, profiles[k].avg_on_power_w, window_hours);
        try {
            e.nee = nilm::nee(true_e, est_e);
            e.total_energy_error = nilm::total_energy_error(true_e, est_e);
        } catch (const std::runtime_error&) {
            std::cerr << "warning: appliance '" << e.name
                      << "' has zero true energy in the evaluated windows; energy metrics "
                         "are undefined\n";
            e.nee = std::nan("");
            e.total_energy_error = std::nan("");
        }
        report.per_class.push_back(std::move(e));
    }
    return report;
}

nilm::Vector scale_window(const nilm::Vector& raw, const nilm::Scaler& scaler) {
    return nilm::normalize({raw}, scaler).first[0];
}

// ---------------------------------------------------------------------------
// synth

struct SynthOpts {
    std::string profiles;
    std::size_t duration = 0;
    double hz = 1.0;
    double noise_sd = 0.0;
    std::size_t hold = 1;
    std::uint64_t seed = 1;
    std::string out = ".";
};

void run_synth(const SynthOpts& o) {
    auto profiles = nilm::load_profiles(o.profiles);
    nilm::SynthResult r = nilm::synthesize(profiles, o.duration, o.hz, o.noise_sd, o.seed, o.hold);

    ensure_out_dir(o.out);
    nilm::save_csv(out_file(o.out, "data.csv"), r.meter);

    std::ofstream states(out_file(o.out, "states.csv"));
    if (!states) throw std::runtime_error("cannot write states.csv");
    states << "timestamp";
    for (const auto& p : profiles) states << ",state_" << p.name;
    states << '\n';
    for (std::size_t t = 0; t < r.meter.aggregate.size(); ++t) {
        states << r.meter.aggregate.timestamps[t];
        for (std::size_t k = 0; k < profiles.size(); ++k) {
            states << ',' << static_cast<int>(r.states[k][t]);
        }
        states << '\n';
    }

    json echo = {{"command", "synth"},   {"profiles", o.profiles}, {"duration", o.duration},
                 {"hz", o.hz},           {"noise_sd", o.noise_sd}, {"hold", o.hold},
                 {"seed", o.seed},       {"out", o.out}};
    write_config_echo(o.out, "synth", echo);

    std::cout << "wrote " << out_file(o.out, "data.csv") << " (" << r.meter.aggregate.size()
              << " rows, " << profiles.size() << " appliances)\n";
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        std::size_t on = 0;
        for (std::uint8_t s : r.states[k]) on += s;
        std::cout << "  " << profiles[k].name << " on for " << on << " of "
                  << r.states[k].size() << " samples\n";
    }
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
    std::string data;
    std::string profiles;
    std::size_t window = 60;
    std::size_t hidden = 128;
    double lr = 0.001;
    std::size_t cd_k = 2;
    std::size_t epochs = 100;
    std::size_t batch = 32;
    std::uint64_t seed = 1;
    double threshold = 0.5;
    double on_fraction = 0.5;
    bool sweep_hidden = false;
    std::string out = ".";
};

struct TrainedCandidate {
    nilm::RbmParameters params;
    std::vector<double> recon_log;
    double val_macro_f1 = 0.0;
    std::size_t hidden = 0;
};

TrainedCandidate train_candidate(const nilm::LabeledDataset& train,
                                 const nilm::LabeledDataset& validation, const TrainOpts& o,
                                 std::size_t hidden) {
    const std::size_t labels = train.profiles.size();
    TrainedCandidate cand;
    cand.hidden = hidden;
    cand.params = nilm::init_params(o.window, hidden, labels, o.seed);

    nilm::TrainConfig cfg;
    cfg.n_hidden = hidden;
    cfg.learning_rate = o.lr;
    cfg.cd_steps = o.cd_k;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch;
    cfg.seed = o.seed;
    cfg.threshold = o.threshold;

    nilm::Rng rng(o.seed + hidden);
    std::vector<std::size_t> order(train.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= o.epochs; ++epoch) {
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::size_t j = rng.next_below(i + 1);
            std::swap(order[i], order[j]);
        }
        for (std::size_t begin = 0; begin < order.size(); begin += o.batch) {
            std::size_t end = std::min(begin + o.batch, order.size());
            std::vector<nilm::Sample> batch;
            batch.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) batch.push_back(train.samples[order[i]]);
            cand.params = nilm::cd_k_update(cand.params, batch, cfg, rng);
        }
        cand.recon_log.push_back(nilm::reconstruction_error(cand.params, train.samples));
    }

    std::vector<nilm::Vector> preds, truths;
    for (const nilm::Sample& s : validation.samples) {
        preds.push_back(nilm::predict_labels(cand.params, s.x, o.threshold));
        truths.push_back(s.y);
    }
    cand.val_macro_f1 = nilm::macro_f1(preds, truths);
    return cand;
}

void run_train(const TrainOpts& o) {
    if (o.batch == 0) throw std::runtime_error("batch size must be positive");

    nilm::MeterData meter = nilm::load_csv(o.data);
    auto profiles = nilm::load_profiles(o.profiles);
    nilm::LabeledDataset ds = nilm::build_dataset(meter, profiles, o.window, o.on_fraction);

    nilm::SplitResult parts = nilm::split(ds, {0.5, 0.3, 0.2}, o.seed);
    nilm::Scaler scaler = nilm::normalize_dataset(parts.train);
    nilm::normalize_dataset(parts.validation, scaler);

    std::vector<std::size_t> candidates =
        o.sweep_hidden ? std::vector<std::size_t>{32, 64, 128, 256}
                       : std::vector<std::size_t>{o.hidden};

    std::optional<TrainedCandidate> best;
    for (std::size_t hidden : candidates) {
        TrainedCandidate cand = train_candidate(parts.train, parts.validation, o, hidden);
        std::cout << "hidden " << hidden << " val_macro_f1 " << fmt_double(cand.val_macro_f1)
                  << '\n';
        if (!best || cand.val_macro_f1 > best->val_macro_f1) best = std::move(cand);
    }

    ensure_out_dir(o.out);
    std::ofstream log(out_file(o.out, "train_log.csv"));
    if (!log) throw std::runtime_error("cannot write train_log.csv");
    log << "epoch,reconstruction_error\n";
    for (std::size_t e = 0; e < best->recon_log.size(); ++e) {
        log << (e + 1) << ',' << fmt_double(best->recon_log[e]) << '\n';
    }

    nilm::ModelFile model;
    model.params = best->params;
    model.scaler = scaler;
    for (const auto& p : profiles) model.label_names.push_back(p.name);
    nilm::save_model(out_file(o.out, "model.txt"), model);

    json echo = {{"command", "train"},
                 {"data", o.data},
                 {"profiles", o.profiles},
                 {"window", o.window},
                 {"hidden", best->hidden},
                 {"lr", o.lr},
                 {"cd_k", o.cd_k},
                 {"epochs", o.epochs},
                 {"batch", o.batch},
                 {"seed", o.seed},
                 {"threshold", o.threshold},
                 {"on_fraction", o.on_fraction},
                 {"sweep_hidden", o.sweep_hidden},
                 {"out", o.out}};
    write_config_echo(o.out, "train", echo);

    std::cout << "selected hidden " << best->hidden << " (validation macro F1 "
              << fmt_double(best->val_macro_f1) << ")\n";
    if (!best->recon_log.empty()) {
        std::cout << "final reconstruction error " << fmt_double(best->recon_log.back()) << '\n';
    }
    std::cout << "model written to " << out_file(o.out, "model.txt") << '\n';
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
    std::string data;
    std::string profiles;
    std::string model;
    std::uint64_t seed = 1;
    double threshold = 0.5;
    double on_fraction = 0.5;
    bool with_baseline = false;
    std::string out = ".";
};

void run_eval(const EvalOpts& o) {
    nilm::ModelFile model = nilm::load_model(o.model);
    nilm::MeterData meter = nilm::load_csv(o.data);
    auto profiles = nilm::load_profiles(o.profiles);

    if (profiles.size() != model.label_names.size()) {
        throw std::runtime_error("model has " + std::to_string(model.label_names.size()) +
                                 " labels but the profiles file lists " +
                                 std::to_string(profiles.size()) + " appliances");
    }
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        if (profiles[k].name != model.label_names[k]) {
            throw std::runtime_error("label order mismatch at position " + std::to_string(k) +
                                     ": model has '" + model.label_names[k] +
                                     "', profiles have '" + profiles[k].name + "'");
        }
    }

    const std::size_t window = model.params.n_visible();
    nilm::LabeledDataset ds = nilm::build_dataset(meter, profiles, window, o.on_fraction);
    nilm::SplitResult parts = nilm::split(ds, {0.5, 0.3, 0.2}, o.seed);

    const std::int64_t t0 = meter.aggregate.timestamps.front();
    const std::int64_t step = meter.aggregate.size() > 1
                                  ? meter.aggregate.timestamps[1] - meter.aggregate.timestamps[0]
                                  : 1;
    const double window_hours =
        static_cast<double>(window) * static_cast<double>(step) / 3600.0;
    std::vector<nilm::Vector> true_power = window_true_power(meter, profiles, window);

    std::vector<nilm::Vector> preds, truths, raw_windows;
    std::vector<std::size_t> window_idx;
    for (const nilm::Sample& s : parts.test.samples) {
        nilm::Vector xn = scale_window(s.x, model.scaler);
        nilm::MfResult mf = nilm::mean_field_infer(model.params, xn);
        nilm::Vector pred(mf.mu.size());
        for (std::size_t l = 0; l < mf.mu.size(); ++l) {
            pred[l] = mf.mu[l] >= o.threshold ? 1.0 : 0.0;
        }
        preds.push_back(std::move(pred));
        truths.push_back(s.y);
        raw_windows.push_back(s.x);
        window_idx.push_back(static_cast<std::size_t>((s.window_start - t0) /
                                                      (static_cast<std::int64_t>(window) * step)));
    }

    nilm::EvalReport rbm_report = evaluate_method("mlc-rbm", profiles, preds, truths, window_idx,
                                                  true_power, window_hours);

    std::string text = nilm::report_text(rbm_report);
    std::string csv = nilm::report_csv(rbm_report, true);
    if (o.with_baseline) {
        nilm::Vector rated(profiles.size());
        for (std::size_t k = 0; k < profiles.size(); ++k) rated[k] = profiles[k].avg_on_power_w;
        std::vector<nilm::Vector> co_preds = nilm::co_predict_series(raw_windows, rated);
        nilm::EvalReport co_report = evaluate_method("co", profiles, co_preds, truths, window_idx,
                                                     true_power, window_hours);
        text += nilm::report_text(co_report);
        csv += nilm::report_csv(co_report, false);
    }

    ensure_out_dir(o.out);
    {
        std::ofstream f(out_file(o.out, "eval_report.txt"));
        if (!f) throw std::runtime_error("cannot write eval_report.txt");
        f << text;
    }
    {
        std::ofstream f(out_file(o.out, "eval_report.csv"));
        if (!f) throw std::runtime_error("cannot write eval_report.csv");
        f << csv;
    }

    json echo = {{"command", "eval"},
                 {"data", o.data},
                 {"profiles", o.profiles},
                 {"model", o.model},
                 {"seed", o.seed},
                 {"threshold", o.threshold},
                 {"on_fraction", o.on_fraction},
                 {"with_baseline", o.with_baseline},
                 {"out", o.out}};
    write_config_echo(o.out, "eval", echo);

    std::cout << text;
    std::cout << "evaluated " << preds.size() << " test windows\n";
}

// ---------------------------------------------------------------------------
// predict

struct PredictOpts {
    std::string data;
    std::string model;
    double threshold = 0.5;
    std::string out = ".";
};

void run_predict(const PredictOpts& o) {
    nilm::ModelFile model = nilm::load_model(o.model);
    nilm::MeterData meter = nilm::load_csv(o.data);

    const std::size_t window = model.params.n_visible();
    std::vector<nilm::Vector> windows = nilm::window_aggregate(meter.aggregate, window);

    ensure_out_dir(o.out);
    std::ofstream f(out_file(o.out, "predictions.csv"));
    if (!f) throw std::runtime_error("cannot write predictions.csv");
    f << "window_start";
    for (const std::string& name : model.label_names) f << ",mu_" << name;
    for (const std::string& name : model.label_names) f << ",state_" << name;
    f << '\n';

    for (std::size_t w = 0; w < windows.size(); ++w) {
        nilm::Vector xn = scale_window(windows[w], model.scaler);
        nilm::MfResult mf = nilm::mean_field_infer(model.params, xn);
        f << meter.aggregate.timestamps[w * window];
        for (double mu : mf.mu) f << ',' << fmt_double(mu);
        for (double mu : mf.mu) f << ',' << (mu >= o.threshold ? 1 : 0);
        f << '\n';
    }

    json echo = {{"command", "predict"},
                 {"data", o.data},
                 {"model", o.model},
                 {"threshold", o.threshold},
                 {"out", o.out}};
    write_config_echo(o.out, "predict", echo);

    std::cout << "wrote " << out_file(o.out, "predictions.csv") << " (" << windows.size()
              << " windows)\n";
}

// ---------------------------------------------------------------------------
// baseline

struct BaselineOpts {
    std::string data;
    std::string profiles;
    std::size_t window = 60;
    double on_fraction = 0.5;
    std::string out = ".";
};

void run_baseline(const BaselineOpts& o) {
    nilm::MeterData meter = nilm::load_csv(o.data);
    auto profiles = nilm::load_profiles(o.profiles);
    nilm::LabeledDataset ds = nilm::build_dataset(meter, profiles, o.window, o.on_fraction);

    const std::int64_t step = meter.aggregate.size() > 1
                                  ? meter.aggregate.timestamps[1] - meter.aggregate.timestamps[0]
                                  : 1;
    const double window_hours =
        static_cast<double>(o.window) * static_cast<double>(step) / 3600.0;
    std::vector<nilm::Vector> true_power = window_true_power(meter, profiles, o.window);

    nilm::Vector rated(profiles.size());
    for (std::size_t k = 0; k < profiles.size(); ++k) rated[k] = profiles[k].avg_on_power_w;

    std::vector<nilm::Vector> raw_windows, truths;
    std::vector<std::size_t> window_idx;
    for (std::size_t w = 0; w < ds.samples.size(); ++w) {
        raw_windows.push_back(ds.samples[w].x);
        truths.push_back(ds.samples[w].y);
        window_idx.push_back(w);
    }
    std::vector<nilm::Vector> preds = nilm::co_predict_series(raw_windows, rated);

    nilm::EvalReport report =
        evaluate_method("co", profiles, preds, truths, window_idx, true_power, window_hours);

    ensure_out_dir(o.out);
    {
        std::ofstream f(out_file(o.out, "baseline_report.txt"));
        if (!f) throw std::runtime_error("cannot write baseline_report.txt");
        f << nilm::report_text(report);
    }
    {
        std::ofstream f(out_file(o.out, "baseline_report.csv"));
        if (!f) throw std::runtime_error("cannot write baseline_report.csv");
        f << nilm::report_csv(report, true);
    }

    json echo = {{"command", "baseline"}, {"data", o.data},
                 {"profiles", o.profiles}, {"window", o.window},
                 {"on_fraction", o.on_fraction}, {"out", o.out}};
    write_config_echo(o.out, "baseline", echo);

    std::cout << nilm::report_text(report);
    std::cout << "evaluated " << preds.size() << " windows\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Appliance-level load disaggregation from aggregate power readings"};
    app.require_subcommand(1);

    // synth ------------------------------------------------------------
    SynthOpts so;
    std::string synth_config;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic household dataset");
    synth->add_option("--config", synth_config, "JSON config file");
    auto* so_profiles = synth->add_option("--profiles", so.profiles, "Appliance profiles CSV");
    auto* so_duration = synth->add_option("--duration", so.duration, "Length in seconds");
    auto* so_hz = synth->add_option("--hz", so.hz, "Sample rate in Hz");
    auto* so_noise = synth->add_option("--noise-sd", so.noise_sd, "Aggregate noise SD in watts");
    auto* so_hold = synth->add_option("--hold", so.hold, "State hold interval in seconds");
    auto* so_seed = synth->add_option("--seed", so.seed, "Generator seed");
    auto* so_out = synth->add_option("--out", so.out, "Output directory");

    // train ------------------------------------------------------------
    TrainOpts to;
    std::string train_config;
    CLI::App* train = app.add_subcommand("train", "Train a disaggregation model");
    train->add_option("--config", train_config, "JSON config file");
    auto* to_data = train->add_option("--data", to.data, "Meter data CSV");
    auto* to_profiles = train->add_option("--profiles", to.profiles, "Appliance profiles CSV");
    auto* to_window = train->add_option("--window", to.window, "Window length in readings");
    auto* to_hidden = train->add_option("--hidden", to.hidden, "Hidden units");
    auto* to_lr = train->add_option("--lr", to.lr, "Learning rate");
    auto* to_cdk = train->add_option("--cd-k", to.cd_k, "Contrastive divergence steps");
    auto* to_epochs = train->add_option("--epochs", to.epochs, "Training epochs");
    auto* to_batch = train->add_option("--batch", to.batch, "Batch size");
    auto* to_seed = train->add_option("--seed", to.seed, "Split/init/training seed");
    auto* to_thresh = train->add_option("--threshold", to.threshold, "Decision threshold");
    auto* to_onfrac =
        train->add_option("--on-fraction", to.on_fraction, "Majority fraction for ON labels");
    auto* to_sweep = train->add_flag("--sweep-hidden", to.sweep_hidden,
                                     "Choose hidden size from {32,64,128,256} on validation");
    auto* to_out = train->add_option("--out", to.out, "Output directory");

    // eval -------------------------------------------------------------
    EvalOpts eo;
    std::string eval_config;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a model on the test split");
    eval->add_option("--config", eval_config, "JSON config file");
    auto* eo_data = eval->add_option("--data", eo.data, "Meter data CSV");
    auto* eo_profiles = eval->add_option("--profiles", eo.profiles, "Appliance profiles CSV");
    auto* eo_model = eval->add_option("--model", eo.model, "Model file from train");
    auto* eo_seed = eval->add_option("--seed", eo.seed, "Split seed (must match train)");
    auto* eo_thresh = eval->add_option("--threshold", eo.threshold, "Decision threshold");
    auto* eo_onfrac =
        eval->add_option("--on-fraction", eo.on_fraction, "Majority fraction for ON labels");
    auto* eo_base = eval->add_flag("--with-baseline", eo.with_baseline,
                                   "Also evaluate the combinatorial baseline");
    auto* eo_out = eval->add_option("--out", eo.out, "Output directory");

    // predict ----------------------------------------------------------
    PredictOpts po;
    std::string predict_config;
    CLI::App* predict = app.add_subcommand("predict", "Predict appliance states per window");
    predict->add_option("--config", predict_config, "JSON config file");
    auto* po_data = predict->add_option("--data", po.data, "Meter data CSV (aggregate required)");
    auto* po_model = predict->add_option("--model", po.model, "Model file from train");
    auto* po_thresh = predict->add_option("--threshold", po.threshold, "Decision threshold");
    auto* po_out = predict->add_option("--out", po.out, "Output directory");

    // baseline ----------------------------------------------------------
    BaselineOpts bo;
    std::string baseline_config;
    CLI::App* baseline =
        app.add_subcommand("baseline", "Combinatorial-optimization baseline over all windows");
    baseline->add_option("--config", baseline_config, "JSON config file");
    auto* bo_data = baseline->add_option("--data", bo.data, "Meter data CSV");
    auto* bo_profiles = baseline->add_option("--profiles", bo.profiles, "Appliance profiles CSV");
    auto* bo_window = baseline->add_option("--window", bo.window, "Window length in readings");
    auto* bo_onfrac =
        baseline->add_option("--on-fraction", bo.on_fraction, "Majority fraction for ON labels");
    auto* bo_out = baseline->add_option("--out", bo.out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            if (!synth_config.empty()) {
                json cfg = load_config_file(synth_config);
                check_config_keys(
                    cfg, {"profiles", "duration", "hz", "noise_sd", "hold", "seed", "out"},
                    synth_config);
                cfg_override(cfg, "profiles", so_profiles, so.profiles);
                cfg_override(cfg, "duration", so_duration, so.duration);
                cfg_override(cfg, "hz", so_hz, so.hz);
                cfg_override(cfg, "noise_sd", so_noise, so.noise_sd);
                cfg_override(cfg, "hold", so_hold, so.hold);
                cfg_override(cfg, "seed", so_seed, so.seed);
                cfg_override(cfg, "out", so_out, so.out);
            }
            if (so.profiles.empty()) throw std::runtime_error("synth: --profiles is required");
            if (so.duration == 0) throw std::runtime_error("synth: --duration is required");
            if (auto s = env_seed()) so.seed = *s;
            run_synth(so);
        } else if (train->parsed()) {
            if (!train_config.empty()) {
                json cfg = load_config_file(train_config);
                check_config_keys(cfg,
                                  {"data", "profiles", "window", "hidden", "lr", "cd_k", "epochs",
                                   "batch", "seed", "threshold", "on_fraction", "sweep_hidden",
                                   "out"},
                                  train_config);
                cfg_override(cfg, "data", to_data, to.data);
                cfg_override(cfg, "profiles", to_profiles, to.profiles);
                cfg_override(cfg, "window", to_window, to.window);
                cfg_override(cfg, "hidden", to_hidden, to.hidden);
                cfg_override(cfg, "lr", to_lr, to.lr);
                cfg_override(cfg, "cd_k", to_cdk, to.cd_k);
                cfg_override(cfg, "epochs", to_epochs, to.epochs);
                cfg_override(cfg, "batch", to_batch, to.batch);
                cfg_override(cfg, "seed", to_seed, to.seed);
                cfg_override(cfg, "threshold", to_thresh, to.threshold);
                cfg_override(cfg, "on_fraction", to_onfrac, to.on_fraction);
                cfg_override(cfg, "sweep_hidden", to_sweep, to.sweep_hidden);
                cfg_override(cfg, "out", to_out, to.out);
            }
            if (to.data.empty()) throw std::runtime_error("train: --data is required");
            if (to.profiles.empty()) throw std::runtime_error("train: --profiles is required");
            if (auto s = env_seed()) to.seed = *s;
            run_train(to);
        } else if (eval->parsed()) {
            if (!eval_config.empty()) {
                json cfg = load_config_file(eval_config);
                check_config_keys(cfg,
                                  {"data", "profiles", "model", "seed", "threshold",
                                   "on_fraction", "with_baseline", "out"},
                                  eval_config);
                cfg_override(cfg, "data", eo_data, eo.data);
                cfg_override(cfg, "profiles", eo_profiles, eo.profiles);
                cfg_override(cfg, "model", eo_model, eo.model);
                cfg_override(cfg, "seed", eo_seed, eo.seed);
                cfg_override(cfg, "threshold", eo_thresh, eo.threshold);
                cfg_override(cfg, "on_fraction", eo_onfrac, eo.on_fraction);
                cfg_override(cfg, "with_baseline", eo_base, eo.with_baseline);
                cfg_override(cfg, "out", eo_out, eo.out);
            }
            if (eo.data.empty()) throw std::runtime_error("eval: --data is required");
            if (eo.profiles.empty()) throw std::runtime_error("eval: --profiles is required");
            if (eo.model.empty()) throw std::runtime_error("eval: --model is required");
            if (auto s = env_seed()) eo.seed = *s;
            run_eval(eo);
        } else if (predict->parsed()) {
            if (!predict_config.empty()) {
                json cfg = load_config_file(predict_config);
                check_config_keys(cfg, {"data", "model", "threshold", "out"}, predict_config);
                cfg_override(cfg, "data", po_data, po.data);
                cfg_override(cfg, "model", po_model, po.model);
                cfg_override(cfg, "threshold", po_thresh, po.threshold);
                cfg_override(cfg, "out", po_out, po.out);
            }
            if (po.data.empty()) throw std::runtime_error("predict: --data is required");
            if (po.model.empty()) throw std::runtime_error("predict: --model is required");
            run_predict(po);
        } else if (baseline->parsed()) {
            if (!baseline_config.empty()) {
                json cfg = load_config_file(baseline_config);
                check_config_keys(cfg, {"data", "profiles", "window", "on_fraction", "out"},
                                  baseline_config);
                cfg_override(cfg, "data", bo_data, bo.data);
                cfg_override(cfg, "profiles", bo_profiles, bo.profiles);
                cfg_override(cfg, "window", bo_window, bo.window);
                cfg_override(cfg, "on_fraction", bo_onfrac, bo.on_fraction);
                cfg_override(cfg, "out", bo_out, bo.out);
            }
            if (bo.data.empty()) throw std::runtime_error("baseline: --data is required");
            if (bo.profiles.empty()) throw std::runtime_error("baseline: --profiles is required");
            run_baseline(bo);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
