#include "nilm/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nilm {

std::vector<Vector> window_aggregate(const PowerSeries& series, std::size_t window) {
    if (window == 0) throw std::invalid_argument("window_aggregate: window must be positive");
    if (series.size() < window) {
        throw std::invalid_argument("window_aggregate: series of " +
                                    std::to_string(series.size()) +
                                    " readings is shorter than one window of " +
                                    std::to_string(window));
    }
    const std::size_t count = series.size() / window;
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        auto first = series.watts.begin() + static_cast<std::ptrdiff_t>(w * window);
        out.emplace_back(first, first + static_cast<std::ptrdiff_t>(window));
    }
    return out;
}

Vector derive_labels(const PowerSeries& appliance, const ApplianceProfile& profile,
                     std::size_t window, double on_fraction) {
    if (window == 0) throw std::invalid_argument("derive_labels: window must be positive");
    if (!(on_fraction >= 0.0 && on_fraction < 1.0)) {
        throw std::invalid_argument("derive_labels: on_fraction must be in [0, 1)");
    }
    if (appliance.size() < window) {
        throw std::invalid_argument("derive_labels: series of " +
                                    std::to_string(appliance.size()) +
                                    " readings is shorter than one window of " +
                                    std::to_string(window));
    }
    const std::size_t count = appliance.size() / window;
    Vector labels(count, 0.0);
    for (std::size_t w = 0; w < count; ++w) {
        std::size_t above = 0;
        for (std::size_t t = 0; t < window; ++t) {
            if (appliance.watts[w * window + t] > profile.on_threshold_w) ++above;
        }
        double frac = static_cast<double>(above) / static_cast<double>(window);
        labels[w] = frac > on_fraction ? 1.0 : 0.0;
    }
    return labels;
}

namespace {

Scaler fit_scaler(const std::vector<Vector>& windows) {
    if (windows.empty()) throw std::invalid_argument("normalize: no windows to fit");
    double lo = windows[0][0], hi = windows[0][0];
    for (const Vector& w : windows) {
        for (double v : w) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (lo == hi) {
        throw std::runtime_error("normalize: constant signal, min equals max (" +
                                 std::to_string(lo) + " W)");
    }
    return Scaler{lo, hi};
}

Vector apply_scaler(const Vector& w, const Scaler& s) {
    Vector out(w.size());
    const double span = s.max_watts - s.min_watts;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double v = (w[i] - s.min_watts) / span;
        out[i] = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

}  // namespace

std::pair<std::vector<Vector>, Scaler> normalize(const std::vector<Vector>& windows,
                                                 std::optional<Scaler> scaler) {
    Scaler s = scaler ? *scaler : fit_scaler(windows);
    if (s.max_watts <= s.min_watts) {
        throw std::invalid_argument("normalize: scaler range is empty");
    }
    std::vector<Vector> out;
    out.reserve(windows.size());
    for (const Vector& w : windows) out.push_back(apply_scaler(w, s));
    return {std::move(out), s};
}

Vector denormalize(const Vector& x, const Scaler& scaler) {
    if (scaler.max_watts <= scaler.min_watts) {
        throw std::invalid_argument("denormalize: scaler range is empty");
    }
    Vector out(x.size());
    const double span = scaler.max_watts - scaler.min_watts;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = scaler.min_watts + x[i] * span;
    return out;
}

SplitResult split(const LabeledDataset& ds, const std::array<double, 3>& ratios,
                  std::uint64_t seed) {
    double sum = ratios[0] + ratios[1] + ratios[2];
    for (double r : ratios) {
        if (!(r > 0.0)) throw std::invalid_argument("split: ratios must be positive");
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split: ratios sum to " + std::to_string(sum) +
                                    ", expected 1");
    }
    const std::size_t n = ds.samples.size();
    if (n < 3) {
        throw std::invalid_argument("split: need at least 3 samples, have " + std::to_string(n));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::size_t j = rng.next_below(i + 1);
        std::swap(order[i], order[j]);
    }

    // The epsilon absorbs representation error in ratios like 0.3 so the cut
    // sizes match the mathematical floor.
    auto cut = [&](double r) {
        return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
    };
    std::size_t n_train = cut(ratios[0]);
    std::size_t n_test = cut(ratios[1]);
    if (n_train == 0 || n_test == 0 || n_train + n_test >= n) {
        throw std::invalid_argument("split: ratios leave an empty part for " + std::to_string(n) +
                                    " samples");
    }

    SplitResult out;
    out.train.profiles = out.test.profiles = out.validation.profiles = ds.profiles;
    out.train.scaler = out.test.scaler = out.validation.scaler = ds.scaler;
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& s = ds.samples[order[i]];
        if (i < n_train) {
            out.train.samples.push_back(s);
        } else if (i < n_train + n_test) {
            out.test.samples.push_back(s);
        } else {
            out.validation.samples.push_back(s);
        }
    }
    return out;
}

SynthResult synthesize(const std::vector<ApplianceProfile>& profiles, std::size_t duration_s,
                       double sample_hz, double noise_sd_w, std::uint64_t seed,
                       std::size_t state_hold_s) {
    if (profiles.empty()) throw std::invalid_argument("synthesize: no appliance profiles");
    if (!(sample_hz > 0.0)) throw std::invalid_argument("synthesize: sample_hz must be positive");
    for (const ApplianceProfile& p : profiles) {
        auto bad = [](double q) { return !(q >= 0.0 && q <= 1.0); };
        if (bad(p.synth.p_on_to_off) || bad(p.synth.p_off_to_on)) {
            throw std::invalid_argument("synthesize: transition probabilities for '" + p.name +
                                        "' must lie in [0, 1]");
        }
        if (p.avg_on_power_w < 0.0 || p.synth.noise_sd_w < 0.0) {
            throw std::invalid_argument("synthesize: negative power or noise for '" + p.name +
                                        "'");
        }
    }
    const double period_real = 1.0 / sample_hz;
    const auto period = static_cast<std::size_t>(std::llround(period_real));
    if (period == 0 || std::abs(period_real - static_cast<double>(period)) > 1e-9) {
        throw std::invalid_argument("synthesize: sample period must be a whole number of "
                                    "seconds");
    }
    if (state_hold_s == 0 || state_hold_s % period != 0) {
        throw std::invalid_argument("synthesize: state_hold_s must be a positive multiple of "
                                    "the sample period");
    }
    const std::size_t steps = duration_s / period;
    if (steps == 0) throw std::invalid_argument("synthesize: duration shorter than one sample");
    const std::size_t hold_steps = state_hold_s / period;

    const std::size_t k = profiles.size();
    SynthResult out;
    out.meter.appliance_names.reserve(k);
    out.meter.appliance.resize(k);
    out.states.assign(k, std::vector<std::uint8_t>(steps, 0));
    for (std::size_t i = 0; i < k; ++i) {
        out.meter.appliance_names.push_back(profiles[i].name);
        out.meter.appliance[i].timestamps.reserve(steps);
        out.meter.appliance[i].watts.reserve(steps);
    }
    out.meter.aggregate.timestamps.reserve(steps);
    out.meter.aggregate.watts.reserve(steps);

    Rng rng(seed);
    std::vector<std::uint8_t> on(k, 0);

    for (std::size_t t = 0; t < steps; ++t) {
        const auto ts = static_cast<std::int64_t>(t * period);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double w = 0.0;
            if (on[i]) {
                w = profiles[i].avg_on_power_w;
                if (profiles[i].synth.noise_sd_w > 0.0) {
                    w += rng.gaussian(0.0, profiles[i].synth.noise_sd_w);
                }
                w = std::max(w, 0.0);
            }
            out.states[i][t] = on[i];
            out.meter.appliance[i].timestamps.push_back(ts);
            out.meter.appliance[i].watts.push_back(w);
            total += w;
        }
        if (noise_sd_w > 0.0) total += rng.gaussian(0.0, noise_sd_w);
        out.meter.aggregate.timestamps.push_back(ts);
        out.meter.aggregate.watts.push_back(std::max(total, 0.0));

        if ((t + 1) % hold_steps == 0) {
            for (std::size_t i = 0; i < k; ++i) {
                double u = rng.next_double();
                if (on[i]) {
                    if (u < profiles[i].synth.p_on_to_off) on[i] = 0;
                } else {
                    if (u < profiles[i].synth.p_off_to_on) on[i] = 1;
                }
            }
        }
    }
    return out;
}

LabeledDataset build_dataset(const MeterData& data, const std::vector<ApplianceProfile>& profiles,
                             std::size_t window, double on_fraction) {
    if (profiles.empty()) throw std::invalid_argument("build_dataset: no appliance profiles");

    std::vector<Vector> windows = window_aggregate(data.aggregate, window);
    const std::size_t count = windows.size();

    std::vector<Vector> labels;
    labels.reserve(profiles.size());
    for (const ApplianceProfile& p : profiles) {
        auto it = std::find(data.appliance_names.begin(), data.appliance_names.end(), p.name);
        if (it == data.appliance_names.end()) {
            throw std::invalid_argument("build_dataset: no submeter column for appliance '" +
                                        p.name + "'");
        }
        const PowerSeries& series =
            data.appliance[static_cast<std::size_t>(it - data.appliance_names.begin())];
        if (series.size() != data.aggregate.size()) {
            throw std::invalid_argument("build_dataset: submeter '" + p.name +
                                        "' length differs from the aggregate");
        }
        labels.push_back(derive_labels(series, p, window, on_fraction));
    }

    LabeledDataset ds;
    ds.profiles = profiles;
    ds.samples.resize(count);
    for (std::size_t w = 0; w < count; ++w) {
        Sample& s = ds.samples[w];
        s.x = std::move(windows[w]);
        s.y.resize(profiles.size());
        for (std::size_t i = 0; i < profiles.size(); ++i) s.y[i] = labels[i][w];
        s.window_start = data.aggregate.timestamps[w * window];
    }
    return ds;
}

Scaler normalize_dataset(LabeledDataset& ds, std::optional<Scaler> scaler) {
    std::vector<Vector> windows;
    windows.reserve(ds.samples.size());
    for (Sample& s : ds.samples) windows.push_back(std::move(s.x));
    auto [scaled, fitted] = normalize(windows, scaler);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) ds.samples[i].x = std::move(scaled[i]);
    ds.scaler = fitted;
    return fitted;
}

}  // namespace nilm
