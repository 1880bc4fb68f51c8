#pragma once

#include "nilm/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nilm {

// Uniformly sampled power readings in watts. Timestamps are unix seconds.
struct PowerSeries {
    std::vector<std::int64_t> timestamps;
    Vector watts;

    std::size_t size() const { return watts.size(); }
};

// Two-state Markov chain parameters used by the synthetic generator.
// Probabilities are per state-hold interval.
struct SynthParams {
    double p_on_to_off = 0.0;
    double p_off_to_on = 0.0;
    double noise_sd_w = 0.0;
};

struct ApplianceProfile {
    std::string name;
    double avg_on_power_w = 0.0;
    double on_threshold_w = 10.0;
    SynthParams synth;
};

// Min-max normalization fitted on training data only.
struct Scaler {
    double min_watts = 0.0;
    double max_watts = 0.0;
};

// One training/evaluation instance: an aggregate window and its multi-hot
// appliance state labels.
struct Sample {
    Vector x;
    Vector y;
    std::int64_t window_start = 0;
};

struct LabeledDataset {
    std::vector<Sample> samples;
    std::vector<ApplianceProfile> profiles;
    std::optional<Scaler> scaler;
};

// Contents of a meter CSV: the aggregate channel plus any per-appliance
// submeter channels, all on the same time base.
struct MeterData {
    PowerSeries aggregate;
    std::vector<std::string> appliance_names;
    std::vector<PowerSeries> appliance;
};

}  // namespace nilm
