#pragma once

#include "nilm/dataset.hpp"
#include "nilm/numerics.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nilm {

// Meter CSV: header row first, columns "timestamp" (unix seconds),
// "aggregate_w", then zero or more "dev_<name>_w" submeter columns.
// Timestamps must be strictly increasing with a constant step and all
// readings must be finite and non-negative; violations raise errors that
// name the offending line.
MeterData load_csv(const std::string& path);
void save_csv(const std::string& path, const MeterData& data);

// Appliance profiles CSV with header
// name,avg_on_power_w,on_threshold_w,p_on_off,p_off_on,noise_sd_w.
std::vector<ApplianceProfile> load_profiles(const std::string& path);
void save_profiles(const std::string& path, const std::vector<ApplianceProfile>& profiles);

// Cuts the series into consecutive non-overlapping windows of `window`
// readings; a trailing partial window is dropped. Throws if the series is
// shorter than one window.
std::vector<Vector> window_aggregate(const PowerSeries& series, std::size_t window);

// One label per window by majority: the appliance counts as ON in a window
// when more than on_fraction of its readings exceed the profile threshold.
// Readings beyond the last full window are ignored.
Vector derive_labels(const PowerSeries& appliance, const ApplianceProfile& profile,
                     std::size_t window, double on_fraction = 0.5);

// Min-max scale into [0, 1], clamped. Without a scaler the range is fitted
// from the given windows; a constant signal cannot be fitted.
std::pair<std::vector<Vector>, Scaler> normalize(const std::vector<Vector>& windows,
                                                 std::optional<Scaler> scaler = std::nullopt);
Vector denormalize(const Vector& x, const Scaler& scaler);

struct SplitResult {
    LabeledDataset train;
    LabeledDataset test;
    LabeledDataset validation;
};

// Seeded shuffle followed by a contiguous cut: floor(r0*N) train,
// floor(r1*N) test, remainder validation. Ratios must be positive and sum
// to 1; the dataset must have at least 3 samples.
SplitResult split(const LabeledDataset& ds, const std::array<double, 3>& ratios,
                  std::uint64_t seed);

// Synthetic household: each appliance is a two-state Markov chain that
// starts OFF, re-draws its state every state_hold_s seconds, and while ON
// emits avg_on_power_w plus optional per-appliance Gaussian noise (clamped
// at zero). The aggregate adds measurement noise with sd noise_sd_w.
//
// Draw order per timestep: one noise draw per currently-ON appliance with
// noisy profile, one aggregate noise draw if noise_sd_w > 0, then at hold
// boundaries one transition draw per appliance.
struct SynthResult {
    MeterData meter;
    // states[k][t] is 1 when appliance k was ON at timestep t.
    std::vector<std::vector<std::uint8_t>> states;
};

SynthResult synthesize(const std::vector<ApplianceProfile>& profiles, std::size_t duration_s,
                       double sample_hz, double noise_sd_w, std::uint64_t seed,
                       std::size_t state_hold_s = 1);

// Windows the aggregate and derives one multi-hot label row per window.
// Every profile must have a matching submeter column. Windows stay in raw
// watts; use normalize_dataset to scale them.
LabeledDataset build_dataset(const MeterData& data, const std::vector<ApplianceProfile>& profiles,
                             std::size_t window, double on_fraction = 0.5);

// Replaces sample windows with scaled copies. Fits the scaler when none is
// given (training data), otherwise applies the provided one.
Scaler normalize_dataset(LabeledDataset& ds, std::optional<Scaler> scaler = std::nullopt);

}  // namespace nilm
