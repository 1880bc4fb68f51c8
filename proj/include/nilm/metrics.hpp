#pragma once

#include "nilm/numerics.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace nilm {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
};

// F1 = 2 TP / (2 TP + FN + FP); defined as 0 when the denominator is 0.
double f1_score(const ConfusionCounts& counts);

// Per-class confusion counts over aligned prediction/truth rows. Every row
// must have one binary entry per class.
std::vector<ConfusionCounts> per_class_counts(const std::vector<Vector>& predicted,
                                              const std::vector<Vector>& truth);

// Unweighted mean of per-class F1 over all classes, zero-support included.
double macro_f1(const std::vector<Vector>& predicted, const std::vector<Vector>& truth);

// F1 of the counts pooled across classes.
double micro_f1(const std::vector<Vector>& predicted, const std::vector<Vector>& truth);

// Energy per window in watt-hours implied by binary states at a rated power.
Vector estimate_energy(const Vector& states, double avg_power_w, double window_hours);

// Normalized energy error: sum |true - est| / sum true. The true series must
// have positive total energy.
double nee(const Vector& true_energy, const Vector& est_energy);

// |sum est - sum true| / sum true; insensitive to within-series placement.
double total_energy_error(const Vector& true_energy, const Vector& est_energy);

struct ApplianceEval {
    std::string name;
    double f1 = 0.0;
    double nee = 0.0;
    double total_energy_error = 0.0;
};

struct EvalReport {
    std::string method;
    std::vector<ApplianceEval> per_class;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
};

// Flat key-value lines, one metric per line.
std::string report_text(const EvalReport& report);

// CSV rows "method,class,f1,nee,total_energy_error"; pass with_header to
// prepend the column row once.
std::string report_csv(const EvalReport& report, bool with_header);

}  // namespace nilm
