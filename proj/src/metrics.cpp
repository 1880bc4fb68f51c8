#include "nilm/metrics.hpp"

#include "text_util.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nilm {

double f1_score(const ConfusionCounts& counts) {
    const double denom = static_cast<double>(2 * counts.tp + counts.fn + counts.fp);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(counts.tp) / denom;
}

namespace {

std::size_t check_rows(const std::vector<Vector>& predicted, const std::vector<Vector>& truth,
                       const char* op) {
    if (predicted.size() != truth.size()) {
        throw std::invalid_argument(std::string(op) + ": " + std::to_string(predicted.size()) +
                                    " prediction rows for " + std::to_string(truth.size()) +
                                    " truth rows");
    }
    if (truth.empty()) throw std::invalid_argument(std::string(op) + ": no rows");
    const std::size_t classes = truth[0].size();
    if (classes == 0) throw std::invalid_argument(std::string(op) + ": no classes");
    for (std::size_t r = 0; r < truth.size(); ++r) {
        if (predicted[r].size() != classes || truth[r].size() != classes) {
            throw std::invalid_argument(std::string(op) + ": row " + std::to_string(r) +
                                        " does not have " + std::to_string(classes) + " classes");
        }
        for (std::size_t c = 0; c < classes; ++c) {
            if ((predicted[r][c] != 0.0 && predicted[r][c] != 1.0) ||
                (truth[r][c] != 0.0 && truth[r][c] != 1.0)) {
                throw std::invalid_argument(std::string(op) + ": row " + std::to_string(r) +
                                            " contains non-binary entries");
            }
        }
    }
    return classes;
}

}  // namespace

std::vector<ConfusionCounts> per_class_counts(const std::vector<Vector>& predicted,
                                              const std::vector<Vector>& truth) {
    const std::size_t classes = check_rows(predicted, truth, "per_class_counts");
    std::vector<ConfusionCounts> out(classes);
    for (std::size_t r = 0; r < truth.size(); ++r) {
        for (std::size_t c = 0; c < classes; ++c) {
            bool pred = predicted[r][c] == 1.0;
            bool real = truth[r][c] == 1.0;
            if (pred && real) {
                ++out[c].tp;
            } else if (pred && !real) {
                ++out[c].fp;
            } else if (!pred && real) {
                ++out[c].fn;
            } else {
                ++out[c].tn;
            }
        }
    }
    return out;
}

double macro_f1(const std::vector<Vector>& predicted, const std::vector<Vector>& truth) {
    std::vector<ConfusionCounts> counts = per_class_counts(predicted, truth);
    double total = 0.0;
    for (const ConfusionCounts& c : counts) total += f1_score(c);
    return total / static_cast<double>(counts.size());
}

double micro_f1(const std::vector<Vector>& predicted, const std::vector<Vector>& truth) {
    std::vector<ConfusionCounts> counts = per_class_counts(predicted, truth);
    ConfusionCounts pooled;
    for (const ConfusionCounts& c : counts) {
        pooled.tp += c.tp;
        pooled.fp += c.fp;
        pooled.fn += c.fn;
        pooled.tn += c.tn;
    }
    return f1_score(pooled);
}

Vector estimate_energy(const Vector& states, double avg_power_w, double window_hours) {
    if (!(avg_power_w >= 0.0)) {
        throw std::invalid_argument("estimate_energy: avg_power_w must be non-negative");
    }
    if (!(window_hours > 0.0)) {
        throw std::invalid_argument("estimate_energy: window_hours must be positive");
    }
    Vector out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] != 0.0 && states[i] != 1.0) {
            throw std::invalid_argument("estimate_energy: states must be binary");
        }
        out[i] = states[i] * avg_power_w * window_hours;
    }
    return out;
}

namespace {

double checked_true_total(const Vector& true_energy, const Vector& est_energy, const char* op) {
    if (true_energy.size() != est_energy.size()) {
        throw std::invalid_argument(std::string(op) + ": series lengths differ (" +
                                    std::to_string(true_energy.size()) + " vs " +
                                    std::to_string(est_energy.size()) + ")");
    }
    if (true_energy.empty()) throw std::invalid_argument(std::string(op) + ": empty series");
    double total = 0.0;
    for (double v : true_energy) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument(std::string(op) + ": energies must be non-negative");
        }
        total += v;
    }
    for (double v : est_energy) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument(std::string(op) + ": energies must be non-negative");
        }
    }
    if (total <= 0.0) {
        throw std::runtime_error(std::string(op) +
                                 ": undefined, true series has zero total energy");
    }
    return total;
}

}  // namespace

double nee(const Vector& true_energy, const Vector& est_energy) {
    const double total = checked_true_total(true_energy, est_energy, "nee");
    double absdiff = 0.0;
    for (std::size_t i = 0; i < true_energy.size(); ++i) {
        absdiff += std::abs(true_energy[i] - est_energy[i]);
    }
    return absdiff / total;
}

double total_energy_error(const Vector& true_energy, const Vector& est_energy) {
    const double total = checked_true_total(true_energy, est_energy, "total_energy_error");
    double est_total = 0.0;
    for (double v : est_energy) est_total += v;
    return std::abs(est_total - total) / total;
}

std::string report_text(const EvalReport& report) {
    std::ostringstream out;
    out << "method " << report.method << '\n';
    out << "macro_f1 " << fmt_double(report.macro_f1) << '\n';
    out << "micro_f1 " << fmt_double(report.micro_f1) << '\n';
    for (const ApplianceEval& e : report.per_class) {
        out << "f1_" << e.name << ' ' << fmt_double(e.f1) << '\n';
        out << "nee_" << e.name << ' ' << fmt_double(e.nee) << '\n';
        out << "total_energy_error_" << e.name << ' ' << fmt_double(e.total_energy_error)
            << '\n';
    }
    return out.str();
}

std::string report_csv(const EvalReport& report, bool with_header) {
    std::ostringstream out;
    if (with_header) out << "method,class,f1,nee,total_energy_error\n";
    for (const ApplianceEval& e : report.per_class) {
        out << report.method << ',' << e.name << ',' << fmt_double(e.f1) << ','
            << fmt_double(e.nee) << ',' << fmt_double(e.total_energy_error) << '\n';
    }
    return out.str();
}

}  // namespace nilm
