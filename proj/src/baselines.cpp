#include "nilm/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nilm {

double aggregate_power(const Vector& states, const Vector& rated_powers_w) {
    if (states.size() != rated_powers_w.size()) {
        throw std::invalid_argument("aggregate_power: " + std::to_string(states.size()) +
                                    " states for " + std::to_string(rated_powers_w.size()) +
                                    " rated powers");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) total += states[i] * rated_powers_w[i];
    return total;
}

Vector co_disaggregate(double p_agg_w, const Vector& rated_powers_w) {
    const std::size_t n = rated_powers_w.size();
    if (n == 0) throw std::invalid_argument("co_disaggregate: no rated powers");
    if (n > kCoMaxAppliances) {
        throw std::runtime_error("co_disaggregate: " + std::to_string(n) +
                                 " appliances exceed the exhaustive search cap of " +
                                 std::to_string(kCoMaxAppliances));
    }
    if (!(p_agg_w >= 0.0) || !std::isfinite(p_agg_w)) {
        throw std::invalid_argument("co_disaggregate: aggregate power must be finite and "
                                    "non-negative");
    }
    for (double p : rated_powers_w) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument("co_disaggregate: rated powers must be finite and "
                                        "non-negative");
        }
    }

    // Each subset's total is summed in index order, so mathematically equal
    // candidates produce identical doubles and ties are exact.
    auto subset_total = [&](std::uint32_t bits) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if ((bits >> i) & 1u) total += rated_powers_w[i];
        }
        return total;
    };
    auto lex_less = [&](std::uint32_t lhs, std::uint32_t rhs) {
        for (std::size_t i = 0; i < n; ++i) {
            unsigned a = (lhs >> i) & 1u, b = (rhs >> i) & 1u;
            if (a != b) return a < b;
        }
        return false;
    };

    std::uint32_t best_bits = 0;
    double best_residual = std::abs(p_agg_w - subset_total(0));
    int best_on = 0;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t s = 1; s < count; ++s) {
        const auto bits = static_cast<std::uint32_t>(s);
        double residual = std::abs(p_agg_w - subset_total(bits));
        if (residual > best_residual) continue;
        int on = __builtin_popcount(bits);
        if (residual < best_residual || on < best_on ||
            (on == best_on && lex_less(bits, best_bits))) {
            best_bits = bits;
            best_residual = residual;
            best_on = on;
        }
    }

    Vector out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = (best_bits >> i) & 1u ? 1.0 : 0.0;
    return out;
}

std::vector<Vector> co_predict_series(const std::vector<Vector>& windows_w,
                                      const Vector& rated_powers_w) {
    std::vector<Vector> out;
    out.reserve(windows_w.size());
    for (std::size_t w = 0; w < windows_w.size(); ++w) {
        if (windows_w[w].empty()) {
            throw std::invalid_argument("co_predict_series: window " + std::to_string(w) +
                                        " is empty");
        }
        double mean = 0.0;
        for (double v : windows_w[w]) mean += v;
        mean /= static_cast<double>(windows_w[w].size());
        out.push_back(co_disaggregate(mean, rated_powers_w));
    }
    return out;
}

}  // namespace nilm
