#include "nilm/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nilm {

std::uint64_t Rng::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
}

double Rng::gaussian(double mean, double sd) {
    // u1 is mapped into (0, 1] so the log is always finite.
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    return next_u64() % n;
}

double sigmoid(double z) {
    // Evaluate through the negative branch only; exp never overflows.
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

Vector sigmoid(const Vector& z) {
    Vector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
    return out;
}

Vector softmax(const Vector& z) {
    if (z.empty()) throw std::invalid_argument("softmax: empty input");
    double zmax = z[0];
    for (double zi : z) zmax = std::max(zmax, zi);
    Vector out(z.size());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - zmax);
        total += out[i];
    }
    for (double& o : out) o /= total;
    return out;
}

Vector bernoulli_sample(const Vector& p, Rng& rng) {
    for (double pi : p) {
        if (!(pi >= 0.0 && pi <= 1.0)) {
            throw std::invalid_argument("bernoulli_sample: invalid probability " +
                                        std::to_string(pi));
        }
    }
    Vector out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] = rng.next_double() < p[i] ? 1.0 : 0.0;
    }
    return out;
}

namespace {

[[noreturn]] void throw_shape(const char* op, const Matrix& m, std::size_t xlen) {
    throw std::invalid_argument(std::string(op) + ": " + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols) + " matrix incompatible with length-" +
                                std::to_string(xlen) + " vector");
}

}  // namespace

Vector matvec(const Matrix& m, const Vector& x) {
    if (x.size() != m.cols) throw_shape("matvec", m, x.size());
    Vector out(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.v.data() + r * m.cols;
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
    return out;
}

Vector matvec_t(const Matrix& m, const Vector& x) {
    if (x.size() != m.rows) throw_shape("matvec_t", m, x.size());
    Vector out(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.v.data() + r * m.cols;
        double xr = x[r];
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c] * xr;
    }
    return out;
}

Vector affine(const Matrix& m, const Vector& x, const Vector& bias) {
    if (bias.size() != m.rows) {
        throw std::invalid_argument("affine: bias length " + std::to_string(bias.size()) +
                                    " does not match " + std::to_string(m.rows) + " rows");
    }
    Vector out = matvec(m, x);
    for (std::size_t r = 0; r < m.rows; ++r) out[r] += bias[r];
    return out;
}

}  // namespace nilm
