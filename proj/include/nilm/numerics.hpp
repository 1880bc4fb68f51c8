#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nilm {

using Vector = std::vector<double>;

// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), v(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

// SplitMix64 generator. One 64-bit word of state, so the same seed yields
// the same stream on every platform. The distributions are implemented on
// top of it by hand because the <random> distributions are not required to
// produce identical streams across standard library implementations, and
// reproducibility is part of this project's contract.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53-bit resolution.
    double next_double();

    double uniform(double lo, double hi);

    // Box-Muller transform; consumes exactly two uniform draws per call.
    double gaussian(double mean, double sd);

    // Uniform integer in [0, n); n must be positive.
    std::uint64_t next_below(std::uint64_t n);

  private:
    std::uint64_t state_;
};

double sigmoid(double z);
Vector sigmoid(const Vector& z);

// Numerically stable softmax (max subtraction). Throws on empty input.
Vector softmax(const Vector& z);

// Entry i is 1.0 with probability p[i]. Consumes exactly one uniform draw
// per entry, in order, regardless of the outcome. Throws if any p[i] is
// outside [0, 1].
Vector bernoulli_sample(const Vector& p, Rng& rng);

// m * x; x.size() must equal m.cols.
Vector matvec(const Matrix& m, const Vector& x);

// m^T * x; x.size() must equal m.rows.
Vector matvec_t(const Matrix& m, const Vector& x);

// m * x + bias; bias.size() must equal m.rows.
Vector affine(const Matrix& m, const Vector& x, const Vector& bias);

}  // namespace nilm
