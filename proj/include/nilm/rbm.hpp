#pragma once

#include "nilm/dataset.hpp"
#include "nilm/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nilm {

// Restricted Boltzmann machine with a multi-hot label block. Visible units x
// carry the normalized aggregate window, label units y carry one bit per
// appliance, and both connect to a shared hidden layer:
//
//   E(y, x, h) = -h^T W x - a^T x - b^T h - c^T y - h^T U y
//
// W is n_hidden x n_visible and U is n_hidden x n_labels.
struct RbmParameters {
    Matrix w;
    Matrix u;
    Vector a;  // visible bias
    Vector b;  // hidden bias
    Vector c;  // label bias

    std::size_t n_visible() const { return w.cols; }
    std::size_t n_hidden() const { return w.rows; }
    std::size_t n_labels() const { return u.cols; }
};

struct TrainConfig {
    std::size_t n_hidden = 128;
    double learning_rate = 0.001;
    std::size_t cd_steps = 2;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
    double threshold = 0.5;
};

// Weights drawn uniformly from [-0.01, 0.01], biases zero.
RbmParameters init_params(std::size_t n_visible, std::size_t n_hidden,
                          std::size_t n_labels, std::uint64_t seed);

double energy(const RbmParameters& p, const Vector& x, const Vector& y, const Vector& h);

// p(h_j = 1 | x, y) = sigmoid(b + W x + U y)
Vector p_h_given_xy(const RbmParameters& p, const Vector& x, const Vector& y);

// p(x_i = 1 | h) = sigmoid(a + W^T h), used as the mean reconstruction.
Vector p_x_given_h(const RbmParameters& p, const Vector& h);

// Softmax label head over c + U^T h, for single-label readout.
Vector p_y_given_h_softmax(const RbmParameters& p, const Vector& h);

// Independent per-label head p(y_l = 1 | h) = sigmoid(c_l + (U^T h)_l).
Vector p_y_given_h_multilabel(const RbmParameters& p, const Vector& h);

// One contrastive-divergence update over a batch, returning new parameters.
//
// Positive phase uses the data-clamped hidden means. The negative phase runs
// cfg.cd_steps Gibbs iterations per sample; hidden states and label
// reconstructions are sampled as bits while visible reconstructions are kept
// as sigmoid means and consume no randomness. Per sample the stream is
// therefore, for each Gibbs step in order: n_hidden hidden draws, then
// n_labels label draws. Gradients are averaged over the batch.
RbmParameters cd_k_update(const RbmParameters& p, const std::vector<Sample>& batch,
                          const TrainConfig& cfg, Rng& rng);

struct MfResult {
    Vector mu;   // label unit means
    Vector tau;  // hidden unit means
    std::size_t iterations = 0;
    double residual = 0.0;
};

// Mean-field inference of the label posterior for an observed window x.
// mu starts at 0.5 and tau at sigmoid(b + W x); each iteration refreshes mu
// from tau and then tau from the new mu, stopping once the largest absolute
// change falls to tol or max_iter is reached.
MfResult mean_field_infer(const RbmParameters& p, const Vector& x,
                          double tol = 1e-6, std::size_t max_iter = 100);

// Thresholds the mean-field label means; mu >= threshold maps to 1.
Vector predict_labels(const RbmParameters& p, const Vector& x, double threshold = 0.5);

// Mean squared error between x and its deterministic one-step reconstruction
// sigmoid(a + W^T p_h_given_xy(x, y)), averaged over the batch.
double reconstruction_error(const RbmParameters& p, const std::vector<Sample>& batch);

// Exact joint distribution over all binary (x, y, h) configurations.
// Feasible only for n_visible + n_labels + n_hidden <= 20.
struct JointTable {
    std::size_t n_visible = 0;
    std::size_t n_labels = 0;
    std::size_t n_hidden = 0;
    std::vector<double> prob;

    std::size_t index(std::uint32_t x_bits, std::uint32_t y_bits, std::uint32_t h_bits) const {
        return (static_cast<std::size_t>(x_bits) << (n_labels + n_hidden)) |
               (static_cast<std::size_t>(y_bits) << n_hidden) | h_bits;
    }
    double at(std::uint32_t x_bits, std::uint32_t y_bits, std::uint32_t h_bits) const {
        return prob[index(x_bits, y_bits, h_bits)];
    }
};

// Bit i of `bits` becomes entry i of the vector.
Vector bits_to_vector(std::uint32_t bits, std::size_t len);

JointTable exact_joint_distribution(const RbmParameters& p);

// Exact log-likelihood gradient of log p(x, y) for one binary sample,
// computed from the enumerated joint: data-clamped expectation minus model
// expectation per parameter block. Returned in RbmParameters layout.
RbmParameters exact_loglik_gradient(const RbmParameters& p, const Sample& sample);

// Versioned text model file: dimensions, label names, normalization range,
// then W, U, a, b, c with full round-trip precision.
struct ModelFile {
    RbmParameters params;
    std::vector<std::string> label_names;
    Scaler scaler;
};

void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

}  // namespace nilm
