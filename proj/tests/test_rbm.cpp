#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nilm/rbm.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

using namespace nilm;

namespace {

// Energy written straight from the definition, term by term, as the oracle
// for the library implementation.
double naive_energy(const RbmParameters& p, const Vector& x, const Vector& y, const Vector& h) {
    double hwx = 0.0;
    for (std::size_t j = 0; j < p.n_hidden(); ++j)
        for (std::size_t i = 0; i < p.n_visible(); ++i) hwx += h[j] * p.w(j, i) * x[i];
    double ax = 0.0;
    for (std::size_t i = 0; i < p.n_visible(); ++i) ax += p.a[i] * x[i];
    double bh = 0.0;
    for (std::size_t j = 0; j < p.n_hidden(); ++j) bh += p.b[j] * h[j];
    double cy = 0.0;
    for (std::size_t l = 0; l < p.n_labels(); ++l) cy += p.c[l] * y[l];
    double huy = 0.0;
    for (std::size_t j = 0; j < p.n_hidden(); ++j)
        for (std::size_t l = 0; l < p.n_labels(); ++l) huy += h[j] * p.u(j, l) * y[l];
    return -(hwx + ax + bh + cy + huy);
}

RbmParameters random_params(std::size_t nv, std::size_t nh, std::size_t nl, std::uint64_t seed,
                            double scale) {
    RbmParameters p = init_params(nv, nh, nl, seed);
    Rng r(seed * 7919 + 13);
    for (double& v : p.w.v) v = r.uniform(-scale, scale);
    for (double& v : p.u.v) v = r.uniform(-scale, scale);
    for (double& v : p.a) v = r.uniform(-scale, scale);
    for (double& v : p.b) v = r.uniform(-scale, scale);
    for (double& v : p.c) v = r.uniform(-scale, scale);
    return p;
}

double logsumexp(const std::vector<double>& vals) {
    double m = vals[0];
    for (double v : vals) m = std::max(m, v);
    double s = 0.0;
    for (double v : vals) s += std::exp(v - m);
    return m + std::log(s);
}

// log p(x, y) by direct enumeration with naive_energy; independent of both
// exact_joint_distribution and exact_loglik_gradient.
double log_pxy(const RbmParameters& p, const Vector& x, const Vector& y) {
    const std::size_t nh = p.n_hidden(), nv = p.n_visible(), nl = p.n_labels();
    std::vector<double> num;
    for (std::uint32_t hb = 0; hb < (1u << nh); ++hb) {
        num.push_back(-naive_energy(p, x, y, bits_to_vector(hb, nh)));
    }
    std::vector<double> den;
    for (std::uint32_t xb = 0; xb < (1u << nv); ++xb) {
        Vector xv = bits_to_vector(xb, nv);
        for (std::uint32_t yb = 0; yb < (1u << nl); ++yb) {
            Vector yv = bits_to_vector(yb, nl);
            for (std::uint32_t hb = 0; hb < (1u << nh); ++hb) {
                den.push_back(-naive_energy(p, xv, yv, bits_to_vector(hb, nh)));
            }
        }
    }
    return logsumexp(num) - logsumexp(den);
}

double* param_coord(RbmParameters& p, std::size_t k) {
    std::size_t nw = p.w.v.size(), nu = p.u.v.size(), na = p.a.size(), nb = p.b.size();
    if (k < nw) return &p.w.v[k];
    k -= nw;
    if (k < nu) return &p.u.v[k];
    k -= nu;
    if (k < na) return &p.a[k];
    k -= na;
    if (k < nb) return &p.b[k];
    k -= nb;
    return &p.c[k];
}

double grad_coord(const RbmParameters& g, std::size_t k) {
    RbmParameters& gm = const_cast<RbmParameters&>(g);
    return *param_coord(gm, k);
}

std::size_t param_count(const RbmParameters& p) {
    return p.w.v.size() + p.u.v.size() + p.a.size() + p.b.size() + p.c.size();
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("init_params shapes, ranges and determinism") {
    RbmParameters p = init_params(6, 4, 3, 99);
    CHECK(p.n_visible() == 6);
    CHECK(p.n_hidden() == 4);
    CHECK(p.n_labels() == 3);
    CHECK(p.w.rows == 4);
    CHECK(p.w.cols == 6);
    CHECK(p.u.rows == 4);
    CHECK(p.u.cols == 3);
    for (double v : p.w.v) {
        CHECK(v >= -0.01);
        CHECK(v <= 0.01);
    }
    for (double v : p.u.v) {
        CHECK(v >= -0.01);
        CHECK(v <= 0.01);
    }
    for (double v : p.a) CHECK(v == 0.0);
    for (double v : p.b) CHECK(v == 0.0);
    for (double v : p.c) CHECK(v == 0.0);

    RbmParameters q = init_params(6, 4, 3, 99);
    CHECK(p.w.v == q.w.v);
    CHECK(p.u.v == q.u.v);
    RbmParameters r = init_params(6, 4, 3, 100);
    CHECK(p.w.v != r.w.v);
    CHECK_THROWS_AS((void)init_params(0, 4, 3, 1), std::invalid_argument);
}

TEST_CASE("energy matches the per-term oracle") {
    RbmParameters p = random_params(5, 4, 3, 11, 1.5);
    Rng r(12);
    for (int trial = 0; trial < 50; ++trial) {
        Vector x(5), y(3), h(4);
        for (double& v : x) v = r.uniform(0.0, 1.0);
        for (double& v : y) v = r.next_double() < 0.5 ? 0.0 : 1.0;
        for (double& v : h) v = r.next_double() < 0.5 ? 0.0 : 1.0;
        CHECK(energy(p, x, y, h) ==
              doctest::Approx(naive_energy(p, x, y, h)).epsilon(1e-12));
    }
}

TEST_CASE("energy of the all-zero configuration is zero") {
    RbmParameters p = random_params(4, 3, 2, 21, 2.0);
    Vector x(4, 0.0), y(2, 0.0), h(3, 0.0);
    CHECK(energy(p, x, y, h) == 0.0);
}

TEST_CASE("energy is linear in the parameters") {
    RbmParameters p = random_params(4, 3, 2, 31, 1.0);
    Rng r(32);
    Vector x(4), y(2), h(3);
    for (double& v : x) v = r.uniform(0.0, 1.0);
    for (double& v : y) v = r.next_double() < 0.5 ? 0.0 : 1.0;
    for (double& v : h) v = r.next_double() < 0.5 ? 0.0 : 1.0;

    RbmParameters doubled = p;
    for (double& v : doubled.w.v) v *= 2.0;
    for (double& v : doubled.u.v) v *= 2.0;
    for (double& v : doubled.a) v *= 2.0;
    for (double& v : doubled.b) v *= 2.0;
    for (double& v : doubled.c) v *= 2.0;
    CHECK(energy(doubled, x, y, h) == doctest::Approx(2.0 * energy(p, x, y, h)).epsilon(1e-12));
}

TEST_CASE("energy rejects mismatched shapes") {
    RbmParameters p = init_params(3, 2, 2, 1);
    Vector x(3, 0.0), y(2, 0.0);
    CHECK_THROWS_AS((void)energy(p, x, y, Vector(5, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS((void)energy(p, Vector(1, 0.0), y, Vector(2, 0.0)), std::invalid_argument);
}

TEST_CASE("conditionals agree with the enumerated joint") {
    RbmParameters p = random_params(3, 2, 2, 77, 1.5);
    JointTable t = exact_joint_distribution(p);

    double total = 0.0;
    for (double q : t.prob) total += q;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    // p(h_j = 1 | x, y)
    for (std::uint32_t xb = 0; xb < 8; ++xb) {
        Vector x = bits_to_vector(xb, 3);
        for (std::uint32_t yb = 0; yb < 4; ++yb) {
            Vector y = bits_to_vector(yb, 2);
            Vector ph = p_h_given_xy(p, x, y);
            for (std::size_t j = 0; j < 2; ++j) {
                double on = 0.0, all = 0.0;
                for (std::uint32_t hb = 0; hb < 4; ++hb) {
                    double q = t.at(xb, yb, hb);
                    all += q;
                    if ((hb >> j) & 1u) on += q;
                }
                CHECK(ph[j] == doctest::Approx(on / all).epsilon(1e-10));
            }
        }
    }

    // p(x_i = 1 | h) and the per-label head p(y_l = 1 | h)
    for (std::uint32_t hb = 0; hb < 4; ++hb) {
        Vector h = bits_to_vector(hb, 2);
        Vector px = p_x_given_h(p, h);
        Vector py = p_y_given_h_multilabel(p, h);
        double all = 0.0;
        Vector x_on(3, 0.0), y_on(2, 0.0);
        for (std::uint32_t xb = 0; xb < 8; ++xb) {
            for (std::uint32_t yb = 0; yb < 4; ++yb) {
                double q = t.at(xb, yb, hb);
                all += q;
                for (std::size_t i = 0; i < 3; ++i)
                    if ((xb >> i) & 1u) x_on[i] += q;
                for (std::size_t l = 0; l < 2; ++l)
                    if ((yb >> l) & 1u) y_on[l] += q;
            }
        }
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(px[i] == doctest::Approx(x_on[i] / all).epsilon(1e-10));
        }
        for (std::size_t l = 0; l < 2; ++l) {
            CHECK(py[l] == doctest::Approx(y_on[l] / all).epsilon(1e-10));
        }
    }
}

TEST_CASE("softmax label head matches the joint restricted to one-hot labels") {
    RbmParameters p = random_params(3, 2, 3, 55, 1.2);
    JointTable t = exact_joint_distribution(p);
    for (std::uint32_t hb = 0; hb < 4; ++hb) {
        Vector h = bits_to_vector(hb, 2);
        Vector soft = p_y_given_h_softmax(p, h);
        Vector mass(3, 0.0);
        double all = 0.0;
        for (std::size_t l = 0; l < 3; ++l) {
            std::uint32_t yb = 1u << l;
            for (std::uint32_t xb = 0; xb < 8; ++xb) mass[l] += t.at(xb, yb, hb);
            all += mass[l];
        }
        for (std::size_t l = 0; l < 3; ++l) {
            CHECK(soft[l] == doctest::Approx(mass[l] / all).epsilon(1e-10));
        }
    }
}

TEST_CASE("joint table matches direct Boltzmann weights") {
    RbmParameters p = random_params(2, 2, 2, 41, 1.0);
    JointTable t = exact_joint_distribution(p);
    double z = 0.0;
    for (std::uint32_t xb = 0; xb < 4; ++xb)
        for (std::uint32_t yb = 0; yb < 4; ++yb)
            for (std::uint32_t hb = 0; hb < 4; ++hb)
                z += std::exp(-naive_energy(p, bits_to_vector(xb, 2), bits_to_vector(yb, 2),
                                            bits_to_vector(hb, 2)));
    for (std::uint32_t xb = 0; xb < 4; ++xb) {
        for (std::uint32_t yb = 0; yb < 4; ++yb) {
            for (std::uint32_t hb = 0; hb < 4; ++hb) {
                double want = std::exp(-naive_energy(p, bits_to_vector(xb, 2),
                                                     bits_to_vector(yb, 2),
                                                     bits_to_vector(hb, 2))) / z;
                CHECK(t.at(xb, yb, hb) == doctest::Approx(want).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("enumeration refuses oversized models") {
    RbmParameters p = init_params(10, 6, 5, 3);
    CHECK_THROWS_AS((void)exact_joint_distribution(p), std::runtime_error);
}

TEST_CASE("one CD step from zero parameters, every factor hand-computed") {
    // With all parameters zero every conditional is flat: the data-clamped
    // hidden means are 0.5, the visible reconstruction is 0.5, and the final
    // hidden means are again 0.5 whatever was sampled. Only the label
    // reconstruction depends on the stream: draws 1..2 are the hidden
    // samples, draws 3..4 the label samples.
    RbmParameters p0;
    p0.w = Matrix(2, 3);
    p0.u = Matrix(2, 2);
    p0.a.assign(3, 0.0);
    p0.b.assign(2, 0.0);
    p0.c.assign(2, 0.0);

    Sample s;
    s.x = {1.0, 0.0, 1.0};
    s.y = {1.0, 0.0};

    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.cd_steps = 1;

    Rng rng(42);
    RbmParameters p1 = cd_k_update(p0, {s}, cfg, rng);

    Rng replay(42);
    (void)replay.next_double();  // hidden draw 1
    (void)replay.next_double();  // hidden draw 2
    double ytilde0 = replay.next_double() < 0.5 ? 1.0 : 0.0;
    double ytilde1 = replay.next_double() < 0.5 ? 1.0 : 0.0;

    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < 3; ++i) {
            double want = 0.1 * (0.5 * s.x[i] - 0.5 * 0.5);
            CHECK(p1.w(j, i) == doctest::Approx(want).epsilon(1e-15));
        }
        CHECK(p1.u(j, 0) == doctest::Approx(0.1 * (0.5 * s.y[0] - 0.5 * ytilde0)).epsilon(1e-15));
        CHECK(p1.u(j, 1) == doctest::Approx(0.1 * (0.5 * s.y[1] - 0.5 * ytilde1)).epsilon(1e-15));
        CHECK(p1.b[j] == 0.0);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(p1.a[i] == doctest::Approx(0.1 * (s.x[i] - 0.5)).epsilon(1e-15));
    }
    CHECK(p1.c[0] == doctest::Approx(0.1 * (s.y[0] - ytilde0)).epsilon(1e-15));
    CHECK(p1.c[1] == doctest::Approx(0.1 * (s.y[1] - ytilde1)).epsilon(1e-15));
}

TEST_CASE("cd_k_update consumes a fixed number of draws per sample") {
    RbmParameters p = random_params(4, 3, 2, 17, 0.5);
    std::vector<Sample> batch;
    Rng data_rng(5);
    for (int n = 0; n < 3; ++n) {
        Sample s;
        s.x = bernoulli_sample(Vector(4, 0.5), data_rng);
        s.y = bernoulli_sample(Vector(2, 0.5), data_rng);
        batch.push_back(s);
    }
    TrainConfig cfg;
    cfg.cd_steps = 2;

    Rng used(91), ref(91);
    (void)cd_k_update(p, batch, cfg, used);
    // 3 samples * 2 steps * (3 hidden + 2 label) draws
    for (int i = 0; i < 3 * 2 * (3 + 2); ++i) (void)ref.next_u64();
    CHECK(used.next_u64() == ref.next_u64());
}

TEST_CASE("cd_k_update batch update is the average of per-sample updates") {
    // Zero parameters keep every factor constant except the sampled label
    // reconstructions, which the replay below reproduces draw by draw.
    RbmParameters p0;
    p0.w = Matrix(2, 2);
    p0.u = Matrix(2, 2);
    p0.a.assign(2, 0.0);
    p0.b.assign(2, 0.0);
    p0.c.assign(2, 0.0);

    Sample s1, s2;
    s1.x = {1.0, 0.0};
    s1.y = {0.0, 1.0};
    s2.x = {0.0, 1.0};
    s2.y = {1.0, 1.0};

    TrainConfig cfg;
    cfg.learning_rate = 0.2;
    cfg.cd_steps = 1;

    Rng rng(7);
    RbmParameters got = cd_k_update(p0, {s1, s2}, cfg, rng);

    Rng replay(7);
    auto ytilde = [&](const Sample&) {
        (void)replay.next_double();
        (void)replay.next_double();
        double y0 = replay.next_double() < 0.5 ? 1.0 : 0.0;
        double y1 = replay.next_double() < 0.5 ? 1.0 : 0.0;
        return Vector{y0, y1};
    };
    Vector yt1 = ytilde(s1);
    Vector yt2 = ytilde(s2);

    for (std::size_t l = 0; l < 2; ++l) {
        double want_c = 0.2 * 0.5 * ((s1.y[l] - yt1[l]) + (s2.y[l] - yt2[l]));
        CHECK(got.c[l] == doctest::Approx(want_c).epsilon(1e-15));
        for (std::size_t j = 0; j < 2; ++j) {
            double want_u =
                0.2 * 0.5 * ((0.5 * s1.y[l] - 0.5 * yt1[l]) + (0.5 * s2.y[l] - 0.5 * yt2[l]));
            CHECK(got.u(j, l) == doctest::Approx(want_u).epsilon(1e-15));
        }
    }
    for (std::size_t i = 0; i < 2; ++i) {
        double want_a = 0.2 * 0.5 * ((s1.x[i] - 0.5) + (s2.x[i] - 0.5));
        CHECK(got.a[i] == doctest::Approx(want_a).epsilon(1e-15));
    }
}

TEST_CASE("cd_k_update validation") {
    RbmParameters p = init_params(3, 2, 2, 1);
    TrainConfig cfg;
    Rng rng(1);
    CHECK_THROWS_AS((void)cd_k_update(p, {}, cfg, rng), std::invalid_argument);

    Sample bad;
    bad.x = {1.0, 0.0};  // wrong length
    bad.y = {1.0, 0.0};
    CHECK_THROWS_AS((void)cd_k_update(p, {bad}, cfg, rng), std::invalid_argument);

    Sample ok;
    ok.x = {1.0, 0.0, 1.0};
    ok.y = {1.0, 0.0};
    TrainConfig zero_k = cfg;
    zero_k.cd_steps = 0;
    CHECK_THROWS_AS((void)cd_k_update(p, {ok}, zero_k, rng), std::invalid_argument);
    TrainConfig bad_lr = cfg;
    bad_lr.learning_rate = 0.0;
    CHECK_THROWS_AS((void)cd_k_update(p, {ok}, bad_lr, rng), std::invalid_argument);
}

TEST_CASE("CD training lowers reconstruction error on a toy dataset") {
    std::vector<Sample> data;
    Sample s1, s2, s3, s4;
    s1.x = {1, 1, 1, 0, 0, 0};
    s1.y = {1, 0};
    s2.x = {0, 0, 0, 1, 1, 1};
    s2.y = {0, 1};
    s3.x = {1, 1, 0, 0, 0, 0};
    s3.y = {1, 0};
    s4.x = {0, 0, 0, 0, 1, 1};
    s4.y = {0, 1};
    data = {s1, s2, s3, s4};

    RbmParameters p = init_params(6, 8, 2, 3);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.cd_steps = 1;

    double before = reconstruction_error(p, data);
    Rng rng(999);
    for (int epoch = 0; epoch < 300; ++epoch) p = cd_k_update(p, data, cfg, rng);
    double after = reconstruction_error(p, data);

    CHECK(after < before);
    CHECK(after < 0.1);
}

TEST_CASE("CD training recovers strongly-coupled labels via mean field") {
    Sample s1, s2;
    s1.x = {1, 1, 1, 0, 0, 0};
    s1.y = {1, 0};
    s2.x = {0, 0, 0, 1, 1, 1};
    s2.y = {0, 1};
    std::vector<Sample> data{s1, s2};

    RbmParameters p = init_params(6, 8, 2, 4);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.cd_steps = 1;
    Rng rng(2718);
    for (int epoch = 0; epoch < 600; ++epoch) p = cd_k_update(p, data, cfg, rng);

    CHECK(predict_labels(p, s1.x, 0.5) == s1.y);
    CHECK(predict_labels(p, s2.x, 0.5) == s2.y);
}

TEST_CASE("exact gradient matches central finite differences") {
    const double eps = 1e-5;
    int checked = 0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        std::size_t nv = 2 + trial % 2;  // 2 or 3 visible
        std::size_t nh = 2;
        std::size_t nl = 2 + (trial / 2) % 2;  // 2 or 3 labels
        RbmParameters p = random_params(nv, nh, nl, 1000 + trial, 1.0);

        Rng r(2000 + trial);
        Sample s;
        s.x = bernoulli_sample(Vector(nv, 0.5), r);
        s.y = bernoulli_sample(Vector(nl, 0.5), r);

        RbmParameters g = exact_loglik_gradient(p, s);
        for (std::size_t k = 0; k < param_count(p); ++k) {
            RbmParameters plus = p, minus = p;
            *param_coord(plus, k) += eps;
            *param_coord(minus, k) -= eps;
            double fd = (log_pxy(plus, s.x, s.y) - log_pxy(minus, s.x, s.y)) / (2.0 * eps);
            double rel = std::abs(grad_coord(g, k) - fd) / std::max(1.0, std::abs(fd));
            CHECK(rel <= 1e-6);
            ++checked;
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("exact gradient closed forms at zero coupling") {
    // With W = U = 0 the joint factorizes, so per coordinate:
    //   da_i = x_i - sigmoid(a_i), dc_l = y_l - sigmoid(c_l), db_j = 0,
    //   dW_ji = sigmoid(b_j) (x_i - sigmoid(a_i)),
    //   dU_jl = sigmoid(b_j) (y_l - sigmoid(c_l)).
    RbmParameters p;
    p.w = Matrix(3, 4);
    p.u = Matrix(3, 2);
    p.a = {0.3, -1.2, 0.7, 2.0};
    p.b = {-0.5, 0.9, 0.1};
    p.c = {1.1, -0.4};

    Sample s;
    s.x = {1.0, 0.0, 1.0, 0.0};
    s.y = {0.0, 1.0};

    RbmParameters g = exact_loglik_gradient(p, s);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(g.a[i] == doctest::Approx(s.x[i] - sigmoid(p.a[i])).epsilon(1e-10));
    }
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(g.c[l] == doctest::Approx(s.y[l] - sigmoid(p.c[l])).epsilon(1e-10));
    }
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(g.b[j] == doctest::Approx(0.0).epsilon(1e-10));
        for (std::size_t i = 0; i < 4; ++i) {
            double want = sigmoid(p.b[j]) * (s.x[i] - sigmoid(p.a[i]));
            CHECK(g.w(j, i) == doctest::Approx(want).epsilon(1e-10));
        }
        for (std::size_t l = 0; l < 2; ++l) {
            double want = sigmoid(p.b[j]) * (s.y[l] - sigmoid(p.c[l]));
            CHECK(g.u(j, l) == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("exact gradient ascent increases the data log-likelihood") {
    Sample s1, s2;
    s1.x = {1.0, 1.0, 0.0};
    s1.y = {1.0, 0.0};
    s2.x = {0.0, 0.0, 1.0};
    s2.y = {0.0, 1.0};
    std::vector<Sample> data{s1, s2};

    RbmParameters p = random_params(3, 2, 2, 8, 0.1);
    auto ll = [&](const RbmParameters& q) {
        return log_pxy(q, s1.x, s1.y) + log_pxy(q, s2.x, s2.y);
    };

    double prev = ll(p);
    const double before = prev;
    const double lr = 0.2;
    for (int step = 0; step < 150; ++step) {
        RbmParameters g1 = exact_loglik_gradient(p, s1);
        RbmParameters g2 = exact_loglik_gradient(p, s2);
        for (std::size_t k = 0; k < param_count(p); ++k) {
            *param_coord(p, k) += lr * 0.5 * (grad_coord(g1, k) + grad_coord(g2, k));
        }
        double cur = ll(p);
        CHECK(cur >= prev - 1e-9);
        prev = cur;
    }
    CHECK(prev > before + 0.5);
}

TEST_CASE("exact gradient rejects non-binary samples") {
    RbmParameters p = init_params(3, 2, 2, 6);
    Sample s;
    s.x = {0.5, 0.0, 1.0};
    s.y = {1.0, 0.0};
    CHECK_THROWS_AS((void)exact_loglik_gradient(p, s), std::invalid_argument);
}

TEST_CASE("mean field with zero label coupling settles in one sweep") {
    RbmParameters p = random_params(4, 3, 2, 61, 1.0);
    for (double& v : p.u.v) v = 0.0;
    Rng r(62);
    Vector x(4);
    for (double& v : x) v = r.uniform(0.0, 1.0);

    MfResult mf = mean_field_infer(p, x);
    Vector want_tau = sigmoid(affine(p.w, x, p.b));
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(mf.mu[l] == doctest::Approx(sigmoid(p.c[l])).epsilon(1e-12));
    }
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(mf.tau[j] == doctest::Approx(want_tau[j]).epsilon(1e-12));
    }
    CHECK(mf.iterations <= 2);
    CHECK(mf.residual <= 1e-6);
}

TEST_CASE("mean field reaches a stationary point of its own updates") {
    RbmParameters p = random_params(5, 4, 3, 71, 0.8);
    Rng r(72);
    Vector x(5);
    for (double& v : x) v = r.uniform(0.0, 1.0);

    MfResult mf = mean_field_infer(p, x, 1e-10, 500);
    REQUIRE(mf.residual <= 1e-10);

    Vector wx = affine(p.w, x, p.b);
    Vector mu_z = matvec_t(p.u, mf.tau);
    for (std::size_t l = 0; l < mu_z.size(); ++l) mu_z[l] += p.c[l];
    Vector mu_fix = sigmoid(mu_z);
    Vector tau_z = matvec(p.u, mf.mu);
    for (std::size_t j = 0; j < tau_z.size(); ++j) tau_z[j] += wx[j];
    Vector tau_fix = sigmoid(tau_z);
    for (std::size_t l = 0; l < mu_fix.size(); ++l) {
        CHECK(mf.mu[l] == doctest::Approx(mu_fix[l]).epsilon(1e-8));
    }
    for (std::size_t j = 0; j < tau_fix.size(); ++j) {
        CHECK(mf.tau[j] == doctest::Approx(tau_fix[j]).epsilon(1e-8));
    }
}

TEST_CASE("mean field determinism and iteration cap") {
    RbmParameters p = random_params(4, 3, 2, 81, 3.0);
    Vector x{0.2, 0.9, 0.4, 0.7};
    MfResult m1 = mean_field_infer(p, x);
    MfResult m2 = mean_field_infer(p, x);
    CHECK(m1.mu == m2.mu);
    CHECK(m1.tau == m2.tau);
    CHECK(m1.iterations == m2.iterations);
    CHECK(m1.iterations <= 100);

    MfResult capped = mean_field_infer(p, x, 1e-300, 5);
    CHECK(capped.iterations == 5);
    CHECK_THROWS_AS((void)mean_field_infer(p, x, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS((void)mean_field_infer(p, x, 1e-6, 0), std::invalid_argument);
}

TEST_CASE("predict_labels thresholds the label means, ties go to 1") {
    RbmParameters p = init_params(3, 2, 2, 5);
    for (double& v : p.w.v) v = 0.0;
    for (double& v : p.u.v) v = 0.0;
    // mu is exactly sigmoid(c) here.
    p.c = {0.0, 0.0};
    Vector x{0.1, 0.5, 0.9};
    CHECK(predict_labels(p, x, 0.5) == Vector{1.0, 1.0});

    p.c = {-1.0, 1.0};
    CHECK(predict_labels(p, x, 0.5) == Vector{0.0, 1.0});
    CHECK(predict_labels(p, x, 0.2) == Vector{1.0, 1.0});
    CHECK_THROWS_AS((void)predict_labels(p, x, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)predict_labels(p, x, 1.0), std::invalid_argument);
}

TEST_CASE("reconstruction error of a zero model on binary data is 0.25") {
    RbmParameters p;
    p.w = Matrix(4, 4);
    p.u = Matrix(4, 2);
    p.a.assign(4, 0.0);
    p.b.assign(4, 0.0);
    p.c.assign(2, 0.0);
    Sample s;
    s.x = {1.0, 0.0, 1.0, 0.0};
    s.y = {1.0, 0.0};
    CHECK(reconstruction_error(p, {s}) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS((void)reconstruction_error(p, {}), std::invalid_argument);
}

TEST_CASE("model file round-trips bit for bit") {
    ModelFile m;
    m.params = random_params(5, 3, 2, 303, 2.0);
    m.params.a[0] = 0.1;             // classic non-representable decimal
    m.params.w(0, 0) = 1.0 / 3.0;
    m.params.w(1, 1) = -1.23456789012345e-7;
    m.label_names = {"fridge", "kettle"};
    m.scaler = {3.5, 4187.25};

    std::string path = temp_path("nilm_model_roundtrip.txt");
    save_model(path, m);
    ModelFile r = load_model(path);

    CHECK(r.params.w.rows == m.params.w.rows);
    CHECK(r.params.w.cols == m.params.w.cols);
    CHECK(r.params.w.v == m.params.w.v);
    CHECK(r.params.u.v == m.params.u.v);
    CHECK(r.params.a == m.params.a);
    CHECK(r.params.b == m.params.b);
    CHECK(r.params.c == m.params.c);
    CHECK(r.label_names == m.label_names);
    CHECK(r.scaler.min_watts == m.scaler.min_watts);
    CHECK(r.scaler.max_watts == m.scaler.max_watts);
    std::filesystem::remove(path);
}

TEST_CASE("model file validation and errors") {
    ModelFile m;
    m.params = init_params(3, 2, 2, 1);
    m.label_names = {"fridge", "bad name"};
    std::string path = temp_path("nilm_model_bad.txt");
    CHECK_THROWS_AS(save_model(path, m), std::invalid_argument);

    m.label_names = {"fridge"};
    CHECK_THROWS_AS(save_model(path, m), std::invalid_argument);

    CHECK_THROWS_AS((void)load_model(temp_path("nilm_model_missing.txt")), std::runtime_error);

    // Future format versions are rejected.
    m.label_names = {"fridge", "kettle"};
    save_model(path, m);
    {
        std::ifstream in(path);
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        body.replace(body.find("mlrbm 1"), 7, "mlrbm 2");
        std::ofstream out(path);
        out << body;
    }
    CHECK_THROWS_AS((void)load_model(path), std::runtime_error);

    // Truncation is detected.
    save_model(path, m);
    {
        std::ifstream in(path);
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(path);
        out << body.substr(0, body.size() / 2);
    }
    CHECK_THROWS_AS((void)load_model(path), std::runtime_error);
    std::filesystem::remove(path);
}
