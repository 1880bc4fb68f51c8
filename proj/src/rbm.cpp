#include "nilm/rbm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nilm {

namespace {

void check_dims(const RbmParameters& p, const Vector* x, const Vector* y, const Vector* h,
                const char* op) {
    auto fail = [&](const char* what, std::size_t got, std::size_t want) {
        throw std::invalid_argument(std::string(op) + ": " + what + " has length " +
                                    std::to_string(got) + ", expected " + std::to_string(want));
    };
    if (p.u.rows != p.w.rows) {
        throw std::invalid_argument(std::string(op) + ": W and U disagree on hidden size");
    }
    if (x && x->size() != p.n_visible()) fail("x", x->size(), p.n_visible());
    if (y && y->size() != p.n_labels()) fail("y", y->size(), p.n_labels());
    if (h && h->size() != p.n_hidden()) fail("h", h->size(), p.n_hidden());
}

void check_binary(const Vector& v, const char* op, const char* what) {
    for (double e : v) {
        if (e != 0.0 && e != 1.0) {
            throw std::invalid_argument(std::string(op) + ": " + what +
                                        " must be binary, found " + std::to_string(e));
        }
    }
}

}  // namespace

RbmParameters init_params(std::size_t n_visible, std::size_t n_hidden, std::size_t n_labels,
                          std::uint64_t seed) {
    if (n_visible == 0 || n_hidden == 0 || n_labels == 0) {
        throw std::invalid_argument("init_params: all layer sizes must be positive");
    }
    RbmParameters p;
    p.w = Matrix(n_hidden, n_visible);
    p.u = Matrix(n_hidden, n_labels);
    p.a.assign(n_visible, 0.0);
    p.b.assign(n_hidden, 0.0);
    p.c.assign(n_labels, 0.0);
    Rng rng(seed);
    for (double& v : p.w.v) v = rng.uniform(-0.01, 0.01);
    for (double& v : p.u.v) v = rng.uniform(-0.01, 0.01);
    return p;
}

double energy(const RbmParameters& p, const Vector& x, const Vector& y, const Vector& h) {
    check_dims(p, &x, &y, &h, "energy");
    double e = 0.0;
    for (std::size_t j = 0; j < p.n_hidden(); ++j) {
        const double* wrow = p.w.v.data() + j * p.w.cols;
        double acc = 0.0;
        for (std::size_t i = 0; i < p.n_visible(); ++i) acc += wrow[i] * x[i];
        e -= h[j] * acc;
    }
    for (std::size_t i = 0; i < p.n_visible(); ++i) e -= p.a[i] * x[i];
    for (std::size_t j = 0; j < p.n_hidden(); ++j) e -= p.b[j] * h[j];
    for (std::size_t l = 0; l < p.n_labels(); ++l) e -= p.c[l] * y[l];
    for (std::size_t j = 0; j < p.n_hidden(); ++j) {
        const double* urow = p.u.v.data() + j * p.u.cols;
        double acc = 0.0;
        for (std::size_t l = 0; l < p.n_labels(); ++l) acc += urow[l] * y[l];
        e -= h[j] * acc;
    }
    return e;
}

Vector p_h_given_xy(const RbmParameters& p, const Vector& x, const Vector& y) {
    check_dims(p, &x, &y, nullptr, "p_h_given_xy");
    Vector z = affine(p.w, x, p.b);
    Vector uy = matvec(p.u, y);
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += uy[j];
    return sigmoid(z);
}

Vector p_x_given_h(const RbmParameters& p, const Vector& h) {
    check_dims(p, nullptr, nullptr, &h, "p_x_given_h");
    Vector z = matvec_t(p.w, h);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += p.a[i];
    return sigmoid(z);
}

Vector p_y_given_h_softmax(const RbmParameters& p, const Vector& h) {
    check_dims(p, nullptr, nullptr, &h, "p_y_given_h_softmax");
    Vector z = matvec_t(p.u, h);
    for (std::size_t l = 0; l < z.size(); ++l) z[l] += p.c[l];
    return softmax(z);
}

Vector p_y_given_h_multilabel(const RbmParameters& p, const Vector& h) {
    check_dims(p, nullptr, nullptr, &h, "p_y_given_h_multilabel");
    Vector z = matvec_t(p.u, h);
    for (std::size_t l = 0; l < z.size(); ++l) z[l] += p.c[l];
    return sigmoid(z);
}

RbmParameters cd_k_update(const RbmParameters& p, const std::vector<Sample>& batch,
                          const TrainConfig& cfg, Rng& rng) {
    if (batch.empty()) throw std::invalid_argument("cd_k_update: empty batch");
    if (cfg.cd_steps == 0) throw std::invalid_argument("cd_k_update: cd_steps must be >= 1");
    if (!(cfg.learning_rate > 0.0)) {
        throw std::invalid_argument("cd_k_update: learning_rate must be positive");
    }

    const std::size_t nv = p.n_visible();
    const std::size_t nh = p.n_hidden();
    const std::size_t nl = p.n_labels();

    Matrix gw(nh, nv), gu(nh, nl);
    Vector ga(nv, 0.0), gb(nh, 0.0), gc(nl, 0.0);

    for (const Sample& s : batch) {
        check_dims(p, &s.x, &s.y, nullptr, "cd_k_update");

        Vector h0 = p_h_given_xy(p, s.x, s.y);
        Vector xt = s.x;
        Vector yt = s.y;
        Vector hmean = h0;
        for (std::size_t step = 0; step < cfg.cd_steps; ++step) {
            Vector h = bernoulli_sample(hmean, rng);
            xt = p_x_given_h(p, h);
            yt = bernoulli_sample(p_y_given_h_multilabel(p, h), rng);
            hmean = p_h_given_xy(p, xt, yt);
        }

        for (std::size_t j = 0; j < nh; ++j) {
            double* gwrow = gw.v.data() + j * nv;
            for (std::size_t i = 0; i < nv; ++i) gwrow[i] += h0[j] * s.x[i] - hmean[j] * xt[i];
            double* gurow = gu.v.data() + j * nl;
            for (std::size_t l = 0; l < nl; ++l) gurow[l] += h0[j] * s.y[l] - hmean[j] * yt[l];
            gb[j] += h0[j] - hmean[j];
        }
        for (std::size_t i = 0; i < nv; ++i) ga[i] += s.x[i] - xt[i];
        for (std::size_t l = 0; l < nl; ++l) gc[l] += s.y[l] - yt[l];
    }

    const double scale = cfg.learning_rate / static_cast<double>(batch.size());
    RbmParameters out = p;
    for (std::size_t k = 0; k < out.w.v.size(); ++k) out.w.v[k] += scale * gw.v[k];
    for (std::size_t k = 0; k < out.u.v.size(); ++k) out.u.v[k] += scale * gu.v[k];
    for (std::size_t i = 0; i < nv; ++i) out.a[i] += scale * ga[i];
    for (std::size_t j = 0; j < nh; ++j) out.b[j] += scale * gb[j];
    for (std::size_t l = 0; l < nl; ++l) out.c[l] += scale * gc[l];
    return out;
}

MfResult mean_field_infer(const RbmParameters& p, const Vector& x, double tol,
                          std::size_t max_iter) {
    check_dims(p, &x, nullptr, nullptr, "mean_field_infer");
    if (!(tol > 0.0)) throw std::invalid_argument("mean_field_infer: tol must be positive");
    if (max_iter == 0) throw std::invalid_argument("mean_field_infer: max_iter must be >= 1");

    const Vector wx = affine(p.w, x, p.b);

    MfResult r;
    r.mu.assign(p.n_labels(), 0.5);
    r.tau = sigmoid(wx);

    for (std::size_t it = 1; it <= max_iter; ++it) {
        Vector mu_z = matvec_t(p.u, r.tau);
        for (std::size_t l = 0; l < mu_z.size(); ++l) mu_z[l] += p.c[l];
        Vector mu_new = sigmoid(mu_z);

        Vector tau_z = matvec(p.u, mu_new);
        for (std::size_t j = 0; j < tau_z.size(); ++j) tau_z[j] += wx[j];
        Vector tau_new = sigmoid(tau_z);

        double residual = 0.0;
        for (std::size_t l = 0; l < mu_new.size(); ++l) {
            residual = std::max(residual, std::abs(mu_new[l] - r.mu[l]));
        }
        for (std::size_t j = 0; j < tau_new.size(); ++j) {
            residual = std::max(residual, std::abs(tau_new[j] - r.tau[j]));
        }
        for (double v : mu_new) {
            if (!std::isfinite(v)) throw std::runtime_error("divergent inference");
        }
        for (double v : tau_new) {
            if (!std::isfinite(v)) throw std::runtime_error("divergent inference");
        }

        r.mu = std::move(mu_new);
        r.tau = std::move(tau_new);
        r.iterations = it;
        r.residual = residual;
        if (residual <= tol) break;
    }
    return r;
}

Vector predict_labels(const RbmParameters& p, const Vector& x, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("predict_labels: threshold must be in (0, 1)");
    }
    MfResult r = mean_field_infer(p, x);
    Vector out(r.mu.size());
    for (std::size_t l = 0; l < r.mu.size(); ++l) out[l] = r.mu[l] >= threshold ? 1.0 : 0.0;
    return out;
}

double reconstruction_error(const RbmParameters& p, const std::vector<Sample>& batch) {
    if (batch.empty()) throw std::invalid_argument("reconstruction_error: empty batch");
    double total = 0.0;
    for (const Sample& s : batch) {
        check_dims(p, &s.x, &s.y, nullptr, "reconstruction_error");
        Vector h = p_h_given_xy(p, s.x, s.y);
        Vector xr = p_x_given_h(p, h);
        double mse = 0.0;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double d = s.x[i] - xr[i];
            mse += d * d;
        }
        total += mse / static_cast<double>(s.x.size());
    }
    return total / static_cast<double>(batch.size());
}

Vector bits_to_vector(std::uint32_t bits, std::size_t len) {
    Vector v(len);
    for (std::size_t i = 0; i < len; ++i) v[i] = (bits >> i) & 1u ? 1.0 : 0.0;
    return v;
}

JointTable exact_joint_distribution(const RbmParameters& p) {
    const std::size_t total_units = p.n_visible() + p.n_labels() + p.n_hidden();
    if (total_units > 20) {
        throw std::runtime_error("enumeration too large: " + std::to_string(total_units) +
                                 " binary units, limit is 20");
    }
    JointTable t;
    t.n_visible = p.n_visible();
    t.n_labels = p.n_labels();
    t.n_hidden = p.n_hidden();
    t.prob.assign(std::size_t{1} << total_units, 0.0);

    const std::uint32_t nx = 1u << t.n_visible;
    const std::uint32_t ny = 1u << t.n_labels;
    const std::uint32_t nh = 1u << t.n_hidden;

    double max_neg_e = -std::numeric_limits<double>::infinity();
    std::vector<double> neg_e(t.prob.size());
    for (std::uint32_t xb = 0; xb < nx; ++xb) {
        Vector x = bits_to_vector(xb, t.n_visible);
        for (std::uint32_t yb = 0; yb < ny; ++yb) {
            Vector y = bits_to_vector(yb, t.n_labels);
            for (std::uint32_t hb = 0; hb < nh; ++hb) {
                Vector h = bits_to_vector(hb, t.n_hidden);
                double ne = -energy(p, x, y, h);
                neg_e[t.index(xb, yb, hb)] = ne;
                max_neg_e = std::max(max_neg_e, ne);
            }
        }
    }
    double z = 0.0;
    for (std::size_t i = 0; i < neg_e.size(); ++i) {
        t.prob[i] = std::exp(neg_e[i] - max_neg_e);
        z += t.prob[i];
    }
    for (double& q : t.prob) q /= z;
    return t;
}

RbmParameters exact_loglik_gradient(const RbmParameters& p, const Sample& sample) {
    check_dims(p, &sample.x, &sample.y, nullptr, "exact_loglik_gradient");
    check_binary(sample.x, "exact_loglik_gradient", "sample.x");
    check_binary(sample.y, "exact_loglik_gradient", "sample.y");

    const JointTable t = exact_joint_distribution(p);
    const std::size_t nv = t.n_visible, nl = t.n_labels, nh = t.n_hidden;
    const std::uint32_t nx = 1u << nv, ny = 1u << nl, nhc = 1u << nh;

    // Model expectations over the full joint.
    Matrix exh(nh, nv), eyh(nh, nl);
    Vector ex(nv, 0.0), eh(nh, 0.0), ey(nl, 0.0);
    for (std::uint32_t xb = 0; xb < nx; ++xb) {
        for (std::uint32_t yb = 0; yb < ny; ++yb) {
            for (std::uint32_t hb = 0; hb < nhc; ++hb) {
                double q = t.at(xb, yb, hb);
                if (q == 0.0) continue;
                for (std::size_t j = 0; j < nh; ++j) {
                    if (!((hb >> j) & 1u)) continue;
                    eh[j] += q;
                    double* exrow = exh.v.data() + j * nv;
                    for (std::size_t i = 0; i < nv; ++i) {
                        if ((xb >> i) & 1u) exrow[i] += q;
                    }
                    double* eyrow = eyh.v.data() + j * nl;
                    for (std::size_t l = 0; l < nl; ++l) {
                        if ((yb >> l) & 1u) eyrow[l] += q;
                    }
                }
                for (std::size_t i = 0; i < nv; ++i) {
                    if ((xb >> i) & 1u) ex[i] += q;
                }
                for (std::size_t l = 0; l < nl; ++l) {
                    if ((yb >> l) & 1u) ey[l] += q;
                }
            }
        }
    }

    // Data-clamped expectation of h, from the same table restricted to the
    // observed (x, y).
    std::uint32_t xb0 = 0, yb0 = 0;
    for (std::size_t i = 0; i < nv; ++i) {
        if (sample.x[i] == 1.0) xb0 |= 1u << i;
    }
    for (std::size_t l = 0; l < nl; ++l) {
        if (sample.y[l] == 1.0) yb0 |= 1u << l;
    }
    Vector eh_data(nh, 0.0);
    double pxy = 0.0;
    for (std::uint32_t hb = 0; hb < nhc; ++hb) {
        double q = t.at(xb0, yb0, hb);
        pxy += q;
        for (std::size_t j = 0; j < nh; ++j) {
            if ((hb >> j) & 1u) eh_data[j] += q;
        }
    }
    if (pxy <= 0.0) throw std::runtime_error("exact_loglik_gradient: sample has zero probability");
    for (double& v : eh_data) v /= pxy;

    RbmParameters g;
    g.w = Matrix(nh, nv);
    g.u = Matrix(nh, nl);
    g.a.assign(nv, 0.0);
    g.b.assign(nh, 0.0);
    g.c.assign(nl, 0.0);
    for (std::size_t j = 0; j < nh; ++j) {
        for (std::size_t i = 0; i < nv; ++i) {
            g.w(j, i) = eh_data[j] * sample.x[i] - exh(j, i);
        }
        for (std::size_t l = 0; l < nl; ++l) {
            g.u(j, l) = eh_data[j] * sample.y[l] - eyh(j, l);
        }
        g.b[j] = eh_data[j] - eh[j];
    }
    for (std::size_t i = 0; i < nv; ++i) g.a[i] = sample.x[i] - ex[i];
    for (std::size_t l = 0; l < nl; ++l) g.c[l] = sample.y[l] - ey[l];
    return g;
}

}  // namespace nilm
