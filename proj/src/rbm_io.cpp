#include "nilm/rbm.hpp"

#include "text_util.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nilm {

namespace {

constexpr const char* kMagic = "mlrbm";
constexpr int kVersion = 1;

void write_vector(std::ostream& out, const char* name, const Vector& v) {
    out << name << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ' ';
        out << fmt_double(v[i]);
    }
    out << '\n';
}

void write_matrix(std::ostream& out, const char* name, const Matrix& m) {
    out << name << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) out << ' ';
            out << fmt_double(m(r, c));
        }
        out << '\n';
    }
}

std::string next_line(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("model file truncated: " + path);
    }
    return line;
}

Vector parse_row(const std::string& line, std::size_t want, const std::string& context) {
    std::istringstream ss(line);
    Vector v;
    std::string tok;
    while (ss >> tok) v.push_back(parse_double(tok, context));
    if (v.size() != want) {
        throw std::runtime_error(context + ": expected " + std::to_string(want) +
                                 " values, found " + std::to_string(v.size()));
    }
    return v;
}

void expect_section(std::istream& in, const std::string& path, const char* name) {
    std::string line = next_line(in, path);
    if (line != name) {
        throw std::runtime_error("model file corrupt: expected section '" + std::string(name) +
                                 "', found '" + line + "'");
    }
}

}  // namespace

void save_model(const std::string& path, const ModelFile& model) {
    const RbmParameters& p = model.params;
    if (model.label_names.size() != p.n_labels()) {
        throw std::invalid_argument("save_model: " + std::to_string(model.label_names.size()) +
                                    " label names for " + std::to_string(p.n_labels()) +
                                    " label units");
    }
    for (const std::string& name : model.label_names) {
        if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
            throw std::invalid_argument("save_model: label name must be non-empty and free of "
                                        "whitespace: '" + name + "'");
        }
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);

    out << kMagic << ' ' << kVersion << '\n';
    out << "n_visible " << p.n_visible() << '\n';
    out << "n_hidden " << p.n_hidden() << '\n';
    out << "n_labels " << p.n_labels() << '\n';
    out << "labels";
    for (const std::string& name : model.label_names) out << ' ' << name;
    out << '\n';
    out << "scaler " << fmt_double(model.scaler.min_watts) << ' '
        << fmt_double(model.scaler.max_watts) << '\n';
    write_matrix(out, "W", p.w);
    write_matrix(out, "U", p.u);
    write_vector(out, "a", p.a);
    write_vector(out, "b", p.b);
    write_vector(out, "c", p.c);
    out.flush();
    if (!out) throw std::runtime_error("failed writing model file: " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);

    std::istringstream header(next_line(in, path));
    std::string magic;
    int version = -1;
    header >> magic >> version;
    if (magic != kMagic) {
        throw std::runtime_error("not a model file: " + path);
    }
    if (version != kVersion) {
        throw std::runtime_error("unsupported model format version " + std::to_string(version) +
                                 " in " + path);
    }

    auto read_sized = [&](const char* key) {
        std::istringstream ss(next_line(in, path));
        std::string k;
        long long n = -1;
        ss >> k >> n;
        if (k != key || n < 0) {
            throw std::runtime_error("model file corrupt: bad '" + std::string(key) + "' line");
        }
        return static_cast<std::size_t>(n);
    };
    std::size_t nv = read_sized("n_visible");
    std::size_t nh = read_sized("n_hidden");
    std::size_t nl = read_sized("n_labels");
    if (nv == 0 || nh == 0 || nl == 0) {
        throw std::runtime_error("model file corrupt: zero layer size");
    }

    ModelFile model;
    {
        std::istringstream ss(next_line(in, path));
        std::string k;
        ss >> k;
        if (k != "labels") throw std::runtime_error("model file corrupt: bad 'labels' line");
        std::string name;
        while (ss >> name) model.label_names.push_back(name);
        if (model.label_names.size() != nl) {
            throw std::runtime_error("model file corrupt: " +
                                     std::to_string(model.label_names.size()) +
                                     " label names for " + std::to_string(nl) + " label units");
        }
    }
    {
        std::istringstream ss(next_line(in, path));
        std::string k, lo, hi;
        ss >> k >> lo >> hi;
        if (k != "scaler") throw std::runtime_error("model file corrupt: bad 'scaler' line");
        model.scaler.min_watts = parse_double(lo, "model scaler");
        model.scaler.max_watts = parse_double(hi, "model scaler");
    }

    RbmParameters p;
    p.w = Matrix(nh, nv);
    p.u = Matrix(nh, nl);
    expect_section(in, path, "W");
    for (std::size_t r = 0; r < nh; ++r) {
        Vector row = parse_row(next_line(in, path), nv, "model W row " + std::to_string(r));
        for (std::size_t c = 0; c < nv; ++c) p.w(r, c) = row[c];
    }
    expect_section(in, path, "U");
    for (std::size_t r = 0; r < nh; ++r) {
        Vector row = parse_row(next_line(in, path), nl, "model U row " + std::to_string(r));
        for (std::size_t c = 0; c < nl; ++c) p.u(r, c) = row[c];
    }
    expect_section(in, path, "a");
    p.a = parse_row(next_line(in, path), nv, "model a");
    expect_section(in, path, "b");
    p.b = parse_row(next_line(in, path), nh, "model b");
    expect_section(in, path, "c");
    p.c = parse_row(next_line(in, path), nl, "model c");

    model.params = std::move(p);
    return model;
}

}  // namespace nilm
