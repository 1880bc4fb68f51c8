#include "nilm/data.hpp"

#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nilm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void fail_at(const std::string& path, std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

std::string trim_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

void check_name(const std::string& name, const char* context) {
    if (name.empty() || name.find_first_of(" \t,") != std::string::npos) {
        throw std::runtime_error(std::string(context) +
                                 ": appliance name must be non-empty and free of spaces and "
                                 "commas: '" + name + "'");
    }
}

}  // namespace

MeterData load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file: " + path);

    std::string line;
    if (!std::getline(in, line)) fail_at(path, 1, "missing header row");
    const std::vector<std::string> header = split_fields(trim_cr(line));

    std::size_t ts_col = header.size(), agg_col = header.size();
    std::vector<std::size_t> dev_cols;
    MeterData data;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& h = header[i];
        if (h == "timestamp") {
            if (ts_col != header.size()) fail_at(path, 1, "duplicate column 'timestamp'");
            ts_col = i;
        } else if (h == "aggregate_w") {
            if (agg_col != header.size()) fail_at(path, 1, "duplicate column 'aggregate_w'");
            agg_col = i;
        } else if (h.size() > 6 && h.rfind("dev_", 0) == 0 &&
                   h.compare(h.size() - 2, 2, "_w") == 0) {
            std::string name = h.substr(4, h.size() - 6);
            check_name(name, path.c_str());
            if (std::find(data.appliance_names.begin(), data.appliance_names.end(), name) !=
                data.appliance_names.end()) {
                fail_at(path, 1, "duplicate column '" + h + "'");
            }
            dev_cols.push_back(i);
            data.appliance_names.push_back(name);
        } else {
            fail_at(path, 1, "unrecognized column '" + h + "'");
        }
    }
    if (ts_col == header.size()) fail_at(path, 1, "missing column 'timestamp'");
    if (agg_col == header.size()) fail_at(path, 1, "missing column 'aggregate_w'");
    data.appliance.resize(dev_cols.size());

    std::size_t line_no = 1;
    std::int64_t step = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size()) {
            fail_at(path, line_no,
                    "expected " + std::to_string(header.size()) + " fields, found " +
                        std::to_string(fields.size()));
        }

        std::int64_t ts = 0;
        try {
            ts = parse_int(fields[ts_col], "timestamp");
        } catch (const std::exception& e) {
            fail_at(path, line_no, e.what());
        }
        if (!data.aggregate.timestamps.empty()) {
            std::int64_t prev = data.aggregate.timestamps.back();
            if (ts <= prev) {
                fail_at(path, line_no,
                        "timestamps must be strictly increasing (" + std::to_string(ts) +
                            " after " + std::to_string(prev) + ")");
            }
            std::int64_t d = ts - prev;
            if (step == 0) {
                step = d;
            } else if (d != step) {
                fail_at(path, line_no,
                        "sampling step changed from " + std::to_string(step) + "s to " +
                            std::to_string(d) + "s");
            }
        }

        auto read_watts = [&](std::size_t col) {
            double w = 0.0;
            try {
                w = parse_double(fields[col], "'" + header[col] + "'");
            } catch (const std::exception& e) {
                fail_at(path, line_no, e.what());
            }
            if (!std::isfinite(w) || w < 0.0) {
                fail_at(path, line_no,
                        "'" + header[col] + "' must be finite and non-negative, found '" +
                            fields[col] + "'");
            }
            return w;
        };

        data.aggregate.timestamps.push_back(ts);
        data.aggregate.watts.push_back(read_watts(agg_col));
        for (std::size_t d = 0; d < dev_cols.size(); ++d) {
            data.appliance[d].timestamps.push_back(ts);
            data.appliance[d].watts.push_back(read_watts(dev_cols[d]));
        }
    }
    if (data.aggregate.size() == 0) fail_at(path, line_no, "no data rows");
    return data;
}

void save_csv(const std::string& path, const MeterData& data) {
    if (data.appliance_names.size() != data.appliance.size()) {
        throw std::invalid_argument("save_csv: appliance names and series count differ");
    }
    for (const PowerSeries& s : data.appliance) {
        if (s.size() != data.aggregate.size()) {
            throw std::invalid_argument("save_csv: submeter length differs from the aggregate");
        }
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open data file for writing: " + path);

    out << "timestamp,aggregate_w";
    for (const std::string& name : data.appliance_names) out << ",dev_" << name << "_w";
    out << '\n';
    for (std::size_t t = 0; t < data.aggregate.size(); ++t) {
        out << data.aggregate.timestamps[t] << ',' << fmt_double(data.aggregate.watts[t]);
        for (const PowerSeries& s : data.appliance) out << ',' << fmt_double(s.watts[t]);
        out << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("failed writing data file: " + path);
}

std::vector<ApplianceProfile> load_profiles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profiles file: " + path);

    std::string line;
    if (!std::getline(in, line)) fail_at(path, 1, "missing header row");
    const std::vector<std::string> header = split_fields(trim_cr(line));
    const std::vector<std::string> want = {"name",     "avg_on_power_w", "on_threshold_w",
                                           "p_on_off", "p_off_on",       "noise_sd_w"};
    if (header != want) {
        fail_at(path, 1,
                "expected header 'name,avg_on_power_w,on_threshold_w,p_on_off,p_off_on,"
                "noise_sd_w'");
    }

    std::vector<ApplianceProfile> profiles;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != want.size()) {
            fail_at(path, line_no,
                    "expected " + std::to_string(want.size()) + " fields, found " +
                        std::to_string(fields.size()));
        }
        ApplianceProfile p;
        p.name = fields[0];
        try {
            check_name(p.name, path.c_str());
            p.avg_on_power_w = parse_double(fields[1], "avg_on_power_w");
            p.on_threshold_w = parse_double(fields[2], "on_threshold_w");
            p.synth.p_on_to_off = parse_double(fields[3], "p_on_off");
            p.synth.p_off_to_on = parse_double(fields[4], "p_off_on");
            p.synth.noise_sd_w = parse_double(fields[5], "noise_sd_w");
        } catch (const std::exception& e) {
            fail_at(path, line_no, e.what());
        }
        if (p.avg_on_power_w < 0.0 || p.on_threshold_w < 0.0 || p.synth.noise_sd_w < 0.0) {
            fail_at(path, line_no, "powers and noise must be non-negative");
        }
        auto bad_prob = [](double q) { return !(q >= 0.0 && q <= 1.0); };
        if (bad_prob(p.synth.p_on_to_off) || bad_prob(p.synth.p_off_to_on)) {
            fail_at(path, line_no, "transition probabilities must lie in [0, 1]");
        }
        for (const ApplianceProfile& q : profiles) {
            if (q.name == p.name) fail_at(path, line_no, "duplicate appliance '" + p.name + "'");
        }
        profiles.push_back(std::move(p));
    }
    if (profiles.empty()) fail_at(path, line_no, "no profiles");
    return profiles;
}

void save_profiles(const std::string& path, const std::vector<ApplianceProfile>& profiles) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open profiles file for writing: " + path);
    out << "name,avg_on_power_w,on_threshold_w,p_on_off,p_off_on,noise_sd_w\n";
    for (const ApplianceProfile& p : profiles) {
        out << p.name << ',' << fmt_double(p.avg_on_power_w) << ',' << fmt_double(p.on_threshold_w)
            << ',' << fmt_double(p.synth.p_on_to_off) << ',' << fmt_double(p.synth.p_off_to_on)
            << ',' << fmt_double(p.synth.noise_sd_w) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("failed writing profiles file: " + path);
}

}  // namespace nilm
