#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nilm {

// Shortest representation that round-trips a double exactly.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& tok, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not a number: '" + tok + "'");
    }
}

inline long long parse_int(const std::string& tok, const std::string& context) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(context + ": not an integer: '" + tok + "'");
    }
}

}  // namespace nilm
