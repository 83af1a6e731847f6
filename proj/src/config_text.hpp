#pragma once

#include "limref/error.hpp"

#include <cstdint>
#include <map>
#include <sstream>
#include <string>

namespace limref::detail {

// Parses flat `key = value` lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = strip(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail_input("config line " + std::to_string(line_no) + ": expected key = value");
        }
        auto value = strip(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        out[strip(line.substr(0, eq))] = value;
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    fail_input("config key '" + key + "': expected a number, got '" + value + "'");
}

inline std::uint64_t to_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(value, &used);
        if (used == value.size() && value.find('-') == std::string::npos) {
            return v;
        }
    } catch (const std::exception&) {
    }
    fail_input("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
}

} // namespace limref::detail
