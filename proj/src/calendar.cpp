#include "limref/calendar.hpp"

#include "limref/error.hpp"

#include <charconv>
#include <cstdio>

namespace limref {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail_input("malformed date/time '" + std::string(whole) + "'");
    }
    return value;
}

} // namespace

Date make_date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
        fail_input("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) +
                   "-" + std::to_string(day));
    }
    return Date{ymd};
}

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        fail_input("malformed date '" + std::string(text) + "'");
    }
    return make_date(parse_int(text.substr(0, 4), text), static_cast<unsigned>(parse_int(text.substr(5, 2), text)),
                     static_cast<unsigned>(parse_int(text.substr(8, 2), text)));
}

Timestamp parse_timestamp(std::string_view text) {
    if (text.size() < 16 || (text[10] != 'T' && text[10] != ' ') || text[13] != ':') {
        fail_input("malformed timestamp '" + std::string(text) + "'");
    }
    const Date date = parse_date(text.substr(0, 10));
    const int hour = parse_int(text.substr(11, 2), text);
    const int minute = parse_int(text.substr(14, 2), text);
    int second = 0;
    if (text.size() >= 19 && text[16] == ':') {
        second = parse_int(text.substr(17, 2), text);
    } else if (text.size() != 16) {
        fail_input("malformed timestamp '" + std::string(text) + "'");
    }
    if (hour > 23 || minute > 59 || second > 59 || hour < 0 || minute < 0 || second < 0) {
        fail_input("malformed timestamp '" + std::string(text) + "'");
    }
    return Timestamp{date} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
           std::chrono::seconds{second};
}

std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

unsigned month_of(Date date) {
    return static_cast<unsigned>(std::chrono::year_month_day{date}.month());
}

unsigned weekday_index(Date date) {
    return std::chrono::weekday{date}.iso_encoding() - 1;
}

const char* month_abbrev(unsigned month) {
    static constexpr const char* names[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                            "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
    return (month >= 1 && month <= 12) ? names[month - 1] : "?";
}

} // namespace limref
