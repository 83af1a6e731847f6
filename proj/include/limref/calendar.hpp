#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace limref {

using Date = std::chrono::sys_days;
// Naive local timestamps; no timezone or DST handling.
using Timestamp = std::chrono::sys_seconds;

Date make_date(int year, unsigned month, unsigned day);

// Parses YYYY-MM-DD.
Date parse_date(std::string_view text);

// Parses YYYY-MM-DDTHH:MM[:SS] (a space is accepted in place of 'T').
Timestamp parse_timestamp(std::string_view text);

std::string format_date(Date date);

inline Date add_days(Date date, long long n) { return date + std::chrono::days{n}; }

// 1..12
unsigned month_of(Date date);

// Monday = 0 ... Sunday = 6.
unsigned weekday_index(Date date);

const char* month_abbrev(unsigned month);

} // namespace limref
