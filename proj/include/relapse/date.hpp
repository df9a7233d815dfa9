#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace relapse {

/// Calendar date without time zone, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(int days_since_epoch) : days_(days_since_epoch) {}

    static Date from_ymd(int year, unsigned month, unsigned day) {
        const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                              std::chrono::day{day}};
        return Date{static_cast<int>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
    }

    /// Strict YYYY-MM-DD parser; rejects impossible dates such as 2021-02-30.
    static std::optional<Date> parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
            return std::nullopt;
        }
        int fields[3] = {0, 0, 0};
        const std::size_t starts[3] = {0, 5, 8};
        const std::size_t lengths[3] = {4, 2, 2};
        for (int f = 0; f < 3; ++f) {
            for (std::size_t i = 0; i < lengths[f]; ++i) {
                const char c = text[starts[f] + i];
                if (c < '0' || c > '9') {
                    return std::nullopt;
                }
                fields[f] = fields[f] * 10 + (c - '0');
            }
        }
        const std::chrono::year_month_day ymd{std::chrono::year{fields[0]},
                                              std::chrono::month{static_cast<unsigned>(fields[1])},
                                              std::chrono::day{static_cast<unsigned>(fields[2])}};
        if (!ymd.ok()) {
            return std::nullopt;
        }
        return Date{static_cast<int>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
    }

    std::string iso() const {
        const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days_}}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    constexpr int days_since_epoch() const { return days_; }

    constexpr Date operator+(int days) const { return Date{days_ + days}; }
    constexpr Date operator-(int days) const { return Date{days_ - days}; }
    constexpr int operator-(Date other) const { return days_ - other.days_; }

    constexpr auto operator<=>(const Date&) const = default;

private:
    int days_ = 0;
};

} // namespace relapse
