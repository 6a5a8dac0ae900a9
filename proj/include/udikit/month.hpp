#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace udikit {

struct MonthKey {
    int year = 0;
    int month = 1;  // 1..12

    MonthKey() = default;
    // Throws udikit::Error when month is outside 1..12.
    MonthKey(int y, int m);

    MonthKey next() const;
    MonthKey plus(int months) const;
    // Signed number of month steps from `from` to this month.
    int steps_since(const MonthKey& from) const;

    // "YYYY-MM"
    std::string str() const;
    static MonthKey parse(std::string_view text);

    auto operator<=>(const MonthKey&) const = default;
};

// Inclusive month interval.
struct MonthRange {
    MonthKey first;
    MonthKey last;

    bool contains(const MonthKey& m) const { return first <= m && m <= last; }
    int length() const { return last.steps_since(first) + 1; }
};

} // namespace udikit
