#include "udikit/month.hpp"

#include <charconv>
#include <cstdio>

#include "udikit/error.hpp"

namespace udikit {

MonthKey::MonthKey(int y, int m) : year(y), month(m) {
    if (m < 1 || m > 12) {
        throw Error("month out of range: " + std::to_string(m));
    }
}

MonthKey MonthKey::next() const { return plus(1); }

MonthKey MonthKey::plus(int months) const {
    // Floor division keeps negative offsets correct.
    const int total = year * 12 + (month - 1) + months;
    int y = total / 12;
    int m = total % 12;
    if (m < 0) {
        m += 12;
        --y;
    }
    return MonthKey(y, m + 1);
}

int MonthKey::steps_since(const MonthKey& from) const {
    return (year - from.year) * 12 + (month - from.month);
}

std::string MonthKey::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

MonthKey MonthKey::parse(std::string_view text) {
    const auto dash = text.find('-');
    if (dash == std::string_view::npos) {
        throw Error("bad month '" + std::string(text) + "', expected YYYY-MM");
    }
    int y = 0;
    int m = 0;
    const auto ys = text.substr(0, dash);
    const auto ms = text.substr(dash + 1);
    const auto ry = std::from_chars(ys.data(), ys.data() + ys.size(), y);
    const auto rm = std::from_chars(ms.data(), ms.data() + ms.size(), m);
    if (ry.ec != std::errc{} || ry.ptr != ys.data() + ys.size() || rm.ec != std::errc{} ||
        rm.ptr != ms.data() + ms.size() || ys.empty() || ms.empty()) {
        throw Error("bad month '" + std::string(text) + "', expected YYYY-MM");
    }
    return MonthKey(y, m);
}

} // namespace udikit
