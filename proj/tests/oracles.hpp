#pragma once

// Reference implementations used only by tests. They follow the definitions
// directly, pixel by pixel, and share no code with the library.

#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udikit/classify.hpp"
#include "udikit/io.hpp"
#include "udikit/raster.hpp"
#include "udikit/zonal.hpp"

namespace oracle {

// Exact real sum of doubles rounded once to nearest-even.
inline double mpfr_sum(std::span<const double> values) {
    mpfr_t acc, term;
    mpfr_init2(acc, 2400);
    mpfr_init2(term, 64);
    mpfr_set_zero(acc, 1);
    for (double v : values) {
        mpfr_set_d(term, v, MPFR_RNDN);
        mpfr_add(acc, acc, term, MPFR_RNDN);
    }
    const double out = mpfr_get_d(acc, MPFR_RNDN);
    mpfr_clear(acc);
    mpfr_clear(term);
    return out;
}

// Classic crossing-number test over all rings (even-odd).
inline bool inside(const std::vector<udikit::Ring>& rings, double x, double y) {
    bool c = false;
    for (const auto& ring : rings) {
        const std::size_t n = ring.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const double xi = ring[i].x, yi = ring[i].y, xj = ring[j].x, yj = ring[j].y;
            if (((yi > y) != (yj > y)) && (x < (xj - xi) * (y - yi) / (yj - yi) + xi)) c = !c;
        }
    }
    return c;
}

struct Zonal {
    std::optional<udikit::ZonalStats> stats;
    std::size_t valid = 0;
    std::size_t total = 0;
};

inline Zonal zonal(const udikit::Raster& r, const udikit::TractPolygon& t) {
    const auto& g = r.geometry();
    std::vector<double> vals;
    Zonal z;
    for (std::uint32_t row = 0; row < g.height; ++row) {
        for (std::uint32_t col = 0; col < g.width; ++col) {
            const double x = g.x_origin + (col + 0.5) * g.pixel_size;
            const double y = g.y_origin - (row + 0.5) * g.pixel_size;
            if (!inside(t.rings, x, y)) continue;
            ++z.total;
            const std::size_t i = std::size_t{row} * g.width + col;
            if (r.valid(i)) vals.push_back(r.value(i));
        }
    }
    z.valid = vals.size();
    if (vals.empty()) return z;
    const double n = static_cast<double>(vals.size());
    udikit::ZonalStats s;
    s.mean = mpfr_sum(vals) / n;
    std::vector<double> sq;
    s.min = vals[0];
    s.max = vals[0];
    for (double v : vals) {
        sq.push_back((v - s.mean) * (v - s.mean));
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.std = std::sqrt(mpfr_sum(sq) / n);
    z.stats = s;
    return z;
}

// Scan every present class; ties resolve to the lowest class number.
inline udikit::Raster knn1(const udikit::MultibandRaster& img, const udikit::SignatureTable& t) {
    udikit::Raster out(img.geometry());
    for (std::size_t i = 0; i < img.geometry().size(); ++i) {
        bool ok = true;
        for (std::size_t b = 0; b < img.band_count(); ++b) ok = ok && img.band(b).valid(i);
        if (!ok) continue;
        int best = 0;
        double best_d = INFINITY;
        for (int c = 1; c <= 10; ++c) {
            if (t.support(c) == 0) continue;
            double d = 0.0;
            for (std::size_t b = 0; b < img.band_count(); ++b) {
                const double e = img.band(b).value(i) - t.mean(c, b);
                d += e * e;
            }
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        out.set(i, best);
    }
    return out;
}

// Nearest source center per target center, by exhaustive search.
inline udikit::Raster nearest(const udikit::Raster& src, const udikit::GridGeometry& tg) {
    const auto& sg = src.geometry();
    udikit::Raster out(tg);
    for (std::uint32_t r = 0; r < tg.height; ++r) {
        for (std::uint32_t c = 0; c < tg.width; ++c) {
            const double x = tg.center_x(c), y = tg.center_y(r);
            if (x < sg.x_origin || x >= sg.x_max() || y > sg.y_origin || y <= sg.y_min()) continue;
            // Per axis; a center exactly between two sources goes to the later one.
            std::uint32_t bc = 0, br = 0;
            double best = INFINITY;
            for (std::uint32_t sc = 0; sc < sg.width; ++sc) {
                const double d = std::abs(sg.center_x(sc) - x);
                if (d <= best) best = d, bc = sc;
            }
            best = INFINITY;
            for (std::uint32_t sr = 0; sr < sg.height; ++sr) {
                const double d = std::abs(sg.center_y(sr) - y);
                if (d <= best) best = d, br = sr;
            }
            const std::size_t bi = sg.index(bc, br);
            if (src.valid(bi)) out.set(tg.index(c, r), src.value(bi));
        }
    }
    return out;
}

} // namespace oracle
