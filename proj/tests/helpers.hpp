#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "udikit/raster.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("udikit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline udikit::GridGeometry grid(std::uint32_t w, std::uint32_t h, double ps = 1.0, double x0 = 0.0,
                                 double y0 = 0.0) {
    return {w, h, x0, y0 == 0.0 ? h * ps : y0, ps};
}

// Uniform values in [lo, hi) with each pixel invalid with probability p_invalid.
inline udikit::Raster random_raster(const udikit::GridGeometry& g, std::mt19937_64& rng, double lo, double hi,
                                    double p_invalid = 0.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::bernoulli_distribution hole(p_invalid);
    udikit::Raster r(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = u(rng);
        if (!hole(rng)) r.set(i, v);
    }
    return r;
}

} // namespace testutil
