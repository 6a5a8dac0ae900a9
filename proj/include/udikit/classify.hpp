#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "udikit/raster.hpp"

namespace udikit {

inline constexpr int kClassCount = 10;

enum class ImperviousKind { per_image, composite };

// Impervious index on the 1..10 scale: integer classes for a single
// classified image, fractional values for an averaged composite.
struct ImperviousMap {
    Raster raster;
    ImperviousKind kind = ImperviousKind::per_image;
};

// 0..100 percent impervious -> class min(floor(v/10) + 1, 10).
// Throws naming the first pixel outside [0, 100].
ImperviousMap reclassify_percent(const Raster& reference);

/// Per-class mean reflectance for each band, learned from a reference map.
///
/// Means are pooled over every valid (pixel, image) observation of the class,
/// summed with correct rounding so the result does not depend on image or
/// pixel order. Classes with zero support are absent and never predicted.
class SignatureTable {
public:
    SignatureTable() = default;
    explicit SignatureTable(std::vector<std::string> band_names);

    const std::vector<std::string>& band_names() const { return band_names_; }
    std::size_t band_count() const { return band_names_.size(); }

    bool present(int cls) const { return support(cls) > 0; }
    std::size_t support(int cls) const { return support_.at(static_cast<std::size_t>(cls - 1)); }
    double mean(int cls, std::size_t band) const;
    std::vector<int> present_classes() const;

    // Sets a class signature; `means` must have one entry per band.
    void set(int cls, std::span<const double> means, std::size_t support);

    bool operator==(const SignatureTable&) const = default;

private:
    std::vector<std::string> band_names_;
    std::array<std::size_t, kClassCount> support_{};
    std::array<std::vector<double>, kClassCount> means_{};
};

enum class DistanceMetric { euclidean };

struct KnnConfig {
    int k = 1;
    DistanceMetric metric = DistanceMetric::euclidean;
    // Equal neighbor weighting; no other scheme is offered.
};

SignatureTable extract_signatures(const ImperviousMap& reference, std::span<const MultibandRaster> images);

// Nearest present-class signature per pixel. With k > 1 the k nearest
// signatures vote with equal weight; vote ties go to the tied class with the
// nearest signature, exact distance ties to the lower class index.
ImperviousMap knn_classify(const MultibandRaster& image, const SignatureTable& table, const KnnConfig& cfg = {});

// Per-pixel mean over the maps valid at that pixel.
ImperviousMap average_composite(std::span<const ImperviousMap> maps);

// "class,band,mean,support", one row per (class, band); absent classes have
// an empty mean.
std::string encode_signatures_csv(const SignatureTable& table);
SignatureTable decode_signatures_csv(std::string_view text, std::string_view source = "<signatures>");
void write_signatures(const std::filesystem::path& path, const SignatureTable& table);
SignatureTable read_signatures(const std::filesystem::path& path);

} // namespace udikit
