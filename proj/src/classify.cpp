#include "udikit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "udikit/csv.hpp"
#include "udikit/error.hpp"
#include "udikit/exact_sum.hpp"

namespace udikit {

ImperviousMap reclassify_percent(const Raster& reference) {
    const GridGeometry& g = reference.geometry();
    ImperviousMap out{Raster(g), ImperviousKind::per_image};
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (!reference.valid(i)) {
            continue;
        }
        const double v = reference.value(i);
        if (v < 0.0 || v > 100.0) {
            throw Error("reference pixel (col " + std::to_string(i % g.width) + ", row " +
                        std::to_string(i / g.width) + ") = " + format_number(v) + " is outside [0, 100]");
        }
        out.raster.set(i, std::min(std::floor(v / 10.0) + 1.0, 10.0));
    }
    return out;
}

SignatureTable::SignatureTable(std::vector<std::string> band_names) : band_names_(std::move(band_names)) {
    for (auto& m : means_) {
        m.assign(band_names_.size(), 0.0);
    }
}

double SignatureTable::mean(int cls, std::size_t band) const {
    if (!present(cls)) {
        throw Error("class " + std::to_string(cls) + " is absent from the signature table");
    }
    return means_[static_cast<std::size_t>(cls - 1)].at(band);
}

std::vector<int> SignatureTable::present_classes() const {
    std::vector<int> out;
    for (int c = 1; c <= kClassCount; ++c) {
        if (present(c)) {
            out.push_back(c);
        }
    }
    return out;
}

void SignatureTable::set(int cls, std::span<const double> means, std::size_t support) {
    if (cls < 1 || cls > kClassCount) {
        throw Error("class index out of range: " + std::to_string(cls));
    }
    if (means.size() != band_names_.size()) {
        throw Error("signature has " + std::to_string(means.size()) + " bands, table expects " +
                    std::to_string(band_names_.size()));
    }
    for (double m : means) {
        if (support > 0 && !std::isfinite(m)) {
            throw Error("non-finite signature mean for class " + std::to_string(cls));
        }
    }
    const auto k = static_cast<std::size_t>(cls - 1);
    support_[k] = support;
    means_[k].assign(means.begin(), means.end());
    if (support == 0) {
        std::fill(means_[k].begin(), means_[k].end(), 0.0);
    }
}

namespace {

int class_of(const Raster& reference, std::size_t i) {
    const double v = reference.value(i);
    if (v < 1.0 || v > kClassCount || v != std::floor(v)) {
        throw Error("reference map pixel " + std::to_string(i) + " holds " + format_number(v) +
                    ", expected an integer class 1..10");
    }
    return static_cast<int>(v);
}

} // namespace

SignatureTable extract_signatures(const ImperviousMap& reference, std::span<const MultibandRaster> images) {
    if (images.empty()) {
        throw Error("signature extraction needs at least one image");
    }
    const std::vector<std::string>& names = images.front().band_names();
    if (names.empty()) {
        throw Error("image has no bands");
    }
    for (const MultibandRaster& img : images) {
        if (img.geometry() != reference.raster.geometry()) {
            throw Error("grids not aligned: image and reference map differ");
        }
        if (img.band_names() != names) {
            throw Error("images disagree on band order");
        }
    }
    const std::size_t nb = names.size();
    std::vector<ExactSum> sums(kClassCount * nb);
    std::array<std::size_t, kClassCount> support{};

    const Raster& ref = reference.raster;
    for (const MultibandRaster& img : images) {
        for (std::size_t i = 0; i < ref.size(); ++i) {
            if (!ref.valid(i) || !img.pixel_valid(i)) {
                continue;
            }
            const auto k = static_cast<std::size_t>(class_of(ref, i) - 1);
            ++support[k];
            for (std::size_t b = 0; b < nb; ++b) {
                sums[k * nb + b].add(img.band(b).value(i));
            }
        }
    }

    SignatureTable table(names);
    bool any = false;
    std::vector<double> means(nb);
    for (int c = 1; c <= kClassCount; ++c) {
        const auto k = static_cast<std::size_t>(c - 1);
        if (support[k] == 0) {
            continue;
        }
        any = true;
        for (std::size_t b = 0; b < nb; ++b) {
            means[b] = sums[k * nb + b].value() / static_cast<double>(support[k]);
        }
        table.set(c, means, support[k]);
    }
    if (!any) {
        throw Error("reference and imagery disjoint");
    }
    return table;
}

ImperviousMap knn_classify(const MultibandRaster& image, const SignatureTable& table, const KnnConfig& cfg) {
    if (cfg.k < 1) {
        throw Error("k must be at least 1");
    }
    if (image.band_names() != table.band_names()) {
        throw Error("band-order mismatch between image and signature table");
    }
    const std::vector<int> classes = table.present_classes();
    if (classes.empty()) {
        throw Error("signature table has no present class");
    }
    const std::size_t nb = table.band_count();
    std::vector<double> sig(classes.size() * nb);
    for (std::size_t j = 0; j < classes.size(); ++j) {
        for (std::size_t b = 0; b < nb; ++b) {
            sig[j * nb + b] = table.mean(classes[j], b);
        }
    }

    const GridGeometry& g = image.geometry();
    ImperviousMap out{Raster(g), ImperviousKind::per_image};
    std::vector<double> pixel(nb);
    std::vector<std::pair<double, int>> ranked(classes.size());
    const auto k = static_cast<std::size_t>(cfg.k);

    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!image.pixel_valid(i)) {
            continue;
        }
        for (std::size_t b = 0; b < nb; ++b) {
            pixel[b] = image.band(b).value(i);
        }
        for (std::size_t j = 0; j < classes.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                const double d = pixel[b] - sig[j * nb + b];
                d2 += d * d;
            }
            ranked[j] = {d2, classes[j]};
        }
        int winner = 0;
        if (k == 1) {
            // Strict comparison keeps the lowest class on exact ties.
            std::size_t best = 0;
            for (std::size_t j = 1; j < ranked.size(); ++j) {
                if (ranked[j].first < ranked[best].first) {
                    best = j;
                }
            }
            winner = ranked[best].second;
        } else {
            std::sort(ranked.begin(), ranked.end());
            const std::size_t take = std::min(k, ranked.size());
            std::map<int, int> votes;
            for (std::size_t j = 0; j < take; ++j) {
                ++votes[ranked[j].second];
            }
            int best_votes = 0;
            for (const auto& [cls, v] : votes) best_votes = std::max(best_votes, v);
            for (std::size_t j = 0; j < take; ++j) {
                if (votes[ranked[j].second] == best_votes) {
                    winner = ranked[j].second;
                    break;
                }
            }
        }
        out.raster.set(i, static_cast<double>(winner));
    }
    return out;
}

ImperviousMap average_composite(std::span<const ImperviousMap> maps) {
    std::vector<const Raster*> rasters;
    rasters.reserve(maps.size());
    for (const ImperviousMap& m : maps) {
        rasters.push_back(&m.raster);
    }
    return {mean_stack(std::span<const Raster* const>(rasters)), ImperviousKind::composite};
}

std::string encode_signatures_csv(const SignatureTable& table) {
    std::string out = "class,band,mean,support\n";
    for (int c = 1; c <= kClassCount; ++c) {
        for (std::size_t b = 0; b < table.band_count(); ++b) {
            out += std::to_string(c) + "," + table.band_names()[b] + "," +
                   (table.present(c) ? format_number(table.mean(c, b)) : std::string()) + "," +
                   std::to_string(table.support(c)) + "\n";
        }
    }
    return out;
}

SignatureTable decode_signatures_csv(std::string_view text, std::string_view source) {
    const CsvTable csv = parse_csv(text, "class,band,mean,support", source);
    std::vector<std::string> names;
    std::map<int, std::map<std::string, std::pair<std::optional<double>, std::size_t>>> rows;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& f = csv.rows[r];
        const std::string ctx = std::string(source) + ":" + std::to_string(csv.line_numbers[r]);
        const long long cls = parse_integer(f[0], ctx);
        if (cls < 1 || cls > kClassCount) {
            throw ParseError(ctx + ": class out of range");
        }
        const long long support = parse_integer(f[3], ctx);
        if (support < 0) {
            throw ParseError(ctx + ": negative support");
        }
        if (cls == 1) {
            names.push_back(f[1]);
        }
        if (!rows[static_cast<int>(cls)].emplace(f[1], std::make_pair(parse_optional_number(f[2], ctx),
                                                                    static_cast<std::size_t>(support)))
                 .second) {
            throw ParseError(ctx + ": duplicate row for class " + f[0] + " band " + f[1]);
        }
    }
    SignatureTable table(names);
    for (int c = 1; c <= kClassCount; ++c) {
        const auto& cls_rows = rows[c];
        if (cls_rows.size() != names.size()) {
            throw ParseError(std::string(source) + ": class " + std::to_string(c) + " does not list every band");
        }
        std::vector<double> means;
        std::size_t support = 0;
        bool first = true;
        for (const std::string& n : names) {
            const auto it = cls_rows.find(n);
            if (it == cls_rows.end()) {
                throw ParseError(std::string(source) + ": class " + std::to_string(c) + " lacks band " + n);
            }
            const auto& [mean, sup] = it->second;
            if (!first && sup != support) {
                throw ParseError(std::string(source) + ": inconsistent support for class " + std::to_string(c));
            }
            first = false;
            support = sup;
            if (sup > 0 && !mean) {
                throw ParseError(std::string(source) + ": class " + std::to_string(c) + " has support but no mean");
            }
            means.push_back(mean.value_or(0.0));
        }
        table.set(c, means, support);
    }
    return table;
}

void write_signatures(const std::filesystem::path& path, const SignatureTable& table) {
    write_text_file(path, encode_signatures_csv(table));
}

SignatureTable read_signatures(const std::filesystem::path& path) {
    return decode_signatures_csv(read_text_file(path), path.string());
}

} // namespace udikit
