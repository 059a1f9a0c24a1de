#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "uavsat/errors.hpp"
#include "uavsat/labels.hpp"
#include "uavsat/patch_pair.hpp"
#include "uavsat/registration.hpp"

namespace uavsat {

struct TileWindow {
    int row = 0;
    int col = 0;
    int x0 = 0;
    int y0 = 0;
    int size = 0;
    int image_width = 0;   // dimensions of the source geo-image,
    int image_height = 0;  // needed to renormalize label coordinates
    std::string geo_id;
};

struct SurveyPatch {
    std::string survey_id;
    Raster patch;
};

struct TileEntry {
    TileWindow window;
    std::vector<SurveyPatch> patches;  // one per survey, input order
};

inline std::string make_geo_id(int row, int col) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "r%03d_c%03d", row, col);
    return buf;
}

// Grid arithmetic: number of whole (rows, cols) tiles; partial tiles at the
// south/east edges are discarded.
inline std::pair<int, int> tile_grid(int width, int height, int tile) {
    require(tile >= 1, "tile size must be positive");
    return {height / tile, width / tile};
}

namespace detail {

inline Raster crop_raster(const Raster& r, int x0, int y0, int w, int h) {
    Raster out(w, h, r.gsd());
    for (int c = 0; c < Raster::kChannels; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) out.at(y, x, c) = r.at(y0 + y, x0 + x, c);
        }
    }
    return out;
}

inline bool window_fully_valid(const GeoImage& g, int x0, int y0, int size) {
    if (g.validity.empty()) return true;
    for (int y = y0; y < y0 + size; ++y) {
        const std::uint8_t* row = g.validity.data() + static_cast<std::size_t>(y) * g.raster.width();
        for (int x = x0; x < x0 + size; ++x) {
            if (row[x] == 0) return false;
        }
    }
    return true;
}

}  // namespace detail

// Breaks aligned same-extent geo-images into a row-major grid of
// non-overlapping tile x tile windows anchored at (0,0). Partial tiles at
// the south/east edges are discarded, as is any tile containing an invalid
// (warp-fill) pixel in any survey. Every emitted geo_id carries one patch
// per survey covering the identical pixel window.
inline std::vector<TileEntry> tile_aligned_set(const std::vector<GeoImage>& images,
                                               int tile = 5000) {
    require(!images.empty(), "no images to tile");
    require(tile >= 1, "tile size must be positive");
    const int w = images.front().raster.width();
    const int h = images.front().raster.height();
    for (const GeoImage& g : images) {
        require(g.raster.width() == w && g.raster.height() == h,
                "images with mismatched extents");
        require(g.origin_e == images.front().origin_e && g.origin_n == images.front().origin_n,
                "images with mismatched origins");
    }

    const auto [rows, cols] = tile_grid(w, h, tile);
    std::vector<TileEntry> out;
    for (int row = 0; row < rows; ++row) {
        for (int col = 0; col < cols; ++col) {
            const int x0 = col * tile;
            const int y0 = row * tile;
            bool valid = true;
            for (const GeoImage& g : images) {
                if (!detail::window_fully_valid(g, x0, y0, tile)) {
                    valid = false;
                    break;
                }
            }
            if (!valid) continue;
            TileEntry entry;
            entry.window = {row, col, x0, y0, tile, w, h, make_geo_id(row, col)};
            for (const GeoImage& g : images) {
                entry.patches.push_back({g.survey_id, detail::crop_raster(g.raster, x0, y0, tile, tile)});
            }
            out.push_back(std::move(entry));
        }
    }
    return out;
}

// Restricts full-image labels to a tile window and renormalizes them to
// patch-local coordinates (then clips; boxes mostly outside the window drop).
inline LabelSet window_labels(const LabelSet& labels, const TileWindow& win) {
    LabelSet local;
    for (const BoxLabel& b : labels.entries) {
        BoxLabel t = b;
        t.cx = (b.cx * win.image_width - win.x0) / win.size;
        t.cy = (b.cy * win.image_height - win.y0) / win.size;
        t.w = b.w * win.image_width / win.size;
        t.h = b.h * win.image_height / win.size;
        local.entries.push_back(t);
    }
    return clip_labels(local);
}

// One PatchPair per unordered survey combination per tile: C(n,2) pairs for
// n surveys, emitted in row-major geo_id order with surveys in lexicographic
// order within each pair.
inline std::vector<PatchPair> make_patch_pairs(
    const std::vector<TileEntry>& tiles,
    const std::map<std::string, LabelSet>& labels_by_survey = {}) {
    std::vector<PatchPair> pairs;
    for (const TileEntry& entry : tiles) {
        require(entry.patches.size() >= 2, "need at least two surveys per tile");
        std::vector<std::size_t> order(entry.patches.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return entry.patches[a].survey_id < entry.patches[b].survey_id;
        });

        std::vector<LabelSet> local_labels(entry.patches.size());
        for (std::size_t i = 0; i < entry.patches.size(); ++i) {
            auto it = labels_by_survey.find(entry.patches[i].survey_id);
            if (it != labels_by_survey.end()) {
                local_labels[i] = window_labels(it->second, entry.window);
            }
        }

        for (std::size_t a = 0; a < order.size(); ++a) {
            for (std::size_t b = a + 1; b < order.size(); ++b) {
                const std::size_t ia = order[a], ib = order[b];
                PatchPair p;
                p.patch_a = entry.patches[ia].patch;
                p.patch_b = entry.patches[ib].patch;
                p.labels_a = local_labels[ia];
                p.labels_b = local_labels[ib];
                p.geo_id = entry.window.geo_id;
                p.survey_a = entry.patches[ia].survey_id;
                p.survey_b = entry.patches[ib].survey_id;
                p.validate();
                pairs.push_back(std::move(p));
            }
        }
    }
    return pairs;
}

}  // namespace uavsat
