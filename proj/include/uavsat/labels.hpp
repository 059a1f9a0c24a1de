#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "uavsat/errors.hpp"

namespace uavsat {

// One axis-aligned bounding box in normalized image coordinates: centre
// (cx, cy) in [0,1], extent (w, h) in (0,1].
struct BoxLabel {
    int class_id = 0;
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    friend bool operator==(const BoxLabel& a, const BoxLabel& b) {
        return a.class_id == b.class_id && a.cx == b.cx && a.cy == b.cy && a.w == b.w &&
               a.h == b.h;
    }
};

struct LabelSet {
    std::vector<BoxLabel> entries;

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }

    friend bool operator==(const LabelSet& a, const LabelSet& b) {
        return a.entries == b.entries;
    }
};

namespace detail {

inline double parse_label_field(std::string_view tok) {
    double value = 0.0;
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw DomainError("non-numeric field in label record: '" + std::string(tok) + "'");
    }
    return value;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace detail

// Parses newline-separated "class cx cy w h" records. Blank lines are
// skipped; any malformed or out-of-range field throws.
inline LabelSet parse_labels(std::string_view text) {
    LabelSet set;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        auto fields = detail::split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() != 5) {
            throw DomainError("wrong field count in label record: expected 5, got " +
                              std::to_string(fields.size()));
        }
        BoxLabel box;
        double cls = detail::parse_label_field(fields[0]);
        if (cls < 0.0 || cls != std::floor(cls)) {
            throw DomainError("class id must be a non-negative integer");
        }
        box.class_id = static_cast<int>(cls);
        box.cx = detail::parse_label_field(fields[1]);
        box.cy = detail::parse_label_field(fields[2]);
        box.w = detail::parse_label_field(fields[3]);
        box.h = detail::parse_label_field(fields[4]);
        if (box.cx < 0.0 || box.cx > 1.0 || box.cy < 0.0 || box.cy > 1.0) {
            throw DomainError("coordinate out of range: centre must lie in [0,1]");
        }
        if (box.w <= 0.0 || box.w > 1.0 || box.h <= 0.0 || box.h > 1.0) {
            throw DomainError("size out of range: extents must lie in (0,1]");
        }
        set.entries.push_back(box);
    }
    return set;
}

// Serializes with 6 decimal places per field, one record per line.
// parse_labels(serialize_labels(l)) == l for values representable at 6 dp.
inline std::string serialize_labels(const LabelSet& labels) {
    std::string out;
    char buf[128];
    for (const BoxLabel& b : labels.entries) {
        int n = std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n", b.class_id, b.cx,
                              b.cy, b.w, b.h);
        out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
}

namespace detail {

// Snaps a clipped edge to a dyadic grid so that centre/width re-derivation is
// exact and a second clip pass reproduces the box bit-identically.
inline double snap_edge(double v) {
    constexpr double kGrid = 67108864.0;  // 2^26
    return std::round(v * kGrid) / kGrid;
}

}  // namespace detail

// Intersects every box with the unit square. Boxes that keep less than
// `min_area_ratio` of their original area are dropped. Idempotent.
inline LabelSet clip_labels(const LabelSet& labels, double min_area_ratio = 0.25) {
    LabelSet out;
    for (const BoxLabel& b : labels.entries) {
        double half_w = b.w / 2.0;
        double half_h = b.h / 2.0;
        if (b.cx - half_w >= 0.0 && b.cx + half_w <= 1.0 && b.cy - half_h >= 0.0 &&
            b.cy + half_h <= 1.0) {
            out.entries.push_back(b);
            continue;
        }
        double x0 = std::max(0.0, b.cx - half_w);
        double x1 = std::min(1.0, b.cx + half_w);
        double y0 = std::max(0.0, b.cy - half_h);
        double y1 = std::min(1.0, b.cy + half_h);
        if (x1 <= x0 || y1 <= y0) continue;
        double kept = ((x1 - x0) * (y1 - y0)) / (b.w * b.h);
        if (kept < min_area_ratio) continue;
        BoxLabel clipped = b;
        // Snap only the clipped axis; the edges land on a dyadic grid so a
        // second pass re-derives them exactly (idempotence).
        if (b.cx - half_w < 0.0 || b.cx + half_w > 1.0) {
            x0 = detail::snap_edge(x0);
            x1 = detail::snap_edge(x1);
            if (x1 <= x0) continue;
            clipped.cx = (x0 + x1) / 2.0;
            clipped.w = x1 - x0;
        }
        if (b.cy - half_h < 0.0 || b.cy + half_h > 1.0) {
            y0 = detail::snap_edge(y0);
            y1 = detail::snap_edge(y1);
            if (y1 <= y0) continue;
            clipped.cy = (y0 + y1) / 2.0;
            clipped.h = y1 - y0;
        }
        out.entries.push_back(clipped);
    }
    return out;
}

}  // namespace uavsat
