#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavsat/errors.hpp"
#include "uavsat/raster.hpp"

namespace uavsat {

// Images are stored as binary PPM (P6, maxval 255): a lossless 8-bit RGB
// format readable by virtually every image tool. Acquisition metadata rides
// in a JSON sidecar next to the image.
struct SidecarMeta {
    std::optional<double> gsd_m_per_px;
    std::optional<std::pair<double, double>> origin;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& image_path) {
    std::filesystem::path p = image_path;
    p += ".json";
    return p;
}

inline std::optional<SidecarMeta> read_sidecar(const std::filesystem::path& image_path) {
    std::filesystem::path p = sidecar_path(image_path);
    std::ifstream in(p);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("invalid sidecar " + p.string() + ": " + e.what());
    }
    SidecarMeta meta;
    if (j.contains("gsd_m_per_px")) meta.gsd_m_per_px = j["gsd_m_per_px"].get<double>();
    if (j.contains("origin")) {
        auto arr = j["origin"];
        if (!arr.is_array() || arr.size() != 2) {
            throw IoError("invalid sidecar origin in " + p.string());
        }
        meta.origin = std::make_pair(arr[0].get<double>(), arr[1].get<double>());
    }
    return meta;
}

inline void write_sidecar(const std::filesystem::path& image_path, const SidecarMeta& meta) {
    nlohmann::json j;
    if (meta.gsd_m_per_px) j["gsd_m_per_px"] = *meta.gsd_m_per_px;
    if (meta.origin) j["origin"] = {meta.origin->first, meta.origin->second};
    std::ofstream out(sidecar_path(image_path), std::ios::binary);
    if (!out) throw IoError("cannot write sidecar for " + image_path.string());
    out << j.dump() << "\n";
}

namespace detail {

inline int ppm_next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {  // comment runs to end of line
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok.empty() ? EOF : 0;
}

}  // namespace detail

// Loads a PPM image. The gsd comes from the sidecar when present, otherwise
// from `default_gsd`.
inline Raster load_raster(const std::filesystem::path& path, double default_gsd = 1.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::string tok;
    if (detail::ppm_next_token(in, tok) == EOF) throw IoError("decode failure: empty file");
    if (tok != "P6") throw IoError("unsupported format: expected P6 PPM, got '" + tok + "'");

    long w = 0, h = 0, maxval = 0;
    try {
        if (detail::ppm_next_token(in, tok) == EOF) throw IoError("decode failure: truncated header");
        w = std::stol(tok);
        if (detail::ppm_next_token(in, tok) == EOF) throw IoError("decode failure: truncated header");
        h = std::stol(tok);
        if (detail::ppm_next_token(in, tok) == EOF) throw IoError("decode failure: truncated header");
        maxval = std::stol(tok);
    } catch (const std::logic_error&) {
        throw IoError("decode failure: malformed header in " + path.string());
    }
    if (w < 1 || h < 1) throw IoError("zero-area image: " + path.string());
    if (maxval != 255) throw IoError("unsupported format: maxval must be 255");

    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw IoError("decode failure: truncated pixel data in " + path.string());
    }

    double gsd = default_gsd;
    if (auto meta = read_sidecar(path); meta && meta->gsd_m_per_px) {
        gsd = *meta->gsd_m_per_px;
    }

    Raster r(static_cast<int>(w), static_cast<int>(h), gsd);
    std::size_t i = 0;
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            r.at(y, x, 0) = bytes[i++];
            r.at(y, x, 1) = bytes[i++];
            r.at(y, x, 2) = bytes[i++];
        }
    }
    return r;
}

// Saves as PPM, clamping to [0,255] and rounding to the nearest integer.
// Writes a gsd sidecar alongside. save then load round-trips pixels exactly
// for integer-valued rasters.
inline void save_raster(const Raster& r, const std::filesystem::path& path,
                        std::optional<std::pair<double, double>> origin = std::nullopt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P6\n" << r.width() << " " << r.height() << "\n255\n";

    std::vector<std::uint8_t> bytes;
    bytes.reserve(static_cast<std::size_t>(r.width()) * r.height() * 3);
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            for (int c = 0; c < Raster::kChannels; ++c) {
                double v = r.at(y, x, c);
                if (!std::isfinite(v)) throw IoError("non-finite pixel value at save");
                bytes.push_back(static_cast<std::uint8_t>(std::lround(clamp_byte(v))));
            }
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failure: " + path.string());
    out.close();

    SidecarMeta meta;
    meta.gsd_m_per_px = r.gsd();
    meta.origin = origin;
    write_sidecar(path, meta);
}

}  // namespace uavsat
