#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavsat/augmentation.hpp"
#include "uavsat/calibration.hpp"
#include "uavsat/errors.hpp"
#include "uavsat/image_io.hpp"
#include "uavsat/optics.hpp"
#include "uavsat/registration.hpp"
#include "uavsat/tiling.hpp"

namespace uavsat {

struct SurveyInput {
    std::string id;
    std::filesystem::path image;
    std::optional<std::filesystem::path> labels;
};

struct PipelineConfig {
    double source_gsd = 0.05;  // fallback when an image has no sidecar
    double target_gsd = 0.5;
    double q = 0.0;            // ignored when calibrate == true
    bool calibrate = false;
    int tile = 5000;
    int window = 2000;
    std::vector<SurveyInput> surveys;
    std::optional<std::filesystem::path> reference;
    std::filesystem::path output_root;
    std::vector<std::string> exclusions;
    std::optional<AugmentConfig> aug;

    void validate() const {
        require(surveys.size() >= 2, "need at least two surveys");
        require(target_gsd >= source_gsd, "target_gsd must be >= source_gsd");
        require(tile >= 1, "tile must be positive");
        require(window >= 32, "window must be at least 32");
        require(!calibrate || reference.has_value(), "calibration requires a reference image");
        require(calibrate || q > 0.0, "q must be positive (or calibration enabled)");
    }
};

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    cfg.source_gsd = j.value("source_gsd", cfg.source_gsd);
    cfg.target_gsd = j.value("target_gsd", cfg.target_gsd);
    if (j.contains("q")) {
        if (j["q"].is_string()) {
            require(j["q"].get<std::string>() == "calibrate",
                    "q must be a number or \"calibrate\"");
            cfg.calibrate = true;
        } else {
            cfg.q = j["q"].get<double>();
        }
    }
    cfg.tile = j.value("tile", cfg.tile);
    cfg.window = j.value("window", cfg.window);
    if (j.contains("surveys")) {
        for (const auto& s : j["surveys"]) {
            SurveyInput in;
            in.id = s.at("id").get<std::string>();
            in.image = s.at("image").get<std::string>();
            if (s.contains("labels")) in.labels = s["labels"].get<std::string>();
            cfg.surveys.push_back(std::move(in));
        }
    }
    if (j.contains("reference")) cfg.reference = j["reference"].get<std::string>();
    if (j.contains("output")) cfg.output_root = j["output"].get<std::string>();
    if (j.contains("exclusions")) {
        for (const auto& e : j["exclusions"]) cfg.exclusions.push_back(e.get<std::string>());
    }
    if (j.contains("aug")) cfg.aug = j["aug"].get<AugmentConfig>();
    return cfg;
}

struct BuildReport {
    int flights = 0;
    int geo_ids = 0;
    int patches = 0;     // unique high-resolution patches written
    int pairs = 0;
    int tiles_skipped = 0;
    double q_used = 0.0;
    double phi = 0.0;

    nlohmann::json to_json() const {
        return {{"flights", flights},   {"geo_ids", geo_ids},
                {"patches", patches},   {"pairs", pairs},
                {"tiles_skipped", tiles_skipped}, {"q", q_used},
                {"phi", phi}};
    }
};

inline GeoImage load_geo_image(const std::filesystem::path& path, const std::string& survey_id,
                               double default_gsd) {
    GeoImage g;
    g.raster = load_raster(path, default_gsd);
    g.survey_id = survey_id;
    if (auto meta = read_sidecar(path); meta && meta->origin) {
        g.origin_e = meta->origin->first;
        g.origin_n = meta->origin->second;
    }
    return g;
}

// Crop to the common footprint and register every survey onto the first.
// Estimated transforms that are already identity-level are not resampled.
inline std::vector<GeoImage> align_surveys(std::vector<GeoImage> images, int window) {
    std::vector<GeoImage> cropped = crop_common_extent(images);
    for (std::size_t i = 1; i < cropped.size(); ++i) {
        const SimilarityTransform t = estimate_similarity(cropped[0], cropped[i], window);
        if (!t.near_identity(0.05, 5e-3, 1e-4)) {
            cropped[i] = apply_transform(cropped[i], t);
        }
    }
    return cropped;
}

// Runs the dataset build: load, crop, align, tile, degrade, pair. Output
// tree: hires/<geo_id>/<survey>.ppm (+ .txt labels), sim/<geo_id>/... at the
// target gsd, pairs.jsonl manifest (referencing the sim tree) and
// report.json with the counts. Deterministic for fixed inputs.
inline BuildReport build_dataset(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    cfg.validate();

    std::vector<GeoImage> images;
    std::map<std::string, LabelSet> labels_by_survey;
    for (const SurveyInput& s : cfg.surveys) {
        images.push_back(load_geo_image(s.image, s.id, cfg.source_gsd));
        if (s.labels) {
            std::ifstream in(*s.labels);
            if (!in) throw IoError("cannot open labels " + s.labels->string());
            std::string text((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
            labels_by_survey[s.id] = parse_labels(text);
        }
    }

    std::vector<GeoImage> aligned = align_surveys(std::move(images), cfg.window);
    const double gsd = aligned.front().raster.gsd();
    const double phi = cfg.target_gsd / gsd;
    require(phi >= 1.0, "target gsd below source gsd");

    double q_used = cfg.q;
    if (cfg.calibrate) {
        const Raster reference = load_raster(*cfg.reference, cfg.target_gsd);
        std::vector<Raster> survey_rasters;
        std::vector<std::string> ids;
        for (const GeoImage& g : aligned) {
            survey_rasters.push_back(g.raster);
            ids.push_back(g.survey_id);
        }
        const CalibrationResult cal = calibrate_q(survey_rasters, reference, phi, {}, ids);
        q_used = cal.q_star;
        fs::create_directories(cfg.output_root);
        std::ofstream rep(cfg.output_root / "calibration.json");
        rep << calibration_report(cal).dump(2) << "\n";
    }

    std::vector<TileEntry> tiles = tile_aligned_set(aligned, cfg.tile);
    if (!cfg.exclusions.empty()) {
        std::erase_if(tiles, [&](const TileEntry& e) {
            return std::find(cfg.exclusions.begin(), cfg.exclusions.end(), e.window.geo_id) !=
                   cfg.exclusions.end();
        });
    }
    if (tiles.empty()) {
        throw DomainError("no full tiles produced: the aligned area is smaller than one tile, "
                          "or every tile was dropped for invalid pixels or exclusions");
    }

    fs::create_directories(cfg.output_root);
    std::ofstream manifest(cfg.output_root / "pairs.jsonl");
    if (!manifest) throw IoError("cannot write manifest");

    BuildReport report;
    report.flights = static_cast<int>(aligned.size());
    report.phi = phi;
    report.q_used = q_used;

    const DegradeConfig degrade_cfg{q_used, phi, cfg.target_gsd};
    int failed_tiles = 0;

    for (const TileEntry& entry : tiles) {
        try {
            const fs::path hires_dir = cfg.output_root / "hires" / entry.window.geo_id;
            const fs::path sim_dir = cfg.output_root / "sim" / entry.window.geo_id;
            fs::create_directories(hires_dir);
            fs::create_directories(sim_dir);

            const double tile_e =
                aligned.front().origin_e + entry.window.x0 * gsd;
            const double tile_n =
                aligned.front().origin_n - entry.window.y0 * gsd;

            std::vector<std::string> ordered;
            for (const SurveyPatch& p : entry.patches) ordered.push_back(p.survey_id);
            std::sort(ordered.begin(), ordered.end());

            for (const SurveyPatch& p : entry.patches) {
                LabelSet local;
                if (auto it = labels_by_survey.find(p.survey_id); it != labels_by_survey.end()) {
                    local = window_labels(it->second, entry.window);
                }
                save_raster(p.patch, hires_dir / (p.survey_id + ".ppm"),
                            std::make_pair(tile_e, tile_n));
                std::ofstream lab(hires_dir / (p.survey_id + ".txt"));
                lab << serialize_labels(local);

                const Raster sim = degrade(p.patch, degrade_cfg);
                save_raster(sim, sim_dir / (p.survey_id + ".ppm"),
                            std::make_pair(tile_e, tile_n));
                std::ofstream slab(sim_dir / (p.survey_id + ".txt"));
                slab << serialize_labels(local);
                ++report.patches;
            }

            const std::string rel = "sim/" + entry.window.geo_id + "/";
            for (std::size_t a = 0; a < ordered.size(); ++a) {
                for (std::size_t b = a + 1; b < ordered.size(); ++b) {
                    nlohmann::json rec = {
                        {"geo_id", entry.window.geo_id},
                        {"survey_a", ordered[a]},
                        {"survey_b", ordered[b]},
                        {"image_a", rel + ordered[a] + ".ppm"},
                        {"image_b", rel + ordered[b] + ".ppm"},
                        {"labels_a", rel + ordered[a] + ".txt"},
                        {"labels_b", rel + ordered[b] + ".txt"}};
                    manifest << rec.dump() << "\n";
                    ++report.pairs;
                }
            }
            ++report.geo_ids;
        } catch (const std::exception& e) {
            std::cerr << "tile " << entry.window.geo_id << " failed: " << e.what() << "\n";
            ++failed_tiles;
        }
    }
    report.tiles_skipped = failed_tiles;
    if (!tiles.empty() && report.geo_ids == 0) {
        throw DomainError("all tiles failed");
    }

    std::ofstream rep(cfg.output_root / "report.json");
    rep << report.to_json().dump(2) << "\n";
    return report;
}

}  // namespace uavsat
