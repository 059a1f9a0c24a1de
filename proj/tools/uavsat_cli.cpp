// Command-line front end: lv, calibrate, degrade, align, build, augment.
// Exit codes: 0 ok, 1 usage, 2 I/O failure, 3 domain failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uavsat/uavsat.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw uavsat::IoError("cannot open " + p.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

uavsat::AugmentConfig load_aug_config(const std::optional<std::string>& path,
                                      std::optional<std::uint64_t> seed_override) {
    uavsat::AugmentConfig cfg;
    if (path) {
        json j = json::parse(read_text_file(*path));
        cfg = j.get<uavsat::AugmentConfig>();
    }
    if (seed_override) cfg.seed = *seed_override;
    return cfg;
}

int cmd_lv(const std::string& image) {
    const uavsat::Raster r = uavsat::load_raster(image);
    const uavsat::BlurReport rep = uavsat::laplacian_variance(r);
    std::printf("lv=%.4f\n", rep.lv);
    return 0;
}

int cmd_degrade(const std::string& in_path, const std::string& out_path, double q,
                double target_gsd, double source_gsd, int support) {
    uavsat::Raster r = uavsat::load_raster(in_path, source_gsd);
    const double phi = target_gsd / r.gsd();
    uavsat::require(phi >= 1.0, "target gsd below source gsd");
    uavsat::DegradeConfig cfg{q, phi, target_gsd};
    if (support > 0) {
        // explicit support: run the stages directly
        const uavsat::PsfKernel k = uavsat::make_psf(q, phi, support);
        uavsat::Raster blurred = uavsat::convolve(r, k);
        uavsat::Raster out = uavsat::downsample_bicubic(blurred, phi);
        out.set_gsd(target_gsd);
        uavsat::save_raster(out, out_path);
    } else {
        uavsat::save_raster(uavsat::degrade(r, cfg), out_path);
    }
    return 0;
}

int cmd_calibrate(const std::vector<std::string>& surveys, const std::string& reference,
                  double phi, double source_gsd, const uavsat::SweepConfig& sweep,
                  const std::string& out_path) {
    std::vector<uavsat::Raster> rasters;
    std::vector<std::string> ids;
    for (const std::string& s : surveys) {
        rasters.push_back(uavsat::load_raster(s, source_gsd));
        ids.push_back(fs::path(s).stem().string());
    }
    const uavsat::Raster ref = uavsat::load_raster(reference);
    const uavsat::CalibrationResult res = uavsat::calibrate_q(rasters, ref, phi, sweep, ids);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw uavsat::IoError("cannot write " + out_path);
        out << uavsat::calibration_report(res).dump(2) << "\n";
    }
    std::printf("q_star=%.4f\n", res.q_star);
    return 0;
}

int cmd_align(const std::vector<std::string>& surveys, const std::string& out_dir, int window,
              double source_gsd) {
    std::vector<uavsat::GeoImage> images;
    for (const std::string& s : surveys) {
        images.push_back(
            uavsat::load_geo_image(s, fs::path(s).stem().string(), source_gsd));
    }
    std::vector<uavsat::GeoImage> cropped = uavsat::crop_common_extent(images);
    fs::create_directories(out_dir);

    json transforms = json::array();
    for (std::size_t i = 0; i < cropped.size(); ++i) {
        uavsat::SimilarityTransform t;
        if (i > 0) {
            t = uavsat::estimate_similarity(cropped[0], cropped[i], window);
            if (!t.near_identity(0.05, 5e-3, 1e-4)) {
                cropped[i] = uavsat::apply_transform(cropped[i], t);
            }
        }
        const fs::path out = fs::path(out_dir) / (cropped[i].survey_id + ".ppm");
        uavsat::save_raster(cropped[i].raster, out,
                            std::make_pair(cropped[i].origin_e, cropped[i].origin_n));
        transforms.push_back({{"survey", cropped[i].survey_id},
                              {"dx", t.dx},
                              {"dy", t.dy},
                              {"theta_deg", t.theta_deg},
                              {"scale", t.scale}});
    }
    std::ofstream tf(fs::path(out_dir) / "transforms.json");
    tf << transforms.dump(2) << "\n";
    std::printf("aligned %zu surveys into %s\n", cropped.size(), out_dir.c_str());
    return 0;
}

int cmd_build(const std::string& config_path, const std::string& out_override) {
    json j = json::parse(read_text_file(config_path));
    uavsat::PipelineConfig cfg = uavsat::pipeline_config_from_json(j);
    if (!out_override.empty()) cfg.output_root = out_override;
    // paths in the config are relative to the config file itself
    const fs::path base = fs::path(config_path).parent_path();
    for (uavsat::SurveyInput& s : cfg.surveys) {
        if (s.image.is_relative()) s.image = base / s.image;
        if (s.labels && s.labels->is_relative()) s.labels = base / *s.labels;
    }
    if (cfg.reference && cfg.reference->is_relative()) cfg.reference = base / *cfg.reference;
    if (cfg.output_root.is_relative()) cfg.output_root = base / cfg.output_root;
    const uavsat::BuildReport rep = uavsat::build_dataset(cfg);
    std::printf("flights=%d geo_ids=%d patches=%d pairs=%d\n", rep.flights, rep.geo_ids,
                rep.patches, rep.pairs);
    return 0;
}

int cmd_augment(const std::string& image_a, const std::string& image_b,
                const std::optional<std::string>& labels_a,
                const std::optional<std::string>& labels_b,
                const std::optional<std::string>& aug_config,
                std::optional<std::uint64_t> seed, const std::string& out_dir) {
    uavsat::PatchPair pair;
    pair.patch_a = uavsat::load_raster(image_a);
    pair.patch_b = uavsat::load_raster(image_b);
    pair.survey_a = fs::path(image_a).stem().string();
    pair.survey_b = fs::path(image_b).stem().string();
    if (labels_a) pair.labels_a = uavsat::parse_labels(read_text_file(*labels_a));
    if (labels_b) pair.labels_b = uavsat::parse_labels(read_text_file(*labels_b));

    const uavsat::AugmentConfig cfg = load_aug_config(aug_config, seed);
    const uavsat::PatchPair out = uavsat::augment_pair(pair, cfg);

    fs::create_directories(out_dir);
    uavsat::save_raster(out.patch_a, fs::path(out_dir) / (pair.survey_a + "_aug.ppm"));
    uavsat::save_raster(out.patch_b, fs::path(out_dir) / (pair.survey_b + "_aug.ppm"));
    std::ofstream la(fs::path(out_dir) / (pair.survey_a + "_aug.txt"));
    la << uavsat::serialize_labels(out.labels_a);
    std::ofstream lb(fs::path(out_dir) / (pair.survey_b + "_aug.txt"));
    lb << uavsat::serialize_labels(out.labels_b);
    std::printf("augmented pair written to %s\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAV-to-satellite imagery degradation pipeline"};
    app.require_subcommand(1);

    // lv
    std::string lv_image;
    CLI::App* lv = app.add_subcommand("lv", "Laplacian-variance blur metric of an image");
    lv->add_option("image", lv_image, "input image (PPM)")->required();

    // degrade
    std::string dg_in, dg_out;
    double dg_q = 4.34, dg_target = 0.5, dg_source = 0.05;
    int dg_support = 0;
    CLI::App* dg = app.add_subcommand("degrade", "simulate satellite optics and gsd");
    dg->add_option("--input,-i", dg_in)->required();
    dg->add_option("--output,-o", dg_out)->required();
    dg->add_option("--q", dg_q, "aperture quality factor Q");
    dg->add_option("--target-gsd", dg_target, "output gsd, m/px");
    dg->add_option("--source-gsd", dg_source, "fallback input gsd when no sidecar");
    dg->add_option("--psf-support", dg_support, "explicit odd PSF support (0 = auto)");

    // calibrate
    std::vector<std::string> cal_surveys;
    std::string cal_reference, cal_out;
    double cal_phi = 10.0, cal_source = 0.05;
    uavsat::SweepConfig sweep;
    CLI::App* cal = app.add_subcommand("calibrate", "tune Q against a reference image");
    cal->add_option("--survey,-s", cal_surveys, "survey image (repeatable)")->required();
    cal->add_option("--reference,-r", cal_reference, "reference image at target gsd")->required();
    cal->add_option("--phi", cal_phi, "gsd ratio");
    cal->add_option("--source-gsd", cal_source);
    cal->add_option("--q-min", sweep.q_min);
    cal->add_option("--q-max", sweep.q_max);
    cal->add_option("--q-step", sweep.coarse_step);
    cal->add_option("--lv-tol", sweep.lv_tol);
    cal->add_option("--out,-o", cal_out, "calibration report JSON");

    // align
    std::vector<std::string> al_surveys;
    std::string al_out;
    int al_window = 2000;
    double al_source = 0.05;
    CLI::App* al = app.add_subcommand("align", "crop to common extent and register surveys");
    al->add_option("--survey,-s", al_surveys)->required();
    al->add_option("--out,-o", al_out)->required();
    al->add_option("--window", al_window, "registration window, px");
    al->add_option("--source-gsd", al_source);

    // build
    std::string b_config, b_out;
    CLI::App* bd = app.add_subcommand("build", "run the full dataset build");
    bd->add_option("--config,-c", b_config, "pipeline config JSON")->required();
    bd->add_option("--out,-o", b_out, "override output root");

    // augment
    std::string ag_a, ag_b, ag_out;
    std::optional<std::string> ag_la, ag_lb, ag_cfg;
    std::optional<std::uint64_t> ag_seed;
    CLI::App* ag = app.add_subcommand("augment", "apply paired augmentations");
    ag->add_option("--image-a", ag_a)->required();
    ag->add_option("--image-b", ag_b)->required();
    ag->add_option("--labels-a", ag_la);
    ag->add_option("--labels-b", ag_lb);
    ag->add_option("--aug-config", ag_cfg, "augmentation config JSON");
    ag->add_option("--seed", ag_seed, "seed override");
    ag->add_option("--out,-o", ag_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage failures map to 1
    }

    try {
        if (lv->parsed()) return cmd_lv(lv_image);
        if (dg->parsed()) return cmd_degrade(dg_in, dg_out, dg_q, dg_target, dg_source, dg_support);
        if (cal->parsed())
            return cmd_calibrate(cal_surveys, cal_reference, cal_phi, cal_source, sweep, cal_out);
        if (al->parsed()) return cmd_align(al_surveys, al_out, al_window, al_source);
        if (bd->parsed()) return cmd_build(b_config, b_out);
        if (ag->parsed()) return cmd_augment(ag_a, ag_b, ag_la, ag_lb, ag_cfg, ag_seed, ag_out);
    } catch (const uavsat::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const uavsat::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
