#include <gtest/gtest.h>

#include <fstream>

#include "test_util.hpp"
#include "uavsat/pipeline.hpp"

using namespace uavsat;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Three overlapping surveys cut from one large plate so that alignment is
// content-consistent, with per-survey label files.
PipelineConfig synthetic_site(const std::filesystem::path& dir, int size = 260, int tile = 100) {
    std::filesystem::create_directories(dir);
    const Raster plate = testutil::natural_image(size + 40, size + 40, 314, 0.05);
    PipelineConfig cfg;
    for (int i = 0; i < 3; ++i) {
        Raster crop(size, size, 0.05);
        const int ox = i * 10, oy = i * 5;
        for (int c = 0; c < 3; ++c) {
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    crop.at(y, x, c) = plate.at(oy + y, ox + x, c);
                }
            }
        }
        const std::string id = "S" + std::to_string(i + 1);
        const auto img = dir / (id + ".ppm");
        // origins follow the crop offsets so footprints overlap but differ
        save_raster(crop, img, std::make_pair(1000.0 + ox * 0.05, 2000.0 - oy * 0.05));
        LabelSet labels;
        labels.entries.push_back({0, 0.25, 0.25, 0.08, 0.08});
        labels.entries.push_back({1, 0.6, 0.7, 0.05, 0.05});
        const auto lab = dir / (id + ".txt");
        std::ofstream out(lab);
        out << serialize_labels(labels);
        cfg.surveys.push_back({id, img, lab});
    }
    cfg.source_gsd = 0.05;
    cfg.target_gsd = 0.25;
    cfg.q = 1.5;
    cfg.tile = tile;
    cfg.window = 128;
    cfg.output_root = dir / "out";
    return cfg;
}

}  // namespace

TEST(Pipeline, BuildProducesExpectedTreeAndCounts) {
    testutil::TempDir tmp("build");
    PipelineConfig cfg = synthetic_site(tmp.path());
    const BuildReport rep = build_dataset(cfg);

    // 260x260 surveys intersect to 240x250 after the crop; tile 100 -> 2x2
    EXPECT_EQ(rep.flights, 3);
    EXPECT_EQ(rep.geo_ids, 4);
    EXPECT_EQ(rep.pairs, 4 * 3);  // C(3,2) per geo_id
    EXPECT_EQ(rep.patches, 4 * 3);

    // tree exists
    EXPECT_TRUE(std::filesystem::exists(cfg.output_root / "hires" / "r000_c000" / "S1.ppm"));
    EXPECT_TRUE(std::filesystem::exists(cfg.output_root / "hires" / "r000_c000" / "S1.txt"));
    EXPECT_TRUE(std::filesystem::exists(cfg.output_root / "sim" / "r001_c001" / "S3.ppm"));
    EXPECT_TRUE(std::filesystem::exists(cfg.output_root / "pairs.jsonl"));
    EXPECT_TRUE(std::filesystem::exists(cfg.output_root / "report.json"));

    // sim dimensions are hires / phi with the target gsd
    const Raster hi = load_raster(cfg.output_root / "hires" / "r000_c000" / "S1.ppm");
    const Raster lo = load_raster(cfg.output_root / "sim" / "r000_c000" / "S1.ppm");
    EXPECT_EQ(hi.width(), 100);
    EXPECT_EQ(lo.width(), 20);  // phi = 5
    EXPECT_DOUBLE_EQ(lo.gsd(), 0.25);

    // manifest: 12 records, schema keys present, references the sim tree
    const std::string manifest = slurp(cfg.output_root / "pairs.jsonl");
    int lines = 0;
    std::istringstream iss(manifest);
    std::string line;
    while (std::getline(iss, line)) {
        if (line.empty()) continue;
        ++lines;
        const auto rec = nlohmann::json::parse(line);
        for (const char* key :
             {"geo_id", "survey_a", "survey_b", "image_a", "image_b", "labels_a", "labels_b"}) {
            ASSERT_TRUE(rec.contains(key)) << key;
        }
        EXPECT_LT(rec["survey_a"].get<std::string>(), rec["survey_b"].get<std::string>());
        EXPECT_TRUE(std::filesystem::exists(cfg.output_root / rec["image_a"].get<std::string>()));
        EXPECT_TRUE(std::filesystem::exists(cfg.output_root / rec["labels_b"].get<std::string>()));
    }
    EXPECT_EQ(lines, 12);
}

TEST(Pipeline, RerunIsByteIdentical) {
    testutil::TempDir tmp("determinism");
    PipelineConfig cfg = synthetic_site(tmp.path(), 200, 90);
    build_dataset(cfg);
    const std::string manifest1 = slurp(cfg.output_root / "pairs.jsonl");
    const std::string report1 = slurp(cfg.output_root / "report.json");
    const std::string patch1 = slurp(cfg.output_root / "sim" / "r000_c000" / "S2.ppm");
    std::filesystem::remove_all(cfg.output_root);
    build_dataset(cfg);
    EXPECT_EQ(slurp(cfg.output_root / "pairs.jsonl"), manifest1);
    EXPECT_EQ(slurp(cfg.output_root / "report.json"), report1);
    EXPECT_EQ(slurp(cfg.output_root / "sim" / "r000_c000" / "S2.ppm"), patch1);
}

TEST(Pipeline, ExclusionsSkipGeoIds) {
    testutil::TempDir tmp("excl");
    PipelineConfig cfg = synthetic_site(tmp.path());
    cfg.exclusions = {"r000_c001", "r001_c000"};
    const BuildReport rep = build_dataset(cfg);
    EXPECT_EQ(rep.geo_ids, 2);
    EXPECT_EQ(rep.pairs, 2 * 3);
    EXPECT_FALSE(std::filesystem::exists(cfg.output_root / "hires" / "r000_c001"));
}

TEST(Pipeline, NoOverlapFails) {
    testutil::TempDir tmp("noover");
    PipelineConfig cfg = synthetic_site(tmp.path(), 100, 50);
    // move the second survey a kilometre east
    save_raster(load_raster(cfg.surveys[1].image), cfg.surveys[1].image,
                std::make_pair(99000.0, 2000.0));
    EXPECT_THROW(build_dataset(cfg), DomainError);
}

TEST(Pipeline, ConfigFromJson) {
    const nlohmann::json j = {
        {"source_gsd", 0.05},
        {"target_gsd", 0.5},
        {"q", "calibrate"},
        {"tile", 512},
        {"window", 256},
        {"surveys",
         {{{"id", "A1"}, {"image", "a1.ppm"}, {"labels", "a1.txt"}},
          {{"id", "A2"}, {"image", "a2.ppm"}}}},
        {"reference", "ref.ppm"},
        {"output", "out"},
        {"exclusions", {"r000_c000"}}};
    const PipelineConfig cfg = pipeline_config_from_json(j);
    EXPECT_TRUE(cfg.calibrate);
    EXPECT_EQ(cfg.tile, 512);
    ASSERT_EQ(cfg.surveys.size(), 2u);
    EXPECT_EQ(cfg.surveys[0].id, "A1");
    ASSERT_TRUE(cfg.surveys[0].labels.has_value());
    EXPECT_FALSE(cfg.surveys[1].labels.has_value());
    ASSERT_TRUE(cfg.reference.has_value());
    EXPECT_EQ(cfg.exclusions.size(), 1u);
    EXPECT_NO_THROW(cfg.validate());

    const nlohmann::json bad = {{"q", "auto"}};
    EXPECT_THROW(pipeline_config_from_json(bad), DomainError);
}

TEST(Pipeline, ValidationCatchesBadConfigs) {
    PipelineConfig cfg;
    cfg.q = 2.0;
    cfg.surveys.resize(1);
    EXPECT_THROW(cfg.validate(), DomainError);  // < 2 surveys
    cfg.surveys.resize(2);
    cfg.target_gsd = 0.01;
    EXPECT_THROW(cfg.validate(), DomainError);  // target below source
    cfg.target_gsd = 0.5;
    cfg.q = 0.0;
    EXPECT_THROW(cfg.validate(), DomainError);  // no q and no calibration
}
