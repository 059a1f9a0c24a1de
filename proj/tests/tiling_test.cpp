#include <gtest/gtest.h>

#include "test_util.hpp"
#include "uavsat/tiling.hpp"

using namespace uavsat;

namespace {

GeoImage geo(const Raster& r, const std::string& id) {
    GeoImage g;
    g.raster = r;
    g.survey_id = id;
    return g;
}

std::vector<GeoImage> aligned_set(int n, int w, int h) {
    std::vector<GeoImage> out;
    for (int i = 0; i < n; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "A%02d", i + 1);
        out.push_back(geo(testutil::natural_image(w, h, 100 + i, 0.05), id));
    }
    return out;
}

}  // namespace

TEST(TileGrid, PaperScaleArithmetic) {
    auto [rows, cols] = tile_grid(12000, 11000, 5000);
    EXPECT_EQ(rows * cols, 4);
    EXPECT_EQ(rows, 2);
    EXPECT_EQ(cols, 2);
    EXPECT_EQ(tile_grid(5000, 5000, 5000), (std::pair<int, int>{1, 1}));
    EXPECT_EQ(tile_grid(4999, 5000, 5000), (std::pair<int, int>{1, 0}));
    EXPECT_EQ(tile_grid(10000, 10000, 5000), (std::pair<int, int>{2, 2}));
}

TEST(TileAlignedSet, GridAndGeoIds) {
    const auto images = aligned_set(2, 250, 220);
    const auto tiles = tile_aligned_set(images, 100);
    ASSERT_EQ(tiles.size(), 4u);  // 2x2, partial east/south discarded
    EXPECT_EQ(tiles[0].window.geo_id, "r000_c000");
    EXPECT_EQ(tiles[1].window.geo_id, "r000_c001");
    EXPECT_EQ(tiles[2].window.geo_id, "r001_c000");
    EXPECT_EQ(tiles[3].window.geo_id, "r001_c001");
    for (const TileEntry& e : tiles) {
        ASSERT_EQ(e.patches.size(), 2u);
        for (const SurveyPatch& p : e.patches) {
            EXPECT_EQ(p.patch.width(), 100);
            EXPECT_EQ(p.patch.height(), 100);
        }
    }
    // patch content matches the source window in every survey
    const TileEntry& t3 = tiles[3];
    EXPECT_EQ(t3.patches[1].patch.at(5, 6, 2), images[1].raster.at(105, 106, 2));
}

TEST(TileAlignedSet, ExactFitSingleTile) {
    const auto tiles = tile_aligned_set(aligned_set(2, 64, 64), 64);
    ASSERT_EQ(tiles.size(), 1u);
}

TEST(TileAlignedSet, PartialOnlyMeansNoTiles) {
    const auto tiles = tile_aligned_set(aligned_set(2, 63, 64), 64);
    EXPECT_TRUE(tiles.empty());
}

TEST(TileAlignedSet, PartitionIsDisjointPrefix) {
    const auto images = aligned_set(1, 330, 170);
    const auto tiles = tile_aligned_set(images, 80);
    auto [rows, cols] = tile_grid(330, 170, 80);
    ASSERT_EQ(tiles.size(), static_cast<std::size_t>(rows * cols));
    std::vector<int> covered(330 * 170, 0);
    for (const TileEntry& e : tiles) {
        for (int y = e.window.y0; y < e.window.y0 + e.window.size; ++y) {
            for (int x = e.window.x0; x < e.window.x0 + e.window.size; ++x) {
                covered[y * 330 + x] += 1;
            }
        }
    }
    for (int y = 0; y < 170; ++y) {
        for (int x = 0; x < 330; ++x) {
            const bool in_prefix = (x < cols * 80) && (y < rows * 80);
            ASSERT_EQ(covered[y * 330 + x], in_prefix ? 1 : 0) << x << "," << y;
        }
    }
}

TEST(TileAlignedSet, InvalidPixelsDropTile) {
    auto images = aligned_set(2, 200, 100);
    // invalidate one pixel inside tile (r000,c001) of survey 2
    GeoImage& g = images[1];
    g.validity.assign(200 * 100, 1);
    g.validity[40 * 200 + 150] = 0;
    const auto tiles = tile_aligned_set(images, 100);
    ASSERT_EQ(tiles.size(), 1u);
    EXPECT_EQ(tiles[0].window.geo_id, "r000_c000");
}

TEST(TileAlignedSet, MismatchedExtentsRejected) {
    std::vector<GeoImage> images = aligned_set(1, 64, 64);
    images.push_back(geo(testutil::natural_image(65, 64, 1, 0.05), "B1"));
    EXPECT_THROW(tile_aligned_set(images, 32), DomainError);
}

TEST(MakePatchPairs, PairCountsAreCombinations) {
    for (int n : {2, 3, 15}) {
        const auto tiles = tile_aligned_set(aligned_set(n, 64, 64), 32);
        ASSERT_EQ(tiles.size(), 4u);
        const auto pairs = make_patch_pairs(tiles);
        EXPECT_EQ(pairs.size(), static_cast<std::size_t>(4 * n * (n - 1) / 2)) << "n=" << n;
    }
}

TEST(MakePatchPairs, SurveysOrderedAndDistinct) {
    const auto tiles = tile_aligned_set(aligned_set(3, 32, 32), 32);
    const auto pairs = make_patch_pairs(tiles);
    ASSERT_EQ(pairs.size(), 3u);
    for (const PatchPair& p : pairs) {
        EXPECT_LT(p.survey_a, p.survey_b);
        EXPECT_TRUE(p.patch_a.same_shape(p.patch_b));
    }
    EXPECT_EQ(pairs[0].survey_a, "A01");
    EXPECT_EQ(pairs[0].survey_b, "A02");
    EXPECT_EQ(pairs[2].survey_a, "A02");
    EXPECT_EQ(pairs[2].survey_b, "A03");
}

TEST(MakePatchPairs, LabelsWindowedAndRenormalized) {
    const auto images = aligned_set(2, 200, 200);
    const auto tiles = tile_aligned_set(images, 100);
    // one box centred at (150, 50) px with 20x20 px extent: inside tile r000_c001
    LabelSet full;
    full.entries.push_back({0, 0.75, 0.25, 0.1, 0.1});
    std::map<std::string, LabelSet> labels{{"A01", full}};
    const auto pairs = make_patch_pairs(tiles, labels);
    ASSERT_EQ(pairs.size(), 4u);
    const PatchPair& p01 = pairs[1];  // r000_c001
    ASSERT_EQ(p01.geo_id, "r000_c001");
    ASSERT_EQ(p01.labels_a.size(), 1u);
    EXPECT_NEAR(p01.labels_a.entries[0].cx, 0.5, 1e-9);
    EXPECT_NEAR(p01.labels_a.entries[0].cy, 0.5, 1e-9);
    EXPECT_NEAR(p01.labels_a.entries[0].w, 0.2, 1e-9);
    EXPECT_TRUE(p01.labels_b.empty());
    // the same box is absent from the other tiles
    EXPECT_TRUE(pairs[0].labels_a.empty());
    EXPECT_TRUE(pairs[2].labels_a.empty());
}

TEST(MakePatchPairs, BoxSpanningTilesClipsPerTile) {
    const auto images = aligned_set(2, 100, 100);
    const auto tiles = tile_aligned_set(images, 50);
    // box centred on the vertical seam: 40% in the west tile, 60% in the east
    LabelSet full;
    full.entries.push_back({1, 0.52, 0.25, 0.2, 0.2});
    std::map<std::string, LabelSet> labels{{"A01", full}};
    const auto pairs = make_patch_pairs(tiles, labels);
    const PatchPair& west = pairs[0];
    const PatchPair& east = pairs[1];
    ASSERT_EQ(west.labels_a.size(), 1u);
    ASSERT_EQ(east.labels_a.size(), 1u);
    EXPECT_NEAR(west.labels_a.entries[0].w, 0.16, 1e-6);  // 8 px of 50
    EXPECT_NEAR(east.labels_a.entries[0].w, 0.24, 1e-6);  // 12 px of 50
}
