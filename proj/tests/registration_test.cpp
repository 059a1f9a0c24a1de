#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "uavsat/registration.hpp"

using namespace uavsat;

namespace {

GeoImage geo(const Raster& r, double e, double n, const std::string& id) {
    GeoImage g;
    g.raster = r;
    g.origin_e = e;
    g.origin_n = n;
    g.survey_id = id;
    return g;
}

// moving image whose registration against `fixed` should recover `truth`
GeoImage synth_moving(const GeoImage& fixed, const SimilarityTransform& truth) {
    GeoImage m = apply_transform(fixed, truth.inverse());
    m.survey_id = "moving";
    m.validity.clear();
    return m;
}

}  // namespace

TEST(SimilarityTransform, InverseComposesToIdentity) {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        SimilarityTransform t{uni(gen) * 30, uni(gen) * 30, uni(gen) * 45, 1.0 + 0.3 * uni(gen)};
        const SimilarityTransform id = compose(t, t.inverse());
        EXPECT_NEAR(id.dx, 0.0, 1e-6);
        EXPECT_NEAR(id.dy, 0.0, 1e-6);
        EXPECT_NEAR(id.theta_deg, 0.0, 1e-6);
        EXPECT_NEAR(id.scale, 1.0, 1e-6);
    }
}

TEST(CropCommonExtent, IdenticalFootprintsUnchanged) {
    const Raster r = testutil::natural_image(64, 48, 1, 0.1);
    const auto out = crop_common_extent({geo(r, 500.0, 900.0, "a"), geo(r, 500.0, 900.0, "b")});
    ASSERT_EQ(out.size(), 2u);
    for (const GeoImage& g : out) {
        EXPECT_EQ(g.raster.width(), 64);
        EXPECT_EQ(g.raster.height(), 48);
        EXPECT_EQ(g.origin_e, 500.0);
        EXPECT_EQ(g.origin_n, 900.0);
    }
    EXPECT_TRUE(out[0].raster == r);
}

TEST(CropCommonExtent, EastOffsetLosesColumns) {
    const Raster a = testutil::natural_image(300, 200, 2, 1.0);
    const Raster b = testutil::natural_image(300, 200, 3, 1.0);
    // b sits 100 m (= 100 px) east of a
    const auto out = crop_common_extent({geo(a, 0.0, 0.0, "a"), geo(b, 100.0, 0.0, "b")});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].raster.width(), 200);
    EXPECT_EQ(out[1].raster.width(), 200);
    EXPECT_EQ(out[0].raster.height(), 200);
    EXPECT_EQ(out[0].origin_e, out[1].origin_e);
    EXPECT_EQ(out[0].origin_n, out[1].origin_n);
    // pixel (0,0) of each output is the same ground point: a's column 100
    EXPECT_EQ(out[0].raster.at(0, 0, 0), a.at(0, 100, 0));
    EXPECT_EQ(out[1].raster.at(0, 0, 0), b.at(0, 0, 0));
}

TEST(CropCommonExtent, NorthSouthOffsets) {
    const Raster a = testutil::natural_image(100, 100, 4, 0.5);
    const Raster b = testutil::natural_image(100, 100, 5, 0.5);
    // b origin 10 m south of a (=20 px at 0.5 m/px)
    const auto out = crop_common_extent({geo(a, 0.0, 50.0, "a"), geo(b, 0.0, 40.0, "b")});
    EXPECT_EQ(out[0].raster.height(), 80);
    EXPECT_EQ(out[1].raster.height(), 80);
    EXPECT_EQ(out[0].origin_n, 40.0);
    EXPECT_EQ(out[0].raster.at(0, 0, 1), a.at(20, 0, 1));
    EXPECT_EQ(out[1].raster.at(0, 0, 1), b.at(0, 0, 1));
}

TEST(CropCommonExtent, DisjointFootprintsError) {
    const Raster r = testutil::natural_image(50, 50, 6, 1.0);
    try {
        crop_common_extent({geo(r, 0.0, 0.0, "a"), geo(r, 1000.0, 0.0, "b")});
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("no overlap"), std::string::npos);
    }
}

TEST(ApplyTransform, IdentityIsBitExact) {
    const Raster r = testutil::natural_image(80, 60, 7, 1.0);
    const GeoImage g = geo(r, 0, 0, "a");
    const GeoImage out = apply_transform(g, SimilarityTransform{});
    EXPECT_TRUE(out.raster == r);
}

TEST(ApplyTransform, IntegerShiftIsExact) {
    const Raster r = testutil::natural_image(120, 90, 8, 1.0);
    const GeoImage g = geo(r, 0, 0, "a");
    const GeoImage out = apply_transform(g, SimilarityTransform{7.0, -3.0, 0.0, 1.0});
    // out(p) = in(p + (7,-3)) wherever the source pixel exists
    for (int y = 3; y < 90; ++y) {
        for (int x = 0; x < 120 - 7; ++x) {
            ASSERT_EQ(out.raster.at(y, x, 0), r.at(y - 3, x + 7, 0)) << y << "," << x;
            ASSERT_TRUE(out.pixel_valid(y, x));
        }
    }
    // shifted-out region is black and masked invalid
    EXPECT_FALSE(out.pixel_valid(0, 0));
    EXPECT_EQ(out.raster.at(0, 119, 0), 0.0);
}

TEST(ApplyTransform, RoundTripCloseAwayFromBorders) {
    const Raster r = testutil::natural_image(256, 256, 9, 1.0);
    const GeoImage g = geo(r, 0, 0, "a");
    const SimilarityTransform t{4.5, -2.25, 3.0, 1.02};
    const GeoImage fwd = apply_transform(g, t);
    const GeoImage back = apply_transform(fwd, t.inverse());
    double worst = 0.0;
    for (int y = 24; y < 232; ++y) {
        for (int x = 24; x < 232; ++x) {
            for (int c = 0; c < 3; ++c) {
                worst = std::max(worst, std::fabs(back.raster.at(y, x, c) - r.at(y, x, c)));
            }
        }
    }
    EXPECT_LT(worst, 2.0);
}

TEST(EstimateSimilarity, SelfRegistrationIsIdentity) {
    const Raster r = testutil::natural_image(256, 256, 10, 1.0);
    const GeoImage g = geo(r, 0, 0, "a");
    const SimilarityTransform t = estimate_similarity(g, g, 256);
    EXPECT_NEAR(t.dx, 0.0, 0.1);
    EXPECT_NEAR(t.dy, 0.0, 0.1);
    EXPECT_NEAR(t.theta_deg, 0.0, 0.05);
    EXPECT_NEAR(t.scale, 1.0, 0.001);
}

TEST(EstimateSimilarity, RecoversPureTranslation) {
    const Raster r = testutil::natural_image(512, 512, 11, 1.0);
    const GeoImage fixed = geo(r, 0, 0, "f");
    const GeoImage moving = synth_moving(fixed, {7.0, -3.0, 0.0, 1.0});
    const SimilarityTransform t = estimate_similarity(fixed, moving, 512);
    EXPECT_NEAR(t.dx, 7.0, 0.25);
    EXPECT_NEAR(t.dy, -3.0, 0.25);
}

TEST(EstimateSimilarity, RecoversRotation) {
    const Raster r = testutil::natural_image(512, 512, 12, 1.0);
    const GeoImage fixed = geo(r, 0, 0, "f");
    const GeoImage moving = synth_moving(fixed, {0.0, 0.0, 5.0, 1.0});
    const SimilarityTransform t = estimate_similarity(fixed, moving, 512);
    EXPECT_NEAR(t.theta_deg, 5.0, 0.1);
    EXPECT_NEAR(t.scale, 1.0, 0.002);
}

TEST(EstimateSimilarity, RecoversScale) {
    const Raster r = testutil::natural_image(512, 512, 13, 1.0);
    const GeoImage fixed = geo(r, 0, 0, "f");
    const GeoImage moving = synth_moving(fixed, {0.0, 0.0, 0.0, 1.03});
    const SimilarityTransform t = estimate_similarity(fixed, moving, 512);
    EXPECT_NEAR(t.scale, 1.03, 0.002);
    EXPECT_NEAR(t.theta_deg, 0.0, 0.1);
}

TEST(EstimateSimilarity, CombinedTransform) {
    const Raster r = testutil::natural_image(512, 512, 14, 1.0);
    const GeoImage fixed = geo(r, 0, 0, "f");
    const SimilarityTransform truth{-12.0, 9.0, -4.0, 0.97};
    const GeoImage moving = synth_moving(fixed, truth);
    const SimilarityTransform t = estimate_similarity(fixed, moving, 512);
    EXPECT_NEAR(t.dx, truth.dx, 0.25);
    EXPECT_NEAR(t.dy, truth.dy, 0.25);
    EXPECT_NEAR(t.theta_deg, truth.theta_deg, 0.1);
    EXPECT_NEAR(t.scale, truth.scale, 0.002);
}

TEST(EstimateSimilarity, FeaturelessWindowError) {
    const Raster flat = testutil::constant_image(128, 128, 50.0);
    const GeoImage g = geo(flat, 0, 0, "a");
    try {
        estimate_similarity(g, g, 128);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("featureless"), std::string::npos);
    }
}

TEST(EstimateSimilarity, WindowShrinksToImage) {
    const Raster r = testutil::natural_image(200, 150, 15, 1.0);
    const GeoImage g = geo(r, 0, 0, "a");
    const SimilarityTransform t = estimate_similarity(g, g, 2000);  // default-style oversize
    EXPECT_NEAR(t.dx, 0.0, 0.1);
    EXPECT_NEAR(t.dy, 0.0, 0.1);
}
