// End-to-end checks of the command-line tool: exit codes, printed output,
// and file products. Each test shells out to the real binary.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "uavsat/image_io.hpp"
#include "uavsat/labels.hpp"
#include "uavsat/optics.hpp"
#include "uavsat/random.hpp"

using namespace uavsat;

#ifndef UAVSAT_CLI_PATH
#error "UAVSAT_CLI_PATH must be defined by the build"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    const std::filesystem::path out_file = scratch / "cli_out.txt";
    const std::string cmd =
        std::string(UAVSAT_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.output = ss.str();
    return r;
}

}  // namespace

TEST(Cli, LvOfConstantImageIsZero) {
    testutil::TempDir tmp("cli_lv");
    const auto img = tmp.path() / "flat.ppm";
    save_raster(testutil::constant_image(16, 16, 80.0), img);
    const RunResult r = run_cli("lv " + img.string(), tmp.path());
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.output.find("lv=0.0000"), std::string::npos) << r.output;
}

TEST(Cli, LvMissingFileExits2) {
    testutil::TempDir tmp("cli_lv2");
    const RunResult r = run_cli("lv /nonexistent/nowhere.ppm", tmp.path());
    EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, UsageErrorsExit1) {
    testutil::TempDir tmp("cli_usage");
    EXPECT_EQ(run_cli("", tmp.path()).exit_code, 1);
    EXPECT_EQ(run_cli("frobnicate", tmp.path()).exit_code, 1);
    EXPECT_EQ(run_cli("calibrate", tmp.path()).exit_code, 1);  // missing required options
}

TEST(Cli, DegradeWritesTargetGsdImage) {
    testutil::TempDir tmp("cli_degrade");
    const auto in = tmp.path() / "in.ppm";
    const auto out = tmp.path() / "out.ppm";
    save_raster(testutil::natural_image(200, 200, 4, 0.05), in);
    const RunResult r = run_cli(
        "degrade --input " + in.string() + " --output " + out.string() + " --q 2.0 --target-gsd 0.5",
        tmp.path());
    EXPECT_EQ(r.exit_code, 0) << r.output;
    const Raster result = load_raster(out);
    EXPECT_EQ(result.width(), 20);
    EXPECT_EQ(result.height(), 20);
    EXPECT_DOUBLE_EQ(result.gsd(), 0.5);
}

TEST(Cli, CalibrateRecoversKnownQ) {
    testutil::TempDir tmp("cli_cal");
    const auto survey = tmp.path() / "survey.ppm";
    const auto ref = tmp.path() / "ref.ppm";
    const auto report = tmp.path() / "report.json";
    const Raster img = testutil::natural_image(220, 220, 6, 0.05);
    save_raster(img, survey);
    save_raster(degrade(img, {2.0, 10.0, 0.5}), ref);
    const RunResult r = run_cli("calibrate --survey " + survey.string() + " --reference " +
                                    ref.string() + " --phi 10 --q-min 1 --q-max 3 --q-step 0.5" +
                                    " --out " + report.string(),
                                tmp.path());
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("q_star="), std::string::npos);
    const double q_star = std::stod(r.output.substr(r.output.find("q_star=") + 7));
    EXPECT_NEAR(q_star, 2.0, 0.05);
    ASSERT_TRUE(std::filesystem::exists(report));
    std::ifstream rep(report);
    nlohmann::json j;
    rep >> j;
    EXPECT_TRUE(j.contains("sweep"));
}

TEST(Cli, CalibrateUnbracketedExits3) {
    testutil::TempDir tmp("cli_cal3");
    const auto survey = tmp.path() / "survey.ppm";
    const auto ref = tmp.path() / "ref.ppm";
    save_raster(testutil::natural_image(150, 150, 7, 0.05), survey);
    // white-noise reference: unreachable LV target
    Raster noise(15, 15, 0.5);
    RandomStream rng(5);
    for (double& v : noise.data()) v = rng.uniform(0.0, 255.0);
    save_raster(noise, ref);
    const RunResult r = run_cli(
        "calibrate --survey " + survey.string() + " --reference " + ref.string() + " --phi 10",
        tmp.path());
    EXPECT_EQ(r.exit_code, 3);
}

TEST(Cli, AugmentIdentityReproducesPair) {
    testutil::TempDir tmp("cli_aug");
    const auto a = tmp.path() / "a.ppm";
    const auto b = tmp.path() / "b.ppm";
    const auto la = tmp.path() / "a.txt";
    const auto cfg = tmp.path() / "aug.json";
    Raster ra = testutil::natural_image(40, 40, 8, 0.5);
    for (double& v : ra.data()) v = std::round(v);
    Raster rb = testutil::natural_image(40, 40, 9, 0.5);
    for (double& v : rb.data()) v = std::round(v);
    save_raster(ra, a);
    save_raster(rb, b);
    {
        std::ofstream l(la);
        l << "0 0.500000 0.500000 0.250000 0.250000\n";
        std::ofstream c(cfg);
        c << "{}\n";
    }
    const RunResult r = run_cli("augment --image-a " + a.string() + " --image-b " + b.string() +
                                    " --labels-a " + la.string() + " --aug-config " + cfg.string() +
                                    " --out " + (tmp.path() / "aug").string(),
                                tmp.path());
    EXPECT_EQ(r.exit_code, 0) << r.output;
    const Raster outa = load_raster(tmp.path() / "aug" / "a_aug.ppm");
    EXPECT_TRUE(outa == ra);
    std::ifstream lin(tmp.path() / "aug" / "a_aug.txt");
    std::stringstream ss;
    ss << lin.rdbuf();
    EXPECT_EQ(ss.str(), "0 0.500000 0.500000 0.250000 0.250000\n");
}

TEST(Cli, BuildFromConfigFile) {
    testutil::TempDir tmp("cli_build");
    // two identical-footprint surveys of the same scene on different days
    const Raster plate = testutil::natural_image(240, 240, 21, 0.05);
    save_raster(plate, tmp.path() / "S1.ppm", std::make_pair(0.0, 0.0));
    Raster second = plate;
    RandomStream day_noise(77);
    for (double& v : second.data()) v = clamp_byte(v + day_noise.gaussian(6.0));
    save_raster(second, tmp.path() / "S2.ppm", std::make_pair(0.0, 0.0));
    nlohmann::json cfg = {{"source_gsd", 0.05},
                          {"target_gsd", 0.25},
                          {"q", 1.5},
                          {"tile", 120},
                          {"window", 128},
                          {"surveys",
                           {{{"id", "S1"}, {"image", "S1.ppm"}},
                            {{"id", "S2"}, {"image", "S2.ppm"}}}},
                          {"output", "dataset"}};
    {
        std::ofstream out(tmp.path() / "build.json");
        out << cfg.dump(2);
    }
    const RunResult r =
        run_cli("build --config " + (tmp.path() / "build.json").string(), tmp.path());
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("pairs=4"), std::string::npos) << r.output;
    EXPECT_TRUE(std::filesystem::exists(tmp.path() / "dataset" / "report.json"));
}

TEST(Cli, AlignWritesAlignedSetAndTransforms) {
    testutil::TempDir tmp("cli_align");
    const Raster plate = testutil::natural_image(300, 300, 30, 1.0);
    auto crop = [&](int ox, int oy) {
        Raster r(256, 256, 1.0);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 256; ++y)
                for (int x = 0; x < 256; ++x) r.at(y, x, c) = plate.at(oy + y, ox + x, c);
        return r;
    };
    save_raster(crop(0, 0), tmp.path() / "F1.ppm", std::make_pair(100.0, 500.0));
    save_raster(crop(12, 0), tmp.path() / "F2.ppm", std::make_pair(112.0, 500.0));
    const RunResult r = run_cli("align --survey " + (tmp.path() / "F1.ppm").string() +
                                    " --survey " + (tmp.path() / "F2.ppm").string() +
                                    " --window 128 --out " + (tmp.path() / "aligned").string(),
                                tmp.path());
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_TRUE(std::filesystem::exists(tmp.path() / "aligned" / "F1.ppm"));
    EXPECT_TRUE(std::filesystem::exists(tmp.path() / "aligned" / "transforms.json"));
    const Raster a = load_raster(tmp.path() / "aligned" / "F1.ppm");
    const Raster b = load_raster(tmp.path() / "aligned" / "F2.ppm");
    EXPECT_TRUE(a.same_shape(b));
}
