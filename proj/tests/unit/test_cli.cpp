#include "evograph/cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace evograph;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / ("evograph-cli-" + std::to_string(::getpid()) + "-" + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string write(const std::string& name, const std::string& text) const {
        const auto path = dir / name;
        std::ofstream(path) << text;
        return path.string();
    }

    struct Result {
        int code;
        std::string out;
        std::string err;
    };

    static Result cli(std::vector<std::string> args, const std::string& input = "") {
        args.insert(args.begin(), "evograph");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        std::istringstream in(input);
        const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err, in);
        return {code, out.str(), err.str()};
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int count_lines(const std::string& text) { return static_cast<int>(std::count(text.begin(), text.end(), '\n')); }

const char* kSmallConfig = R"(; small run
[engine]
n = 6
T = 4
seed = 5

[estate]
preset = minimal
)";

}  // namespace

TEST_F(CliTest, RunWritesAllOutputsAndEchoesConfig) {
    const auto cfg = write("small.cfg", kSmallConfig);
    const auto out = (dir / "out").string();
    const auto r = cli({"run", "--config", cfg, "--out", out});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    for (const auto* name : {"metrics.csv", "events.jsonl", "archive.json", "effective-config.ini"})
        EXPECT_TRUE(fs::exists(fs::path(out) / name)) << name;
    EXPECT_EQ(count_lines(slurp(fs::path(out) / "metrics.csv")), 1 + 4);
    EXPECT_EQ(count_lines(slurp(fs::path(out) / "events.jsonl")), 4);
    const auto echoed = slurp(fs::path(out) / "effective-config.ini");
    EXPECT_NE(echoed.find("n = 6"), std::string::npos);
    EXPECT_NE(echoed.find("preset = minimal"), std::string::npos);
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
    const auto cfg = write("small.cfg", kSmallConfig);
    const auto a = (dir / "a").string();
    const auto b = (dir / "b").string();
    ASSERT_EQ(cli({"run", "--config", cfg, "--seed", "42", "--out", a}).code, kExitOk);
    ASSERT_EQ(cli({"run", "--config", cfg, "--seed", "42", "--out", b}).code, kExitOk);
    for (const auto* name : {"metrics.csv", "events.jsonl", "archive.json"})
        EXPECT_EQ(slurp(fs::path(a) / name), slurp(fs::path(b) / name)) << name;
}

TEST_F(CliTest, OverrideShortensTheRun) {
    const auto cfg = write("small.cfg", kSmallConfig);
    const auto out = (dir / "out").string();
    const auto r = cli({"run", "--config", cfg, "--override", "engine.T=3", "--out", out});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(count_lines(slurp(fs::path(out) / "events.jsonl")), 3);
}

TEST_F(CliTest, OutOfRangeMutationRateIsAConfigError) {
    const auto cfg = write("bad.cfg", "[engine]\nn = 6\nT = 4\nmutation_rate = 1.5\n\n[estate]\npreset = minimal\n");
    auto r = cli({"run", "--config", cfg, "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("engine.mutation_rate"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find(cfg), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(dir / "out"));

    const auto good = write("good.cfg", kSmallConfig);
    r = cli({"run", "--config", good, "--override", "engine.mutation_rate=1.5", "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, kExitConfig);
}

TEST_F(CliTest, ValidatePrintsReloadableEffectiveConfig) {
    const auto cfg = write("small.cfg", kSmallConfig);
    const auto r = cli({"validate", cfg});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("[engine]"), std::string::npos);
    EXPECT_NE(r.out.find("mutation_rate = 0.3"), std::string::npos) << r.out;
    const auto again = write("effective.cfg", r.out);
    const auto second = cli({"validate", again});
    ASSERT_EQ(second.code, kExitOk) << second.err;
    EXPECT_EQ(second.out, r.out);
}

TEST_F(CliTest, ValidateRejectsUnknownKeyWithItsPath) {
    const auto cfg = write("typo.cfg", std::string(kSmallConfig) + "\n[selection]\nalpah_sel = 3\n");
    const auto r = cli({"validate", cfg});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("selection.alpah_sel"), std::string::npos) << r.err;
}

TEST_F(CliTest, ValidateRejectsMissingEstate) {
    const auto cfg = write("noestate.cfg", "[engine]\nn = 4\nT = 2\n");
    const auto r = cli({"validate", cfg});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("estate"), std::string::npos) << r.err;

    const auto unknown = write("preset.cfg", "[estate]\npreset = nowhere\n");
    EXPECT_EQ(cli({"validate", unknown}).code, kExitConfig);
}

TEST_F(CliTest, MissingConfigFileIsAConfigError) {
    EXPECT_EQ(cli({"validate", (dir / "absent.cfg").string()}).code, kExitConfig);
}

TEST_F(CliTest, JsonConfigIsAccepted) {
    const auto ini = write("small.cfg", kSmallConfig);
    const auto json = write("small.json", R"({"engine": {"n": 6, "T": 4, "seed": 5}, "estate": {"preset": "minimal"}})");
    const auto a = cli({"validate", ini});
    const auto b = cli({"validate", json});
    ASSERT_EQ(b.code, kExitOk) << b.err;
    EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, BadEventsAreConfigErrors) {
    auto cfg = write("ev1.cfg", std::string(kSmallConfig) + "\n[events]\nshift = 9 weight_shift w=1,0,0,0,0,0\n");
    EXPECT_EQ(cli({"validate", cfg}).code, kExitConfig);
    cfg = write("ev2.cfg", std::string(kSmallConfig) + "\n[events]\nshift = 2 solar_flare x=1\n");
    EXPECT_EQ(cli({"validate", cfg}).code, kExitConfig);
}

TEST_F(CliTest, UnknownScenarioAndUsageErrors) {
    EXPECT_EQ(cli({"scenario", "does-not-exist"}).code, kExitConfig);
    EXPECT_EQ(cli({}).code, kExitConfig);
    EXPECT_EQ(cli({"run"}).code, kExitConfig);
    EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
}

TEST_F(CliTest, ApprovalPromptControlsRollouts) {
    const auto cfg = write("approve.cfg", std::string(kSmallConfig) + "\n[safety]\nrequire_approval = true\n");
    const auto declined = cli({"run", "--config", cfg, "--approve", "--out", (dir / "no").string()}, "");
    ASSERT_EQ(declined.code, kExitOk) << declined.err;
    const auto no_csv = slurp(dir / "no" / "events.jsonl");
    EXPECT_EQ(no_csv.find("\"rolled_out\":true"), std::string::npos);

    std::string yes;
    for (int i = 0; i < 10; ++i) yes += "y\n";
    const auto accepted = cli({"run", "--config", cfg, "--approve", "--out", (dir / "yes").string()}, yes);
    ASSERT_EQ(accepted.code, kExitOk) << accepted.err;
    EXPECT_NE(accepted.out.find("approve rollout"), std::string::npos);
    EXPECT_NE(slurp(dir / "yes" / "events.jsonl").find("\"rolled_out\":true"), std::string::npos);
}
