#include <gtest/gtest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "impent/impent.hpp"

using namespace impent;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("impent_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

CliResult cli(const std::string& args, const fs::path& dir) {
    const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + IMPENT_CLI + "\" " + args + " >\"" + o.string() + "\" 2>\"" + e.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
}

std::string data(const std::string& f) { return std::string(IMPENT_TEST_DATA) + "/" + f; }
std::string config(const std::string& f) { return std::string(IMPENT_CONFIG_DIR) + "/" + f; }

} // namespace

TEST(ConfigParse, IncreasingEpsilonIsRejected) {
    try {
        load_config(data("increasing_epsilon.json"));
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_EQ(e.field(), "ladders.epsilon");
        EXPECT_EQ(e.line(), 6u);
    }
}

TEST(ConfigParse, MalformedJsonReportsLine) {
    try {
        load_config(data("malformed.json"));
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_EQ(e.line(), 5u);
        EXPECT_NE(std::string(e.what()).find("malformed JSON"), std::string::npos);
    }
}

TEST(ConfigParse, UnknownKeyIsRejected) {
    try {
        load_config(data("unknown_key.json"));
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_NE(std::string(e.what()).find("detla"), std::string::npos);
    }
}

TEST(ConfigParse, ResolutionMustResolveSmallestEpsilon) {
    EXPECT_THROW(load_config(data("coarse_resolution.json")), config_error);
}

TEST(ConfigParse, ShippedConfigsAllParse) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(IMPENT_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
        ++n;
    }
    EXPECT_GE(n, 10u);
}

TEST(ConfigParse, DefaultsAndOverrides) {
    const auto c = parse_config(R"({"schema_version": 1, "name": "x", "suite": "estimate",
        "system": {"catalog": "identity"}, "sample": {"resolution": 0.02}})");
    EXPECT_EQ(c.estimate.T, (std::vector<double>{4, 8, 16, 32, 48}));
    EXPECT_EQ(c.estimate.m, 64u);
    EXPECT_EQ(c.tolerances.tol_A, 0.05);
    EXPECT_THROW(parse_config(R"({"schema_version": 2, "name": "x", "suite": "estimate", "system": {"catalog": "identity"}})"),
                 config_error);
}

TEST(Cli, ExitCodeTwoOnBadConfig) {
    const auto d = scratch("bad");
    for (const char* f : {"increasing_epsilon.json", "malformed.json", "unknown_key.json"}) {
        const auto r = cli("run \"" + data(f) + "\" --out \"" + d.string() + "\"", d);
        EXPECT_EQ(r.code, 2) << f;
        EXPECT_NE(r.err.find("config error"), std::string::npos) << r.err;
    }
    const auto r = cli("run \"" + data("malformed.json") + "\" --out \"" + d.string() + "\"", d);
    EXPECT_NE(r.err.find("line 5"), std::string::npos) << r.err;
}

TEST(Cli, EstimateRunWritesReproducibleReports) {
    const auto a = scratch("a"), b = scratch("b");
    const auto ra = cli("run \"" + data("small_estimate.json") + "\" --threads 1 --out \"" + a.string() + "\"", a);
    const auto rb = cli("run \"" + data("small_estimate.json") + "\" --threads 3 --out \"" + b.string() + "\"", b);
    EXPECT_EQ(ra.code, 0) << ra.out << ra.err;
    EXPECT_EQ(rb.code, 0);
    for (const char* f : {"small_estimate.counts.csv", "small_estimate.summary.json"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_TRUE(fs::exists(a / "small_estimate.timings.json"));
    for (const auto& e : fs::directory_iterator(a)) EXPECT_NE(e.path().extension(), ".tmp") << e.path();

    const std::string csv = slurp(a / "small_estimate.counts.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n') + 1), kCsvHeader);
    // 2 δ × 3 variants × 2 modes × 3 T × 2 ε rows plus the header.
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 72 + 1);

    const auto j = nlohmann::json::parse(slurp(a / "small_estimate.summary.json"));
    EXPECT_EQ(j["suite"], "estimate");
    EXPECT_TRUE(j.contains("config_hash"));
    EXPECT_TRUE(j["table"]["estimates"].contains("h_bar_r"));
}

TEST(Cli, SeedOverrideRuns) {
    const auto d = scratch("seed");
    const auto r = cli("run \"" + data("small_estimate.json") + "\" --seed 9 --out \"" + d.string() + "\"", d);
    EXPECT_EQ(r.code, 0);
}

TEST(Cli, VerifyBPasses) {
    const auto d = scratch("vb");
    const auto r = cli("run \"" + config("identity_verify_B.json") + "\" --out \"" + d.string() + "\"", d);
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("PASS spanning_le_separated"), std::string::npos) << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST(Cli, SkippedSuiteExitsOne) {
    const auto d = scratch("skip");
    const auto r = cli("run \"" + config("impulsive_rotation_bad_reset_verify_C.json") + "\" --out \"" + d.string() + "\"", d);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("SKIPPED"), std::string::npos) << r.out;
}

TEST(Cli, ValidateAndCatalog) {
    const auto d = scratch("val");
    auto r = cli("validate \"" + config("rotation_verify_A.json") + "\"", d);
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("ok"), std::string::npos);
    r = cli("validate \"" + data("increasing_epsilon.json") + "\"", d);
    EXPECT_EQ(r.code, 2);
    r = cli("catalog", d);
    EXPECT_EQ(r.code, 0);
    for (const char* s : {"rotation", "identity", "suspension_shift2", "impulsive_rotation", "impulsive_suspension"})
        EXPECT_NE(r.out.find(s), std::string::npos) << s;
}

TEST(Report, ConfigHashIsGitBlobSha1) {
    // `printf 'hello\n' | git hash-object --stdin`
    EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
    EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Report, AtomicWriteReplacesContent) {
    const auto d = scratch("atomic");
    write_atomic(d / "f.txt", "one");
    write_atomic(d / "f.txt", "two");
    EXPECT_EQ(slurp(d / "f.txt"), "two");
    EXPECT_FALSE(fs::exists(d / "f.txt.tmp"));
}
