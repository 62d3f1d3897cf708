#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ksa/cli.hpp"

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result lab(std::vector<std::string> args) {
    args.insert(args.begin(), "ksa-lab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = ksa::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("ksa_cli_" + name);
    std::ofstream(path) << text;
    return path.string();
}

const std::string scenarios = KSA_SCENARIO_DIR;

}  // namespace

TEST(Cli, RunPartitionScenarioPasses) {
    const auto r = lab({"run", scenarios + "/partition_4_2.json"});
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("distinct: {0,1}"), std::string::npos);
    EXPECT_NE(r.out.find("note: n <= 2t"), std::string::npos);
    EXPECT_NE(r.out.find("result: pass"), std::string::npos);
}

TEST(Cli, RunAllSameTwoRound) {
    const auto r = lab({"run", scenarios + "/two_round_all_same.json", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(j["record"]["rounds_executed"].get<int>(), 2);
    EXPECT_EQ(j["distinct"].size(), 1u);
}

TEST(Cli, ViolatedExpectationExitsOne) {
    const auto path = temp_file("expect.json",
                                R"({"n":4,"t":2,"protocol":"trb_optimal","values":[0,0,1,1],"expect":{"distinct":1}})");
    const auto r = lab({"run", path});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("FAIL expect.distinct"), std::string::npos);
    EXPECT_NE(r.out.find("message log:"), std::string::npos);
}

TEST(Cli, MalformedScenarioExitsTwo) {
    const auto path = temp_file("bad.json", "{\n  \"n\": ,\n}");
    const auto r = lab({"run", path});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 2, column 8: malformed scenario"), std::string::npos);
    EXPECT_EQ(lab({"run", "/nonexistent/file.json"}).code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(lab({}).code, 2);
    EXPECT_EQ(lab({"fuzz", "paxos", "3", "1"}).code, 2);
    EXPECT_EQ(lab({"fuzz", "two_round", "3", "3"}).code, 2);
    EXPECT_EQ(lab({"fuzz", "async_snapshot", "4", "2"}).code, 2);
    EXPECT_EQ(lab({"run", "x.json", "--format", "yaml"}).code, 2);
    EXPECT_EQ(lab({"--help"}).code, 0);
}

TEST(Cli, FuzzReplayIsByteIdentical) {
    const std::vector<std::string> args{"fuzz", "trb_optimal", "5", "2", "--runs", "300", "--seed", "42", "--format",
                                        "json"};
    auto with_workers = [&](const char* w) {
        auto a = args;
        a.push_back("--workers");
        a.push_back(w);
        return lab(a);
    };
    const auto a = with_workers("1"), b = with_workers("3");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    const auto j = nlohmann::json::parse(a.out);
    EXPECT_EQ(j["runs"].get<int>(), 300);
    EXPECT_EQ(j["max_distinct"].get<int>(), 1);
}

TEST(Cli, FuzzTextFlagsSmallN) {
    const auto r = lab({"fuzz", "two_round", "4", "2", "--runs", "200", "--seed", "1"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("note: n <= 2t"), std::string::npos);
    EXPECT_NE(r.out.find("violations: 0"), std::string::npos);
}

TEST(Cli, OutWritesFile) {
    const auto path = (std::filesystem::temp_directory_path() / "ksa_cli_report.json").string();
    std::filesystem::remove(path);
    const auto r = lab({"fuzz", "async_snapshot", "5", "2", "--runs", "50", "--out", path, "--format", "json"});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(nlohmann::json::parse(buf.str())["runs"].get<int>(), 50);
}

TEST(Cli, OracleRefusalExitsTwo) {
    const auto r = lab({"oracle", "trb_optimal", "4", "2", "--bound", "1000"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("refused"), std::string::npos);
    const auto ok = lab({"oracle", "trb", "3", "1"});
    EXPECT_EQ(ok.code, 0) << ok.out;
}

TEST(Cli, TraceLoggingGoesToStderr) {
    ::setenv("KSA_LOG_LEVEL", "trace", 1);
    const auto r = lab({"run", scenarios + "/partition_4_2.json"});
    ::unsetenv("KSA_LOG_LEVEL");
    EXPECT_NE(r.err.find("[trace]"), std::string::npos);
    EXPECT_EQ(r.out.find("[trace]"), std::string::npos);
}

TEST(Cli, InstalledBinaryRuns) {
    const std::string cmd = std::string(KSA_LAB_PATH) + " run " + scenarios + "/partition_4_2.json > /dev/null";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
}
