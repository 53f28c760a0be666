#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bhe_cli/cli.hpp"

namespace fs = std::filesystem;
using bhe::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "bhe");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "bhe_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, PointReferenceValues) {
  const auto r = call({"point"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("2.03968"), std::string::npos);
  EXPECT_NE(r.out.find("1.19968"), std::string::npos);
  EXPECT_NE(r.out.find("1.84164571429"), std::string::npos);
  EXPECT_NE(r.out.find("[config]"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(call({"--help"}).code, 0);
  EXPECT_EQ(call({"point", "--g", "-1"}).code, 2);
  EXPECT_EQ(call({"point", "--bogus"}).code, 2);
  EXPECT_EQ(call({"point", "--routes", "quantum:fcs"}).code, 2);
  EXPECT_EQ(call({"point", "--th", "1", "--nh", "2"}).code, 2);
  EXPECT_EQ(call({"point", "--th", "1"}).code, 2);
  EXPECT_EQ(call({"sweep", "--axis", "kappa"}).code, 2);
  EXPECT_EQ(call({"simulate", "wave", "--trajectories", "4"}).code, 2);
  EXPECT_EQ(call({"point", "--output", "/nonexistent/dir/x.txt"}).code, 3);
  EXPECT_EQ(call({"point", "--config", "/nonexistent/config.txt"}).code, 3);
  EXPECT_EQ(call({"verify", "--quick"}).code, 0);
}

TEST(Cli, SimulateReportsZScores) {
  const auto r = call({"simulate", "particle", "--trajectories", "8", "--t-total", "200", "--seed", "4",
                       "--workers", "2"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("mean_power"), std::string::npos);
  EXPECT_NE(r.out.find("(limit 4)"), std::string::npos);
}

TEST(Cli, SimulateIsDeterministic) {
  const std::vector<std::string> args{"simulate", "wave", "--trajectories", "8", "--t-total", "60",
                                      "--seed", "11", "--workers", "3"};
  const auto a = call(args);
  auto other = args;
  other.back() = "1";
  const auto b = call(other);
  EXPECT_EQ(a.code, b.code);
  const auto strip = [](const std::string& s) { return s.substr(s.find("mean_power")); };
  EXPECT_EQ(strip(a.out), strip(b.out));
}

TEST(Cli, ConfigRoundTrip) {
  const auto file = scratch("point.txt");
  ASSERT_EQ(call({"point", "--g", "0.3", "--kappa-h", "2", "--nh", "4.5", "--output", file.string()}).code, 0);
  std::ifstream in(file);
  const std::string first((std::istreambuf_iterator<char>(in)), {});
  const auto again = call({"point", "--config", file.string()});
  EXPECT_EQ(again.code, 0);
  EXPECT_EQ(again.out, first);
  // Explicit flags override the file.
  const auto over = call({"point", "--config", file.string(), "--nh", "1"});
  EXPECT_NE(over.out.find("nh = 1\n"), std::string::npos);
  EXPECT_NE(over.out.find("kappa-h = 2\n"), std::string::npos);
}

TEST(Cli, JsonConfigRoundTrip) {
  const auto file = scratch("point.json");
  ASSERT_EQ(call({"point", "--format", "json", "--nc", "0.7", "--output", file.string()}).code, 0);
  std::ifstream in(file);
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["config"]["nc"], "0.7");
  ASSERT_TRUE(j.contains("results"));
  const auto again = call({"point", "--config", file.string(), "--format", "json"});
  EXPECT_EQ(nlohmann::json::parse(again.out), j);
}

TEST(Cli, ParseConfig) {
  std::istringstream in("# comment\n--g = 2\nnh=3 \n\n[config]\nnc = 0.5\n\nignored = 1\n");
  const auto m = bhe::cli::parse_config(in);
  EXPECT_EQ(m.at("g"), "2");
  EXPECT_EQ(m.at("nh"), "3");
  EXPECT_EQ(m.at("nc"), "0.5");
  EXPECT_FALSE(m.contains("ignored"));
  std::istringstream bad("g 2\n");
  EXPECT_THROW(bhe::cli::parse_config(bad), std::runtime_error);
}

TEST(Cli, SweepCsv) {
  const auto r = call({"sweep", "--from", "0.1", "--to", "10", "--points", "3"});
  EXPECT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string header, line;
  std::getline(lines, header);
  EXPECT_EQ(header,
            "g_over_kappa,power_q,noise_q,fano_q,power_w,noise_w,fano_w,power_p,noise_p,fano_p,tur_bound,"
            "tur_bound_wave");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_NE(r.err.find("[config]"), std::string::npos);
}

TEST(Cli, HeaderOnlySweep) {
  const auto r = call({"sweep", "--points", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
}

TEST(Cli, EquilibriumSweepUsesNan) {
  const auto r = call({"sweep", "--axis", "nbar_h", "--from", "0.1", "--to", "0.2", "--points", "2", "--nc",
                       "0.1"});
  EXPECT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  EXPECT_NE(line.find("nan"), std::string::npos);
  EXPECT_EQ(line.find("inf"), std::string::npos);
}

TEST(Cli, SweepJson) {
  const auto r = call({"sweep", "--format", "json", "--points", "4", "--from", "1", "--to", "8"});
  EXPECT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["rows"].size(), 4u);
  EXPECT_EQ(j["config"]["points"], "4");
}

TEST(Cli, OutputDirectoryFromEnvironment) {
  const auto dir = scratch("envdir");
  fs::create_directories(dir);
  ::setenv("BHE_OUTPUT_DIR", dir.string().c_str(), 1);
  const auto r = call({"point", "--output", "from_env.txt"});
  ::unsetenv("BHE_OUTPUT_DIR");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir / "from_env.txt"));
}

TEST(Cli, FormatNumber) {
  EXPECT_EQ(bhe::cli::format_number(2.03968), "2.03968");
  EXPECT_EQ(bhe::cli::format_number(NAN), "nan");
  EXPECT_EQ(bhe::cli::format_number(-INFINITY), "-inf");
}
