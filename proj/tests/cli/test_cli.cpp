#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "posrate/io.hpp"

using posrate::Json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "posrate_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI from the test data directory; env is a prefix like "POSRATE_OUT=/x".
Result run(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const auto err_file = fs::temp_directory_path() / ("posrate_cli_stderr_" + std::to_string(::getpid()) + "_" +
                                                     std::to_string(counter++));
  const std::string cmd = "cd '" POSRATE_TEST_DATA "' && env -u POSRATE_OUT " + env + " '" POSRATE_CLI "' " + args +
                          " 2>'" + err_file.string() + "'";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_file);
  fs::remove(err_file);
  return r;
}

void expect_error(const Result& r, const std::string& kind) {
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  const auto j = Json::parse(r.err);
  EXPECT_EQ(j.at("error"), kind);
  EXPECT_TRUE(j.at("message").is_string());
}

}  // namespace

TEST(Cli, VerifyCoreSuitePasses) {
  const auto r = run("verify --suite core");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("pass"), true);
  ASSERT_FALSE(j.at("checks").empty());
  for (const auto& c : j.at("checks")) EXPECT_EQ(c.at("passed"), true) << c.dump();
}

TEST(Cli, ThinReportsThirdRate) {
  const auto r = run("thin --tree kary:2 --alpha 1/2 --p 1/2 --depth 4");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("rate"), "1/3");
  EXPECT_EQ(j.at("expected_rate"), "1/3");
  EXPECT_EQ(j.at("pass"), true);
}

TEST(Cli, RateCheckOnAntichain) {
  const auto ok = run("rate --dist antichain:n=3 --alpha 1");
  ASSERT_EQ(ok.code, 0) << ok.err;
  const auto j = Json::parse(ok.out);
  EXPECT_EQ(j.at("constant_rate"), "1/1");
  EXPECT_EQ(j.at("expected_rate"), "1/1");

  const auto bad = run("rate --dist antichain:n=3 --alpha 1/2");
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(Json::parse(bad.out).at("pass"), false);
}

TEST(Cli, DistributionFiles) {
  const auto inline_poset = run("rate --dist antichain_dist.json");
  ASSERT_EQ(inline_poset.code, 0) << inline_poset.err;
  EXPECT_EQ(Json::parse(inline_poset.out).at("constant_rate"), "1/1");

  const auto by_ref = run("upf --dist boolean2_dist.json");
  ASSERT_EQ(by_ref.code, 0) << by_ref.err;
  const auto upf = Json::parse(by_ref.out);
  const auto& F = upf.at("upf").at("values");
  EXPECT_EQ(F.at("0"), "1/1");
  EXPECT_EQ(F.at("3"), "1/4");
}

TEST(Cli, TreeSpecFile) {
  const auto r = run("construct-tree --tree tree_alt12.json --alpha 1/2 --depth 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("nodes"), 6);
  EXPECT_EQ(j.at("constant_rate"), "1/2");
  const auto& F = j.at("upf").at("values");
  EXPECT_EQ(F.at("0"), "1/2");
  EXPECT_EQ(F.at("0.1"), "1/8");
  EXPECT_EQ(F.at("0.1.0"), "1/16");
}

TEST(Cli, MalformedJsonIsParseError) {
  expect_error(run("rate --dist malformed_poset.json"), "Parse");
  expect_error(run("mobius --poset malformed_poset.json"), "Parse");
}

TEST(Cli, RedundantCoverRejected) { expect_error(run("mobius --poset redundant_poset.json"), "RedundantCover"); }

TEST(Cli, MissingOptionIsUsageError) {
  expect_error(run("rate"), "UsageError");
  expect_error(run("no-such-command"), "UsageError");
}

TEST(Cli, UnknownCatalogEntry) {
  expect_error(run("rate --dist nope:n=3"), "InvalidParams");
  expect_error(run("catalog build nope"), "InvalidParams");
}

TEST(Cli, CatalogListAndBuild) {
  const auto list = run("catalog list");
  ASSERT_EQ(list.code, 0) << list.err;
  std::vector<std::string> names;
  const auto listing = Json::parse(list.out);
  for (const auto& e : listing.at("entries")) names.push_back(e.at("name").get<std::string>());
  for (const char* want : {"chain", "kary_tree", "nonunique", "subsets"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
  const auto built = run("catalog build kary_tree --params k=2 depth=2");
  ASSERT_EQ(built.code, 0) << built.err;
  const auto j = Json::parse(built.out);
  EXPECT_EQ(j.at("name"), "kary_tree");
  EXPECT_EQ(j.at("poset").at("n"), 7);
  EXPECT_TRUE(j.contains("dist"));
}

TEST(Cli, OutputIsByteIdenticalAcrossThreads) {
  const std::string args = "run --spec run_thin.json";
  const auto one = run("--threads 1 " + args);
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(run("--threads 4 " + args).out, one.out);
  EXPECT_EQ(run("--threads 3 " + args).out, one.out);
  EXPECT_EQ(run(args).out, one.out);

  const std::string ladder = "ladder --tree kary:2 --alpha 1/2 --depth 4 --n 2 --replicates 100000 --seed 11";
  const auto a = run("--threads 1 " + ladder);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(run("--threads 4 " + ladder).out, a.out);
}

TEST(Cli, RunSpecMatchesDirectCommand) {
  const auto spec = run("run --spec run_thin.json");
  ASSERT_EQ(spec.code, 0) << spec.err;
  const auto j = Json::parse(spec.out);
  EXPECT_EQ(j.at("command"), "run:thin");
  EXPECT_EQ(j.at("rate"), "1/3");
  EXPECT_EQ(j.at("config").at("seed"), 7);
  EXPECT_EQ(j.at("config").at("replicates"), 200000);
}

TEST(Cli, OutDirectoryReceivesJsonAndCsv) {
  const auto dir = scratch_dir("env");
  const auto r = run("rate --dist antichain:n=3 --alpha 1", "POSRATE_OUT='" + dir.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(dir / "rate.json"));
  EXPECT_EQ(slurp(dir / "rate.json"), r.out);
  const auto csv = slurp(dir / "rate.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "element,f,F,rate");
  EXPECT_NE(csv.find("0,1/3,1/3,1/1"), std::string::npos);

  const auto flag = scratch_dir("flag");
  const auto f = run("find --poset chain:n=5 --alpha-grid 0.1:0.3:0.1 --out '" + flag.string() + "'");
  ASSERT_EQ(f.code, 0) << f.err;
  const auto find_csv = slurp(flag / "find.csv");
  EXPECT_EQ(find_csv.substr(0, find_csv.find('\n')), "alpha,depth,status,residual");
  EXPECT_NE(find_csv.find("1/10,,infeasible,"), std::string::npos);
  EXPECT_EQ(slurp(flag / "find.json"), f.out);
}
