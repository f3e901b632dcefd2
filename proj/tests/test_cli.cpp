#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "rblab/cli.hpp"

#include "test_support.hpp"

using rblab::test::read_text_file;
using rblab::test::split_csv;
using rblab::test::TempDir;
using rblab::test::write_text_file;

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("rblab");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return rblab::cli::run(static_cast<int>(argv.size()), argv.data());
}

nlohmann::json read_report(const TempDir& dir) {
  return nlohmann::json::parse(read_text_file(dir.str("report.json")));
}

}  // namespace

TEST_CASE("solve-rbsde writes the expected artifacts on the lattice") {
  TempDir out;
  const int rc = run_cli({"solve-rbsde", "--config", "configs/quadratic.json",
                          "--out", out.str("")});
  CHECK(rc == 0);

  const auto rows = split_csv(read_text_file(out.str("result.csv")));
  REQUIRE(rows.size() == 202);  // header + 201 time points
  CHECK(rows[0] ==
        std::vector<std::string>{"t", "Y0_profile", "K_mean", "Z_rms"});
  CHECK(std::stod(rows[1][0]) == 0.0);
  CHECK(std::abs(std::stod(rows[1][1]) - 0.5) <= 1e-2);
  CHECK(std::stod(rows[1][2]) == 0.0);

  const nlohmann::json report = read_report(out);
  CHECK(report["version"].is_string());
  CHECK(report["subcommand"] == "solve-rbsde");
  CHECK(report["backend"] == "lattice");
  REQUIRE(report["checks"].is_array());
  CHECK(report["checks"].size() >= 3);
  for (const auto& check : report["checks"]) {
    CHECK(check["pass"] == true);
    CHECK(check["paper_ref"] ==
          "rblab:" + check["name"].get<std::string>());
    CHECK(check["margin"].is_number());
    CHECK(check["tolerance"].is_number());
  }
}

TEST_CASE("solve-rbode writes the tent profile") {
  TempDir out;
  const int rc = run_cli({"solve-rbode", "--config",
                          "configs/rbode_tent.json", "--out", out.str("")});
  CHECK(rc == 0);
  const auto rows = split_csv(read_text_file(out.str("result.csv")));
  REQUIRE(rows.size() == 202);
  CHECK(rows[0] == std::vector<std::string>{"t", "y", "k"});
  CHECK(std::stod(rows[1][1]) == 1.0);  // running barrier supremum at t = 0
  CHECK(std::stod(rows[1][2]) == 0.0);
  CHECK(std::stod(rows[201][1]) == 0.0);
}

TEST_CASE("solve-theta recovers the linear closed form") {
  TempDir out;
  const int rc = run_cli({"solve-theta", "--config",
                          "configs/theta_linear.json", "--out", out.str("")});
  CHECK(rc == 0);
  const auto rows = split_csv(read_text_file(out.str("result.csv")));
  REQUIRE(rows.size() == 20002);
  CHECK(rows[0] == std::vector<std::string>{"t", "theta", "k"});
  const double theta0 = std::stod(rows[1][1]);
  const double expected = std::exp(2.0 * std::exp(1.0) - 1.0);
  CHECK(std::abs(theta0 - expected) <= 1e-2 * expected);
}

TEST_CASE("bound brackets the solution") {
  TempDir out;
  const int rc = run_cli({"bound", "--config", "configs/american_put.json",
                          "--out", out.str("")});
  CHECK(rc == 0);
  const auto rows = split_csv(read_text_file(out.str("bound.csv")));
  REQUIRE(rows.size() == 66);  // header + 65 time points
  CHECK(rows[0] == std::vector<std::string>{"t", "lower", "Y", "upper"});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double lower = std::stod(rows[r][1]);
    const double y = std::stod(rows[r][2]);
    const double upper = std::stod(rows[r][3]);
    CHECK(lower <= y);
    CHECK(y <= upper + 1e-8 * (1.0 + std::abs(y)));
  }
}

TEST_CASE("identical seeds reproduce artifacts byte for byte") {
  TempDir a, b, c;
  CHECK(run_cli({"solve-rbsde", "--config", "configs/quadratic.json", "--out",
                 a.str("")}) == 0);
  CHECK(run_cli({"solve-rbsde", "--config", "configs/quadratic.json", "--out",
                 b.str("")}) == 0);
  CHECK(read_text_file(a.str("result.csv")) ==
        read_text_file(b.str("result.csv")));

  TempDir ra, rb, rc_dir;
  const std::vector<std::string> base = {
      "solve-rbsde", "--config", "configs/american_put.json", "--backend",
      "regression"};
  auto with = [&base](const std::string& seed, const std::string& out) {
    std::vector<std::string> args = base;
    args.insert(args.end(), {"--seed", seed, "--out", out});
    return args;
  };
  CHECK(run_cli(with("123", ra.str(""))) == 0);
  CHECK(run_cli(with("123", rb.str(""))) == 0);
  CHECK(run_cli(with("124", rc_dir.str(""))) == 0);
  const std::string first = read_text_file(ra.str("result.csv"));
  CHECK(first == read_text_file(rb.str("result.csv")));
  CHECK(first != read_text_file(rc_dir.str("result.csv")));

  const auto rows = split_csv(first);
  REQUIRE(rows.size() == 66);
  CHECK(rows[0] ==
        std::vector<std::string>{"t", "Y0_profile", "K_mean", "Z_rms"});
}

TEST_CASE("verify honours a narrowed checks list") {
  TempDir dir;
  write_text_file(dir.str("checks.json"),
                  R"({"checks": ["validation", "stability"]})");
  TempDir out;
  const int rc = run_cli(
      {"verify", "--config", dir.str("checks.json"), "--out", out.str("")});
  CHECK(rc == 0);

  const nlohmann::json report = read_report(out);
  CHECK(report["subcommand"] == "verify");
  REQUIRE(report["checks"].size() == 2);
  CHECK(report["checks"][0]["name"] == "validation.assumptions");
  CHECK(report["checks"][1]["name"] == "stability.monotone");
  for (const auto& check : report["checks"]) {
    CHECK(check["pass"] == true);
  }
}

TEST_CASE("configuration problems exit with code 3") {
  TempDir out;
  CHECK(run_cli({"solve-rbsde", "--out", out.str("")}) == 3);
  CHECK(run_cli({"solve-rbsde", "--config", "does/not/exist.json", "--out",
                 out.str("")}) == 3);

  TempDir dir;
  write_text_file(dir.str("broken.json"), "{ not json");
  CHECK(run_cli({"solve-rbsde", "--config", dir.str("broken.json"), "--out",
                 out.str("")}) == 3);

  CHECK(run_cli({"--frobnicate"}) == 3);
  CHECK(run_cli({}) == 3);  // a subcommand is required
  CHECK(run_cli({"--help"}) == 0);
}
