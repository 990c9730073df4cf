#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rsma/cli.hpp"

using namespace rsma;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("parse a full region command") {
  const auto cfg = cli::parse_args(
      {"region", "--alpha", "0.5", "--beta", "0.1", "--snr-db", "20",
       "--schemes", "rs,mulp,scsic", "--realizations", "10", "--seed", "7",
       "--output", "out/run1"});
  CHECK(cfg.subcommand == "region");
  CHECK(cfg.experiment.alpha == 0.5);
  CHECK(cfg.experiment.beta == 0.1);
  CHECK(cfg.experiment.snr_db == std::vector<double>{20.0});
  CHECK(cfg.experiment.schemes == std::vector<std::string>{"rs", "mulp", "scsic"});
  CHECK(cfg.experiment.realizations == 10);
  CHECK(cfg.experiment.seed == 7);
  CHECK(cfg.output == "out/run1");
}

TEST_CASE("flag validation") {
  CHECK_THROWS_AS(cli::parse_args({"region", "--alpha", "1.5"}), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_args({"region", "--beta", "-0.1"}), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_args({"region", "--schemes", "tdma"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_args({"region", "--realizations", "0"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_args({"region", "--topology", "three-cell"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_args({"orbit"}), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_args({}), std::invalid_argument);
  CHECK_THROWS_AS(cli::parse_args({"sumrate", "--qos", "-0.5"}),
                  std::invalid_argument);
}

TEST_CASE("qos schedule handling") {
  // single entry broadcast over the SNR grid for sumrate runs
  const auto cfg = cli::parse_args({"sumrate", "--snr-db", "0,10,20", "--qos", "0.1"});
  CHECK(cfg.experiment.qos_schedule == std::vector<double>{0.1, 0.1, 0.1});
  const auto full = cli::parse_args(
      {"sumrate", "--snr-db", "0,10", "--qos", "0.1,0.2"});
  CHECK(full.experiment.qos_schedule == std::vector<double>{0.1, 0.2});
  CHECK_THROWS_AS(
      cli::parse_args({"sumrate", "--snr-db", "0,10,20", "--qos", "0.1,0.2"}),
      std::invalid_argument);
}

TEST_CASE("defaults") {
  const auto cfg = cli::parse_args({"sumrate"});
  CHECK(cfg.experiment.topology == "two-cell");
  CHECK(cfg.experiment.alpha == 1.0);
  CHECK(cfg.experiment.realizations == 25);
  CHECK(cfg.output == "rsma_out");
  CHECK(cfg.experiment.threads >= 1);
}

TEST_CASE("binary produces byte-identical CSVs on rerun") {
  const fs::path dir = fs::temp_directory_path() / "rsma_cli_test";
  fs::create_directories(dir);
  const std::string base = "sumrate --snr-db 10 --schemes mulp --realizations 2 "
                           "--seed 3 --alpha 0.5 --beta 1";
  auto invoke = [&](const std::string& out) {
    const std::string cmd = std::string(RSMA_CLI_PATH) + " " + base + " --output " +
                            (dir / out).string() + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  REQUIRE(invoke("a") == 0);
  REQUIRE(invoke("b") == 0);
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a.find("scheme,") == 0);
  CHECK(slurp(dir / "a.manifest.json").find("\"seed\"") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("binary reports usage errors as JSON on stderr") {
  const fs::path dir = fs::temp_directory_path() / "rsma_cli_err";
  fs::create_directories(dir);
  const std::string cmd = std::string(RSMA_CLI_PATH) + " region --alpha 2 2>" +
                          (dir / "err.txt").string() + " >/dev/null";
  CHECK(std::system(cmd.c_str()) != 0);
  CHECK(slurp(dir / "err.txt").find("error") != std::string::npos);
  fs::remove_all(dir);
}
