#include <doctest.h>

#include "pathsmooth/cli.hpp"
#include "pathsmooth/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pathsmooth;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "pathsmooth");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("dataset parsing") {
  std::istringstream ok("time,y\n1,0.5\n2,0.25\n");
  const auto d = parse_dataset(ok);
  CHECK(d.size() == 2);
  CHECK(d.spacing() == doctest::Approx(1.0));

  std::istringstream header_only("time,y\n");
  CHECK(parse_dataset(header_only).size() == 0);

  std::istringstream dated("date,value\n2001-01-02,5.1\n2001-01-03,5.2\n");
  const auto t = parse_dataset(dated);
  CHECK(t.size() == 2);
  CHECK(t.dates[1] == "2001-01-03");

  std::istringstream bad("time,y\n1,0.5\n2,abc\n");
  try {
    parse_dataset(bad, "bad.csv");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("command line exit codes") {
  const auto dir = std::filesystem::temp_directory_path() / "pathsmooth_cli_test";
  std::filesystem::create_directories(dir);
  const std::string out = (dir / "sim.csv").string();

  CHECK(run({"simulate", "--model", "ou", "--theta", "0.5,0,0.4", "--n", "5", "--out", out, "--seed", "3"}) ==
        kExitOk);
  CHECK(std::filesystem::exists(out));
  CHECK(read_dataset(out).size() == 5);
  CHECK(run({"simulate", "--model", "ou", "--theta", "-0.5,0,0.4", "--n", "5", "--out", out}) == kExitConfig);
  CHECK(run({"nonsense"}) == kExitConfig);
  CHECK(run({"score", "--model", "ou", "--theta", "0.5,0,0.4", "--data", out, "--N", "10", "--R", "2", "--out",
             (dir / "score.csv").string()}) == kExitOk);
  CHECK(run({"validate", "--criteria", "4", "--corrupt-tolerance"}) == kExitValidation);
  CHECK(run({"validate", "--criteria", "4,10"}) == kExitOk);
}
