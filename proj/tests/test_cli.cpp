// End-to-end checks of the `run` subcommand against generated CSV data.
// The CLI binary path arrives via INFOCP_CLI (set by CMake).

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "infocp/rng.hpp"
#include "json.hpp"

namespace {

std::string cli_path() {
  const char* p = std::getenv("INFOCP_CLI");
  return p == nullptr ? std::string() : std::string(p);
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + cli_path() + "\" " + args + " 2>cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return nlohmann::json::parse(buffer.str());
}

}  // namespace

TEST_CASE("cli run on regression and classification CSV data") {
  if (cli_path().empty()) {
    MESSAGE("INFOCP_CLI not set; skipping CLI end-to-end checks");
    return;
  }
  namespace fs = std::filesystem;
  fs::create_directories("cli_work");
  const std::string dir = "cli_work/";

  // Regression: y = 3x + noise, exclude the band [-0.5, 0.5].
  {
    infocp::Rng rng(42);
    std::ostringstream cal;
    cal << "f1,label\n";
    for (int j = 0; j < 120; ++j) {
      const double x = rng.uniform(-1.0, 1.0);
      cal << x << "," << (3.0 * x + 0.4 * rng.normal()) << "\n";
    }
    std::ostringstream test;
    test << "f1\n";
    for (int i = 0; i < 40; ++i) test << rng.uniform(-1.0, 1.0) << "\n";
    write(dir + "cal.csv", cal.str());
    write(dir + "test.csv", test.str());
    write(dir + "score.json",
          R"({"task":"regression","kind":"locally_weighted",
              "mu":{"kind":"linear","coef":[3.0],"intercept":0.0},
              "sigma":{"kind":"constant","value":0.4}})");
    write(dir + "spec.json", R"({"kind":"exclude_interval","a":-0.5,"b":0.5})");

    const int code = run_cli("run --cal " + dir + "cal.csv --test " + dir + "test.csv --score " +
                             dir + "score.json --spec " + dir + "spec.json --procedure infosp " +
                             "--alpha 0.1 --out " + dir + "out.json");
    CHECK(code == 0);
    const auto out = read_json(dir + "out.json");
    CHECK(out.contains("selected"));
    CHECK(out.contains("adjusted_level"));
    CHECK(out.at("regions").is_array());
    for (const auto& region : out.at("regions")) {
      CHECK(region.at("kind") == "interval");
    }

    // InfoSCOP with the default split also runs.
    CHECK(run_cli("run --cal " + dir + "cal.csv --test " + dir + "test.csv --score " + dir +
                  "score.json --spec " + dir + "spec.json --procedure infoscop --alpha 0.1 " +
                  "--out " + dir + "out2.json") == 0);

    // An empty selection is a normal outcome: exit 0 with empty arrays.
    CHECK(run_cli("run --cal " + dir + "cal.csv --test " + dir + "test.csv --score " + dir +
                  "score.json --spec " + dir + "spec.json --procedure infosp --alpha 0.0001 " +
                  "--out " + dir + "empty.json") == 0);
    const auto empty = read_json(dir + "empty.json");
    CHECK(empty.at("selected").empty());
    CHECK(empty.at("regions").empty());
  }

  // Classification with the built-in classifier and a p-value dump.
  {
    infocp::Rng rng(43);
    std::ostringstream cal;
    cal << "f1,f2,label\n";
    for (int j = 0; j < 90; ++j) {
      const int y = 1 + static_cast<int>(rng.next_u64() % 3);
      const double cx = y == 1 ? 0.0 : 3.0;
      const double cy = y == 3 ? 3.0 : 0.0;
      cal << (cx + rng.normal()) << "," << (cy + rng.normal()) << "," << y << "\n";
    }
    std::ostringstream test;
    test << "f1,f2\n";
    for (int i = 0; i < 30; ++i) test << rng.normal() << "," << rng.normal() << "\n";
    write(dir + "ccal.csv", cal.str());
    write(dir + "ctest.csv", test.str());
    write(dir + "cscore.json", R"({"task":"classification","kind":"fit_gaussian","K":3})");
    write(dir + "cspec.json", R"({"kind":"exclude_labels","labels":[1]})");

    const int code = run_cli("run --cal " + dir + "ccal.csv --test " + dir + "ctest.csv --score " +
                             dir + "cscore.json --spec " + dir + "cspec.json --procedure infosp " +
                             "--alpha 0.1 --tie-break --seed 7 --dump-pvalues " + dir +
                             "pv.csv --out " + dir + "cout.json");
    CHECK(code == 0);
    const auto out = read_json(dir + "cout.json");
    for (const auto& region : out.at("regions")) {
      CHECK(region.at("kind") == "labels");
      for (const auto& label : region.at("labels")) CHECK(label != 1);
    }
    std::ifstream pv(dir + "pv.csv");
    std::string header;
    std::getline(pv, header);
    CHECK(header == "i,y,p");
    std::size_t rows = 0;
    for (std::string line; std::getline(pv, line);) rows += !line.empty();
    CHECK(rows == 30 * 3);

    // K mismatch between the spec and the declared model exits with 2.
    write(dir + "badspec.json", R"({"kind":"exclude_labels","labels":[7]})");
    CHECK(run_cli("run --cal " + dir + "ccal.csv --test " + dir + "ctest.csv --score " + dir +
                  "cscore.json --spec " + dir + "badspec.json --procedure infosp --alpha 0.1 " +
                  "--out " + dir + "bad.json") == 2);

    // Task mismatch between the spec and the score model exits with 2.
    CHECK(run_cli("run --cal " + dir + "ccal.csv --test " + dir + "ctest.csv --score " + dir +
                  "cscore.json --spec " + dir + "spec.json --procedure infosp --alpha 0.1 " +
                  "--out " + dir + "bad.json") == 2);
  }

  // Classification from precomputed probability tables.
  {
    infocp::Rng rng(44);
    std::ostringstream cal, pi_cal;
    cal << "f1,label\n";
    pi_cal << "pi1,pi2\n";
    for (int j = 0; j < 40; ++j) {
      const int y = 1 + static_cast<int>(rng.next_u64() % 2);
      const double p1 = y == 1 ? rng.uniform(0.55, 0.95) : rng.uniform(0.05, 0.45);
      cal << j << "," << y << "\n";
      pi_cal << p1 << "," << (1.0 - p1) << "\n";
    }
    std::ostringstream test, pi_test;
    test << "f1\n";
    pi_test << "pi1,pi2\n";
    for (int i = 0; i < 15; ++i) {
      const double p1 = rng.uniform(0.05, 0.95);
      test << i << "\n";
      pi_test << p1 << "," << (1.0 - p1) << "\n";
    }
    write(dir + "tcal.csv", cal.str());
    write(dir + "ttest.csv", test.str());
    write(dir + "pi_cal.csv", pi_cal.str());
    write(dir + "pi_test.csv", pi_test.str());
    write(dir + "tscore.json",
          R"({"task":"classification","kind":"pi_table","K":2,)"
          R"("pi_cal_csv":")" + dir + R"(pi_cal.csv","pi_test_csv":")" + dir + R"(pi_test.csv"})");
    write(dir + "tspec.json", R"({"kind":"nontrivial"})");

    CHECK(run_cli("run --cal " + dir + "tcal.csv --test " + dir + "ttest.csv --score " + dir +
                  "tscore.json --spec " + dir + "tspec.json --procedure naive --alpha 0.2 " +
                  "--out " + dir + "tout.json") == 0);
    const auto out = read_json(dir + "tout.json");
    CHECK(out.at("m_eff") == 15);

    // Row-count mismatch between the table and the data exits with 2.
    write(dir + "pi_test.csv", "pi1,pi2\n0.5,0.5\n");
    CHECK(run_cli("run --cal " + dir + "tcal.csv --test " + dir + "ttest.csv --score " + dir +
                  "tscore.json --spec " + dir + "tspec.json --procedure naive --alpha 0.2 " +
                  "--out " + dir + "tout.json") == 2);
  }
}
