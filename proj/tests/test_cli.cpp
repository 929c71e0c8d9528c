#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

int run_cli(const std::string& args) {
    const int rc = std::system((std::string(ORW_CLI_PATH) + " " + args +
                                " > /dev/null 2>&1")
                                   .c_str());
    REQUIRE(rc != -1);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const char* kConfig = R"({
  "law": {"d": 2, "kind": "component-table",
          "components": [[[-1,0.5],[1,0.5]], [[-1,0.5],[1,0.5]]]},
  "probes": [2],
  "c_grid": [0.2],
  "replicas": 2000
})";

}  // namespace

TEST_CASE("cli runs an estimate experiment and reruns byte-identically") {
    const std::string dir = "/tmp/orw_cli_est";
    std::filesystem::remove_all(dir + "_a");
    std::filesystem::remove_all(dir + "_b");
    {
        std::ofstream out("/tmp/orw_cli_cfg.json");
        out << kConfig;
    }
    CHECK(run_cli("estimate-h --config /tmp/orw_cli_cfg.json --seed 4 --out " + dir +
                  "_a") == 0);
    CHECK(run_cli("estimate-h --config /tmp/orw_cli_cfg.json --seed 4 --threads 2 --out " +
                  dir + "_b") == 0);
    CHECK(slurp(dir + "_a/estimates.csv") == slurp(dir + "_b/estimates.csv"));
    CHECK(slurp(dir + "_a/manifest.json") == slurp(dir + "_b/manifest.json"));
}

TEST_CASE("cli maps usage and validation problems to exit code two") {
    CHECK(run_cli("no-such-subcommand") == 2);
    CHECK(run_cli("estimate-h --config /does/not/exist.json") == 2);
    {
        std::ofstream out("/tmp/orw_cli_bad.json");
        out << "{\"c_grid\": [0.1, 0.2]}";
    }
    CHECK(run_cli("estimate-h --config /tmp/orw_cli_bad.json --out /tmp/orw_cli_badout") ==
          2);
    {
        std::ofstream out("/tmp/orw_cli_nojson.json");
        out << "not json";
    }
    CHECK(run_cli("estimate-h --config /tmp/orw_cli_nojson.json") == 2);
}

TEST_CASE("cli samples conditioned paths to csv") {
    const char* cfg = R"({
      "law": {"d": 2, "kind": "component-table",
              "components": [[[-1,0.5],[1,0.5]], [[-1,0.5],[1,0.5]]]},
      "x0": [0, 2], "c": 0.2, "T": 3, "samples": 20
    })";
    {
        std::ofstream out("/tmp/orw_cli_cond.json");
        out << cfg;
    }
    std::filesystem::remove_all("/tmp/orw_cli_paths");
    CHECK(run_cli("sample-conditioned --config /tmp/orw_cli_cond.json --out "
                  "/tmp/orw_cli_paths") == 0);
    const std::string csv = slurp("/tmp/orw_cli_paths/paths.csv");
    CHECK(csv.rfind("replica,step,x1,x2,killed,config_hash,seed", 0) == 0);
}
