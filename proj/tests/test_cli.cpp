// Black-box checks of the command-line driver: config grammar, file outputs,
// determinism, error reporting.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

#ifndef KAMRED_CLI
#error "KAMRED_CLI must point at the driver binary"
#endif

std::string cli = KAMRED_CLI;

int run(const std::string& args) {
    std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

fs::path scratch() {
    fs::path p = fs::temp_directory_path() / "kamred_cli_test";
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("psi-scan writes the table and a deterministic report") {
    fs::path dir = scratch();
    write(dir / "psi.cfg",
          "command = psi-scan\n[frequency]\npreset = golden\n[psi]\nkmax = 50\n");
    REQUIRE(run("--config " + (dir / "psi.cfg").string() + " --out " + (dir / "o1").string()) == 0);
    REQUIRE(run("--config " + (dir / "psi.cfg").string() + " --out " + (dir / "o2").string()) == 0);
    CHECK(slurp(dir / "o1" / "report.json") == slurp(dir / "o2" / "report.json"));

    // K = 2 row of the table
    std::ifstream csv(dir / "o1" / "psi.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "K,psi,k1,k2");
    std::getline(csv, line);
    std::getline(csv, line);
    CHECK(line.substr(0, 10) == "2,0.257518");

    json rep = json::parse(slurp(dir / "o1" / "report.json"));
    CHECK(rep["command"] == "psi-scan");
    CHECK(rep["config"]["psi.kmax"] == "50");
    CHECK(rep["result"]["kmax"] == 50);
}

TEST_CASE("conditions command classifies the gevrey example") {
    fs::path dir = scratch();
    write(dir / "cond.cfg",
          "command = conditions\n[weight]\nweight = gevrey:2\n"
          "[conditions]\npsi = exp-power:0.4\nvmax = 1e6\n");
    REQUIRE(run("--config " + (dir / "cond.cfg").string() + " --out " + (dir / "oc").string()) == 0);
    json rep = json::parse(slurp(dir / "oc" / "report.json"));
    CHECK(rep["result"]["lambda_br"]["verdict"] == "converges");
    CHECK(rep["result"]["br_equivalent"]["verdict"] == "converges");
    CHECK(rep["result"]["br_verdicts_agree"] == true);
    CHECK(fs::exists(dir / "oc" / "decades.csv"));
}

TEST_CASE("reduce command produces a converged report with side files") {
    fs::path dir = scratch();
    write(dir / "red.cfg",
          "command = reduce\n"
          "[frequency]\npreset = golden\n"
          "[weight]\nweight = analytic\n"
          "[psi]\nkmax = 700\n"
          "[cocycle]\nA = 0 1 -1 0\nr = 0.2\nscale_to_threshold = 0.9\n"
          "mode = cos 1 0 : 0 1 -1 0\n"
          "mode = cos 0 1 : 0.7 0.35 0.35 -0.7\n"
          "[kam]\nmax_steps = 4\nresidual_tol = 1e-5\nrho_precheck = false\n");
    REQUIRE(run("--config " + (dir / "red.cfg").string() + " --out " + (dir / "or").string()) == 0);
    json rep = json::parse(slurp(dir / "or" / "report.json"));
    CHECK(rep["result"]["converged"] == true);
    CHECK(fs::exists(dir / "or" / "steps.csv"));
    CHECK(fs::exists(dir / "or" / "conjugacy.series"));
    CHECK(fs::exists(dir / "or" / "conjugacy_inv.series"));
}

TEST_CASE("rotation command") {
    fs::path dir = scratch();
    write(dir / "rot.cfg",
          "command = rotation\n"
          "[frequency]\npreset = golden\n"
          "[cocycle]\nA = 0 0.7 -0.7 0\nr = 0.2\nmode = cos 1 0 : 0 0.3 -0.3 0\n"
          "[rotation]\nhorizon = 2000\nstep = 0.05\n");
    REQUIRE(run("--config " + (dir / "rot.cfg").string() + " --out " + (dir / "orot").string()) == 0);
    json rep = json::parse(slurp(dir / "orot" / "report.json"));
    double v = rep["result"]["value"];
    CHECK(std::abs(v - 0.7) < 1e-3);
}

TEST_CASE("error reporting") {
    fs::path dir = scratch();
    SUBCASE("unknown key names the line") {
        write(dir / "bad.cfg", "command = psi-scan\n[psi]\nkmax = 10\nnonsense = 1\n");
        CHECK(run("--config " + (dir / "bad.cfg").string() + " --out " + (dir / "ob").string()) == 2);
        json rep = json::parse(slurp(dir / "ob" / "report.json"));
        CHECK(rep["error"]["type"] == "config");
        std::string msg = rep["error"]["message"];
        CHECK(msg.find("nonsense") != std::string::npos);
        CHECK(msg.find(":4") != std::string::npos);
    }
    SUBCASE("missing config file") {
        CHECK(run("--config /nonexistent.cfg --out " + (dir / "om").string()) == 2);
    }
    SUBCASE("runtime errors land in the error block with status 1") {
        write(dir / "res.cfg",
              "command = psi-scan\n[frequency]\ncomponents = 1 0.5\n[psi]\nkmax = 10\n");
        CHECK(run("--config " + (dir / "res.cfg").string() + " --out " + (dir / "ores").string()) == 1);
        json rep = json::parse(slurp(dir / "ores" / "report.json"));
        CHECK(rep["error"]["type"] == "runtime");
        std::string msg = rep["error"]["message"];
        CHECK(msg.find("resonant") != std::string::npos);
    }
    SUBCASE("subcommand overrides the config command") {
        write(dir / "over.cfg", "command = conditions\n[psi]\nkmax = 12\n[frequency]\npreset = golden\n");
        CHECK(run("psi-scan --config " + (dir / "over.cfg").string() + " --out " +
                  (dir / "oover").string()) == 0);
        json rep = json::parse(slurp(dir / "oover" / "report.json"));
        CHECK(rep["command"] == "psi-scan");
    }
}
