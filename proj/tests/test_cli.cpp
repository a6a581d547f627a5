#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(IPP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

const std::string kScenario = std::string(IPP_SOURCE_DIR) + "/scenarios/nominal.json";

} // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("") == 2);
    CHECK(run("bogus") == 2);
    CHECK(run("montecarlo --runs 1") == 2);
    CHECK(run("simulate --step -1") == 2);
    CHECK(run("simulate --scenario /nonexistent/file.json") == 2);

    const fs::path d = fresh_dir("ipp_cli_bad");
    std::ofstream(d / "bad.json") << "{ \"params\": ";
    CHECK(run("simulate --scenario " + (d / "bad.json").string() + " --out " + d.string()) == 2);
    CHECK_FALSE(fs::exists(d / "trajectory.csv"));
}

TEST_CASE("simulate writes a trajectory") {
    const fs::path d = fresh_dir("ipp_cli_sim");
    REQUIRE(run("simulate --scenario " + kScenario + " --out " + d.string()) == 0);
    const std::string csv = slurp(d / "trajectory.csv");
    CHECK(csv.rfind("tau,x,y,z,", 0) == 0);
}

TEST_CASE("reruns are byte-identical") {
    const fs::path a = fresh_dir("ipp_cli_rerun_a");
    const fs::path b = fresh_dir("ipp_cli_rerun_b");
    const std::string args = "montecarlo --runs 40 --step 1 --seed 9 --scenario " + kScenario;
    REQUIRE(run(args + " --out " + a.string()) == 0);
    REQUIRE(run(args + " --out " + b.string()) == 0);
    CHECK(slurp(a / "impacts.csv") == slurp(b / "impacts.csv"));
    CHECK(slurp(a / "montecarlo.svg") == slurp(b / "montecarlo.svg"));
    CHECK_FALSE(slurp(a / "impacts.csv").empty());
}

TEST_CASE("moments and compare produce their outputs") {
    const fs::path d = fresh_dir("ipp_cli_moments");
    REQUIRE(run("moments --out " + d.string()) == 0);
    CHECK(fs::file_size(d / "moments.csv") > 0);
    REQUIRE(run("compare --runs 50 --step 1 --out " + d.string()) == 0);
    CHECK(fs::file_size(d / "compare.svg") > 0);
}

TEST_CASE("control writes paired outputs") {
    const fs::path d = fresh_dir("ipp_cli_control");
    REQUIRE(run("control --runs 20 --step 1 --out " + d.string()) == 0);
    for (const char* f : {"impacts_controlled.csv", "impacts_uncontrolled.csv", "control_log.csv", "control.svg"}) {
        CHECK(fs::exists(d / f));
    }
}

TEST_CASE("unwritable output leaves nothing behind") {
    const fs::path d = fresh_dir("ipp_cli_nowrite");
    std::ofstream(d / "blocker") << "x";
    const fs::path target = d / "blocker" / "sub";
    CHECK(run("simulate --out " + target.string()) == 1);
    for (const auto& e : fs::directory_iterator(d)) {
        CHECK(e.path().filename() == "blocker");
    }
}
