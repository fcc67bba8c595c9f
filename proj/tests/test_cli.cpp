#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(GAINML_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli exit codes") {
    const auto dir = fs::temp_directory_path() / "gainml_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    CHECK(run("") == 2);
    CHECK(run("period1") == 2);
    CHECK(run("period1 --config " + (dir / "none.json").string()) == 3);
    std::ofstream(dir / "bad.json") << "{";
    CHECK(run("period1 --config " + (dir / "bad.json").string()) == 2);

    std::ofstream(dir / "scn.json") << R"({"n_p1": 250, "n_p2": 250, "output_dir": "farm"})";
    CHECK(run("synth --config " + (dir / "scn.json").string() + " --seed 3") == 0);
    const auto cfg = (dir / "farm" / "analysis.json").string();
    CHECK(fs::exists(cfg));
    CHECK(run("period2 --config " + cfg) == 7);
    CHECK(run("period1 --config " + cfg + " --override-pair CTRB") == 2);
    CHECK(run("period1 --config " + cfg + " --seed nope") == 2);

    std::ofstream(dir / "bad_scn.json") << R"({"n_p1": 10})";
    CHECK(run("synth --config " + (dir / "bad_scn.json").string()) == 2);
    fs::remove_all(dir);
}
