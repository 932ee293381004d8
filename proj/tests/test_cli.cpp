#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("q1d_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / (name + ".cfg");
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& args) {
    const std::string cmd = std::string(QUASI1D_BIN) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

int run_task(const std::string& task, const fs::path& cfg, const fs::path& out, const std::string& extra = "") {
    return run(task + " --config " + cfg.string() + " --out " + out.string() + " --seed 11 " + extra);
}

struct Case {
    const char* task;
    const char* config;
};

const Case kTasks[] = {
    {"lyap-scan",
     "[run]\ntask = lyap-scan\ngrid = 0.5\nsteps = 5000\nrealizations = 3\n"
     "[model]\nfamily = discrete\nD = 2\n"},
    {"ids", "[run]\ntask = ids\ngrid = -1, 0, 1\nL = 40\nrealizations = 4\n[model]\nfamily = discrete\n"},
    {"furstenberg", "[run]\ntask = furstenberg\ngrid = 0.5\n[model]\nfamily = discrete\nD = 2\n"},
    {"zipper-check",
     "[run]\ntask = zipper-check\ngrid = 0.3\n[model]\nfamily = zipper\nD = 2\nalpha = 0.3 0; 0 0.2\n"
     "[zipper-check]\nsamples = 20\n"},
    {"thouless",
     "[run]\ntask = thouless\ngrid = -0.5, 0, 0.5\nL = 60\nrealizations = 4\nsteps = 5000\n"
     "[model]\nfamily = discrete\n"},
    {"wegner", "[run]\ntask = wegner\n[model]\nfamily = discrete\n[wegner]\nL_list = 10, 20\ntrials = 200\n"},
    {"eigenmode",
     "[run]\ntask = eigenmode\nL = 80\nrealizations = 2\nsteps = 5000\n[model]\nfamily = discrete\nlambda = 4\n"},
    {"transport",
     "[run]\ntask = transport\nL = 60\nrealizations = 2\n[model]\nfamily = discrete\nlambda = 4\n"
     "[transport]\nt_grid = 0, 1, 5, 10\n"},
};

}  // namespace

TEST_CASE("lyap-scan CSV schema on the free model") {
    const auto cfg = write_config("free", "[run]\ntask = lyap-scan\ngrid = 2.5, 3.0\nsteps = 20000\n"
                                          "realizations = 2\n[model]\nfamily = discrete\nlambda = 0\n");
    const auto out = scratch() / "free.csv";
    REQUIRE(run_task("lyap-scan", cfg, out) == 0);
    std::istringstream is(slurp(out));
    std::string line;
    std::getline(is, line);
    CHECK(line == "E,gamma_1,sigma_1,gamma_2,sigma_2,pairing_defect");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("furstenberg D=3 JSON") {
    const auto cfg = write_config("f3", "[run]\ntask = furstenberg\ngrid = 0.5\n[model]\nfamily = discrete\nD = 3\n");
    const auto out = scratch() / "f3.json";
    REQUIRE(run_task("furstenberg", cfg, out, "--format json") == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    REQUIRE(j.at("reports").size() == 1);
    CHECK(j["reports"][0]["verdict"] == "Full");
    CHECK(j["reports"][0]["closure_dim"] == 21);
}

TEST_CASE("every task is byte-identical on rerun") {
    for (const auto& c : kTasks) {
        CAPTURE(std::string(c.task));
        const auto cfg = write_config(c.task, c.config);
        for (const char* fmt : {"csv", "json"}) {
            const auto a = scratch() / (std::string(c.task) + "_a." + fmt);
            const auto b = scratch() / (std::string(c.task) + "_b." + fmt);
            REQUIRE(run_task(c.task, cfg, a, std::string("--format ") + fmt) == 0);
            REQUIRE(run_task(c.task, cfg, b, std::string("--format ") + fmt + " --threads 2") == 0);
            const std::string sa = slurp(a);
            CHECK(!sa.empty());
            CHECK(sa == slurp(b));
        }
    }
}

TEST_CASE("seed changes the output") {
    const auto cfg = write_config("seeded", kTasks[1].config);
    const auto a = scratch() / "s1.csv";
    const auto b = scratch() / "s2.csv";
    REQUIRE(run("ids --config " + cfg.string() + " --out " + a.string() + " --seed 1") == 0);
    REQUIRE(run("ids --config " + cfg.string() + " --out " + b.string() + " --seed 2") == 0);
    CHECK(slurp(a) != slurp(b));
}

TEST_CASE("exit codes") {
    const auto out = scratch() / "bad.csv";
    CHECK(run("selftest") == 0);
    CHECK(run("selftest --out " + (scratch() / "self.csv").string()) == 0);
    CHECK(run("no-such-task") == 1);
    CHECK(run("lyap-scan --config " + (scratch() / "missing.cfg").string() + " --out " + out.string()) == 1);

    const auto bad = write_config("bad_ua", "[run]\ntask = lyap-scan\ngrid = 0\n[model]\nfamily = unitary-anderson\n"
                                            "r = 0.6\nt = 0.7\n");
    CHECK(run_task("lyap-scan", bad, out) == 1);
    // config task and subcommand disagree
    const auto ids = write_config("ids_only", kTasks[1].config);
    CHECK(run_task("wegner", ids, out) == 1);
    CHECK(run_task("ids", ids, out, "--format xml") == 1);

    // numerical failures: extended states only, and a front that reaches the boundary
    const auto free_modes = write_config("free_modes", "[run]\ntask = eigenmode\nL = 60\nrealizations = 1\n"
                                                       "steps = 2000\n[model]\nfamily = discrete\nlambda = 0\n");
    CHECK(run_task("eigenmode", free_modes, out) == 2);
    CHECK(!fs::exists(out));
    const auto wide = write_config("wide", "[run]\ntask = transport\nL = 20\nrealizations = 1\n[model]\n"
                                           "family = discrete\nlambda = 0\n[transport]\nt_grid = 0, 50\n");
    CHECK(run_task("transport", wide, out) == 2);
    CHECK(!fs::exists(out));
    CHECK(!fs::exists(out.string() + ".tmp"));
}

TEST_CASE("cleanup") { fs::remove_all(scratch()); }
