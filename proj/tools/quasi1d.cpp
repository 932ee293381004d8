#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "q1d/config.hpp"
#include "q1d/errors.hpp"
#include "q1d/runner.hpp"

namespace {

unsigned threads_from_env() {
    const char* s = std::getenv("QUASI1D_THREADS");
    if (!s || !*s) return 0;
    char* end = nullptr;
    const unsigned long v = std::strtoul(s, &end, 10);
    return (*end == '\0') ? static_cast<unsigned>(v) : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasi1d: random quasi-one-dimensional operators"};
    std::string task_name, config_path, out_path, format;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    app.add_option("task", task_name, "lyap-scan | ids | furstenberg | zipper-check | thouless | wegner | "
                                      "eigenmode | transport | selftest")
        ->required();
    app.add_option("--config", config_path, "configuration file");
    app.add_option("--seed", seed, "master seed (overrides [run] seed)");
    app.add_option("--out", out_path, "output file");
    app.add_option("--threads", threads, "worker threads (default: QUASI1D_THREADS or all cores)");
    app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    q1d::RunConfig cfg;
    try {
        const q1d::Task task = q1d::parse_task(task_name);
        if (task != q1d::Task::Selftest) {
            if (config_path.empty()) q1d::fail(q1d::ErrorKind::ValidationError, "--config is required");
            if (out_path.empty()) q1d::fail(q1d::ErrorKind::ValidationError, "--out is required");
        }
        if (!config_path.empty()) {
            std::ifstream f(config_path, std::ios::binary);
            if (!f) q1d::fail(q1d::ErrorKind::ParseError, "cannot read config '" + config_path + "'");
            std::stringstream ss;
            ss << f.rdbuf();
            cfg = q1d::parse_config(ss.str());
            if (cfg.task != task)
                q1d::fail(q1d::ErrorKind::ValidationError,
                          "run.task: config names '" + q1d::to_string(cfg.task) + "' but subcommand is '" + task_name + "'");
        } else {
            cfg.task = task;
        }
        if (seed) cfg.seed = *seed;
        if (format == "csv") cfg.format = q1d::OutputFormat::Csv;
        if (format == "json") cfg.format = q1d::OutputFormat::Json;
    } catch (const q1d::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const unsigned k = threads ? *threads : threads_from_env();
    std::ostringstream log;
    const int code = q1d::run(cfg, out_path, k, log);
    (code == 0 ? std::cout : std::cerr) << log.str();
    return code;
}
