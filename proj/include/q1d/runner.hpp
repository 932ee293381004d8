#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "q1d/config.hpp"

namespace q1d {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

struct TaskOutput {
    Table table;
    std::string json;     // full JSON document
    std::string summary;  // one line for stdout
    bool ok = true;       // selftest verdict
};

/// Dispatches to the module operation; throws q1d::Error on failure.
TaskOutput execute(const RunConfig& cfg, unsigned threads);

std::string to_csv(const Table& t);

/// Writes to PATH.tmp then renames; the temp file is removed on failure.
void write_atomic(const std::string& path, const std::string& content);

/// 0 success, 1 validation failure, 2 numerical failure.
int run(const RunConfig& cfg, const std::string& out_path, unsigned threads, std::ostream& log);

}  // namespace q1d
