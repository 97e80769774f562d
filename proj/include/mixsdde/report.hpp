#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixsdde/config.hpp"
#include "mixsdde/experiments.hpp"
#include "mixsdde/grid_path.hpp"

namespace mixsdde::report {

using config::Json;

// Library version string embedded in every report.
std::string version();

Json to_json(const AssumptionReport& r);
Json to_json(const exp::ConvergenceReport& r);
Json to_json(const exp::MomentReport& r);
Json to_json(const exp::QuasiReport& r);

// {version, experiment, config, report, passed}. Contains no timing so that
// identical (config, seed) give identical bytes.
Json envelope(exp::Kind kind, const config::LoadedConfig& cfg, Json body, bool passed);

// Two-space indented JSON with a trailing newline.
std::string dump(const Json& j);

// Writes text to path, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

// CSV with header "time,v1,...,vd" (or the given column names) and one row per
// node. Numbers are printed with 17 significant digits so they read back exactly.
std::string path_csv(const GridPath& path, const std::vector<std::string>& columns = {});
void write_path_csv(const std::filesystem::path& file, const GridPath& path,
                    const std::vector<std::string>& columns = {});

// Reads a CSV written by write_path_csv (any header names). The time column
// must be a uniform grid. Throws ParseError on malformed content, IoError when
// the file cannot be read.
GridPath parse_path_csv(const std::string& text);
GridPath read_path_csv(const std::filesystem::path& file);

// Per-replica distances, one column per level: "replica,<level>,...".
std::string distances_csv(const exp::ConvergenceReport& r);

}  // namespace mixsdde::report
