#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "raterboot/sweep.hpp"

namespace raterboot {

// Reproducibility record written next to every output: tool version, dataset
// fingerprint, the full configuration, and the per-cell seed paths. A result
// file is regenerable from its manifest plus the dataset.
struct RunManifest {
    std::string tool_version;
    std::string build_hash;
    std::string command;
    std::string created_utc;
    std::uint64_t dataset_hash = 0;
    std::uint64_t master_seed = 0;
    nlohmann::json config;        // subcommand-specific echo
    nlohmann::json cells;         // sweep only: feasible + skipped cells with seed keys
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

std::string utc_timestamp();

// Grid <-> JSON echo used by sweep manifests and --resume.
nlohmann::json grid_to_json(const SweepGrid& grid);
SweepGrid grid_from_json(const nlohmann::json& j);

// Incremental per-cell results (one JSON object per line); the resume path
// after an interrupted sweep.
void append_partial_cell(const std::string& path, const CellResult& cell);
std::vector<CellResult> read_partial_cells(const std::string& path, const SweepGrid& grid);

} // namespace raterboot
