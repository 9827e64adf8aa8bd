#include "raterboot/manifest.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <sstream>

#include "raterboot/error.hpp"
#include "raterboot/version.hpp"

namespace raterboot {

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["tool_version"] = m.tool_version;
    j["build_hash"] = m.build_hash;
    j["command"] = m.command;
    j["created_utc"] = m.created_utc;
    j["dataset_hash"] = m.dataset_hash;
    j["master_seed"] = m.master_seed;
    j["config"] = m.config;
    if (!m.cells.is_null()) j["cells"] = m.cells;
    return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.tool_version = j.value("tool_version", "");
    m.build_hash = j.value("build_hash", "");
    m.command = j.value("command", "");
    m.created_utc = j.value("created_utc", "");
    m.dataset_hash = j.value("dataset_hash", std::uint64_t{0});
    m.master_seed = j.value("master_seed", std::uint64_t{0});
    if (j.contains("config")) m.config = j.at("config");
    if (j.contains("cells")) m.cells = j.at("cells");
    return m;
}

void write_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("IoError", "cannot write " + path);
    out << manifest_to_json(m).dump(2) << '\n';
    if (!out) fail("IoError", "write failed for " + path);
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("IoError", "cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail("IoError", path + ": " + e.what());
    }
    return manifest_from_json(j);
}

nlohmann::json grid_to_json(const SweepGrid& grid) {
    nlohmann::json j;
    j["budgets"] = grid.budgets;
    j["k_schedule"] = grid.k_schedule;
    j["epsilons"] = grid.epsilons;
    std::vector<std::string> samplers, metrics;
    for (SamplerKind s : grid.samplers) samplers.push_back(sampler_name(s));
    for (MetricId m : grid.metrics) metrics.push_back(metric_name(m));
    j["samplers"] = samplers;
    j["metrics"] = metrics;
    j["replicates"] = grid.replicates;
    j["seed"] = grid.seed;
    j["p_value_mode"] = grid.p_mode == PValueMode::Pairwise ? "pairwise" : "paired";
    return j;
}

SweepGrid grid_from_json(const nlohmann::json& j) {
    GridOverrides o;
    o.budgets = j.at("budgets").get<std::vector<long>>();
    o.k_schedule = j.at("k_schedule").get<std::vector<int>>();
    o.epsilons = j.at("epsilons").get<std::vector<double>>();
    std::vector<SamplerKind> samplers;
    for (const auto& s : j.at("samplers")) samplers.push_back(sampler_from_name(s.get<std::string>()));
    o.samplers = std::move(samplers);
    std::vector<MetricId> metrics;
    for (const auto& m : j.at("metrics")) metrics.push_back(metric_from_name(m.get<std::string>()));
    o.metrics = std::move(metrics);
    o.replicates = j.at("replicates").get<int>();
    o.seed = j.at("seed").get<std::uint64_t>();
    SweepGrid grid = build_grid(o);
    if (j.value("p_value_mode", "pairwise") == std::string("paired"))
        grid.p_mode = PValueMode::Paired;
    return grid;
}

namespace {

nlohmann::json row_to_json(const SweepRow& row) {
    return {
        {"sampler", sampler_name(row.sampler)},
        {"budget", row.budget},
        {"n", row.n},
        {"k", row.k},
        {"epsilon", row.epsilon},
        {"metric", metric_name(row.metric)},
        {"p_value", row.p_value},
        {"delta", row.delta},
        {"replicates", row.replicates},
        {"wall_time_ms", row.wall_time_ms},
    };
}

SweepRow row_from_json(const nlohmann::json& j) {
    SweepRow row;
    row.sampler = sampler_from_name(j.at("sampler").get<std::string>());
    row.budget = j.at("budget").get<long>();
    row.n = j.at("n").get<int>();
    row.k = j.at("k").get<int>();
    row.epsilon = j.at("epsilon").get<double>();
    row.metric = metric_from_name(j.at("metric").get<std::string>());
    row.p_value = j.at("p_value").get<double>();
    row.delta = j.at("delta").get<double>();
    row.replicates = j.at("replicates").get<int>();
    row.wall_time_ms = j.at("wall_time_ms").get<double>();
    return row;
}

} // namespace

void append_partial_cell(const std::string& path, const CellResult& cell) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) fail("IoError", "cannot append to " + path);
    nlohmann::json j;
    j["cell_key"] = cell.cell.cell_key;
    nlohmann::json rows = nlohmann::json::array();
    for (const SweepRow& row : cell.rows) rows.push_back(row_to_json(row));
    j["rows"] = std::move(rows);
    out << j.dump() << '\n';
    out.flush();
    if (!out) fail("IoError", "write failed for " + path);
}

std::vector<CellResult> read_partial_cells(const std::string& path, const SweepGrid& grid) {
    std::vector<CellResult> cells;
    std::ifstream in(path, std::ios::binary);
    if (!in) return cells; // nothing done yet

    std::vector<SweepCell> grid_cells = enumerate_cells(grid, nullptr);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            break; // torn tail write from an interrupted run
        }
        CellResult cell;
        const auto key = j.at("cell_key").get<std::uint64_t>();
        auto it = std::find_if(grid_cells.begin(), grid_cells.end(),
                               [&](const SweepCell& c) { return c.cell_key == key; });
        if (it == grid_cells.end()) continue; // grid changed; recompute that cell
        cell.cell = *it;
        for (const auto& rj : j.at("rows")) cell.rows.push_back(row_from_json(rj));
        cells.push_back(std::move(cell));
    }
    return cells;
}

} // namespace raterboot
