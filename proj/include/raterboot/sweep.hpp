#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "raterboot/dataset.hpp"
#include "raterboot/metrics.hpp"
#include "raterboot/resample.hpp"
#include "raterboot/sim.hpp"

namespace raterboot {

struct SweepGrid {
    std::vector<long> budgets;      // N*K totals, ascending
    std::vector<int> k_schedule;    // ascending
    std::vector<double> epsilons;   // ascending, each in [0, 1)
    std::vector<SamplerKind> samplers;
    std::vector<MetricId> metrics = all_metrics();
    int replicates = 1000;
    std::uint64_t seed = 0;
    PValueMode p_mode = PValueMode::Pairwise;
};

struct GridOverrides {
    std::optional<std::vector<long>> budgets;
    std::optional<std::vector<int>> k_schedule;
    std::optional<std::vector<double>> epsilons;
    std::optional<std::vector<SamplerKind>> samplers;
    std::optional<std::vector<MetricId>> metrics;
    std::optional<int> replicates;
    std::optional<std::uint64_t> seed;
};

// Defaults: budgets {100,...,50000}, K {1..10, 20,40,60,80,100},
// epsilon {0.1, 0.2, 0.3, 0.4}. Throws InvalidGrid on bad overrides.
SweepGrid build_grid(const GridOverrides& overrides = {});

struct SweepCell {
    SamplerKind sampler = SamplerKind::S1;
    long budget = 0;
    int n = 0; // floor(budget / k)
    int k = 0;
    double epsilon = 0.0;
    std::uint64_t cell_key = 0; // stable hash, independent of enumeration order
};

// Stable per-cell seed derived from the cell coordinates, so grid edits do
// not shift other cells' results.
std::uint64_t cell_seed_key(SamplerKind sampler, long budget, int k, double epsilon);

struct SweepRow {
    SamplerKind sampler = SamplerKind::S1;
    long budget = 0;
    int n = 0;
    int k = 0;
    double epsilon = 0.0;
    MetricId metric = MetricId::Accuracy;
    double p_value = 1.0;
    double delta = 0.0;
    int replicates = 0;
    double wall_time_ms = 0.0;
};

struct SkippedCell {
    SamplerKind sampler = SamplerKind::S1;
    long budget = 0;
    int k = 0;
    double epsilon = 0.0;
    std::string reason;
};

struct SweepResult {
    std::vector<SweepRow> rows;       // canonical order: sampler, budget, k, epsilon, metric
    std::vector<SkippedCell> skipped; // infeasible cells
};

// All rows of one completed cell, in grid metric order.
struct CellResult {
    SweepCell cell;
    std::vector<SweepRow> rows;
};

std::vector<SweepCell> enumerate_cells(const SweepGrid& grid, std::vector<SkippedCell>* skipped);

// Runs every feasible cell not already in `completed`. `on_cell` (optional)
// fires as cells finish, serialized by an internal mutex; rows come back in
// canonical order regardless of the parallelism level.
SweepResult run_sweep(const AnnotationDataset& d, const SweepGrid& grid, int parallelism,
                      const std::function<void(const CellResult&)>& on_cell = nullptr,
                      const std::vector<CellResult>& completed = {});

struct MinBudgetRow {
    SamplerKind sampler = SamplerKind::S1;
    double epsilon = 0.0;
    MetricId metric = MetricId::Accuracy;
    bool achieved = false;
    long budget = 0;
    int k = 0;
    double p_value = 1.0;
    double delta = 0.0;
};

// Per (sampler, epsilon, metric): smallest budget with any p < alpha, then
// the argmin-p K at that budget (ties -> smaller K).
std::vector<MinBudgetRow> min_budget_table(const SweepResult& r, double alpha);

} // namespace raterboot
