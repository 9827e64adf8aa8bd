#include "raterboot/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "raterboot/error.hpp"
#include "raterboot/rng.hpp"

namespace raterboot {

namespace {

template <typename T>
void require_sorted_unique(std::vector<T>& v, const char* what) {
    if (v.empty()) fail("InvalidGrid", std::string(what) + " is empty");
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

SweepGrid build_grid(const GridOverrides& overrides) {
    SweepGrid g;
    g.budgets = overrides.budgets.value_or(
        std::vector<long>{100, 250, 500, 1000, 2500, 5000, 10000, 25000, 50000});
    if (overrides.k_schedule) {
        g.k_schedule = *overrides.k_schedule;
    } else {
        for (int k = 1; k <= 10; ++k) g.k_schedule.push_back(k);
        for (int k = 20; k <= 100; k += 20) g.k_schedule.push_back(k);
    }
    g.epsilons = overrides.epsilons.value_or(std::vector<double>{0.1, 0.2, 0.3, 0.4});
    g.samplers = overrides.samplers.value_or(std::vector<SamplerKind>{SamplerKind::S1});
    if (overrides.metrics) g.metrics = *overrides.metrics;
    if (overrides.replicates) g.replicates = *overrides.replicates;
    if (overrides.seed) g.seed = *overrides.seed;

    require_sorted_unique(g.budgets, "budget list");
    require_sorted_unique(g.k_schedule, "K schedule");
    require_sorted_unique(g.epsilons, "epsilon list");
    if (g.budgets.front() <= 0) fail("InvalidGrid", "budgets must be positive");
    if (g.k_schedule.front() <= 0) fail("InvalidGrid", "K values must be positive");
    for (double e : g.epsilons)
        if (e < 0.0 || e >= 1.0) fail("InvalidGrid", "epsilon must be in [0, 1)");
    if (g.samplers.empty()) fail("InvalidGrid", "no samplers selected");
    if (g.metrics.empty()) fail("InvalidGrid", "no metrics selected");
    if (g.replicates < 1) fail("InvalidGrid", "replicates must be at least 1");
    return g;
}

std::uint64_t cell_seed_key(SamplerKind sampler, long budget, int k, double epsilon) {
    Fnv64 h;
    h.add_string("cell");
    h.add_u64(static_cast<std::uint64_t>(sampler));
    h.add_i64(budget);
    h.add_i64(k);
    h.add_i64(std::llround(epsilon * 1e9)); // canonical fixed-point, not raw bits
    return h.value();
}

std::vector<SweepCell> enumerate_cells(const SweepGrid& grid, std::vector<SkippedCell>* skipped) {
    std::vector<SweepCell> cells;
    for (SamplerKind sampler : grid.samplers) {
        for (long budget : grid.budgets) {
            for (int k : grid.k_schedule) {
                const long n = budget / k;
                for (double epsilon : grid.epsilons) {
                    if (n < 1) {
                        if (skipped)
                            skipped->push_back({sampler, budget, k, epsilon, "K exceeds budget"});
                        continue;
                    }
                    SweepCell cell;
                    cell.sampler = sampler;
                    cell.budget = budget;
                    cell.n = static_cast<int>(n);
                    cell.k = k;
                    cell.epsilon = epsilon;
                    cell.cell_key = cell_seed_key(sampler, budget, k, epsilon);
                    cells.push_back(cell);
                }
            }
        }
    }
    return cells;
}

SweepResult run_sweep(const AnnotationDataset& d, const SweepGrid& grid, int parallelism,
                      const std::function<void(const CellResult&)>& on_cell,
                      const std::vector<CellResult>& completed) {
    if (parallelism < 1) parallelism = 1;

    SweepResult result;
    std::vector<SweepCell> cells = enumerate_cells(grid, &result.skipped);
    if (cells.empty()) fail("InvalidGrid", "grid has no feasible cells");

    std::map<std::uint64_t, const CellResult*> done;
    for (const CellResult& c : completed) done[c.cell.cell_key] = &c;

    std::vector<CellResult> outcomes(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex sink_mutex;
    std::exception_ptr first_error;

    auto run_cell = [&](std::size_t idx) {
        const SweepCell& cell = cells[idx];
        CellResult& outcome = outcomes[idx];
        outcome.cell = cell;

        if (auto it = done.find(cell.cell_key); it != done.end()) {
            outcome.rows = it->second->rows;
            return;
        }

        SimulationConfig cfg;
        cfg.sampler = cell.sampler;
        cfg.n_prime = cell.n;
        cfg.k_prime = cell.k;
        cfg.epsilon = cell.epsilon;
        cfg.num_samples = grid.replicates;
        cfg.metrics = grid.metrics;
        cfg.seed = grid.seed;
        cfg.seed_path = {cell.cell_key};
        cfg.p_mode = grid.p_mode;

        const auto started = std::chrono::steady_clock::now();
        PValueReport report = run_simulation(d, cfg, 1);
        const double wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
                .count();

        outcome.rows.reserve(report.per_metric.size());
        for (const MetricReport& mr : report.per_metric) {
            SweepRow row;
            row.sampler = cell.sampler;
            row.budget = cell.budget;
            row.n = cell.n;
            row.k = cell.k;
            row.epsilon = cell.epsilon;
            row.metric = mr.metric;
            row.p_value = mr.p_value;
            row.delta = mr.delta;
            row.replicates = grid.replicates;
            row.wall_time_ms = wall_ms;
            outcome.rows.push_back(row);
        }
        if (on_cell) {
            std::lock_guard<std::mutex> lock(sink_mutex);
            on_cell(outcome);
        }
    };

    auto worker = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) return;
            try {
                run_cell(idx);
            } catch (...) {
                std::lock_guard<std::mutex> lock(sink_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(parallelism));
        for (int t = 0; t < parallelism; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (CellResult& outcome : outcomes)
        for (SweepRow& row : outcome.rows) result.rows.push_back(row);
    return result;
}

std::vector<MinBudgetRow> min_budget_table(const SweepResult& r, double alpha) {
    // group keys in first-seen canonical order
    std::vector<std::tuple<SamplerKind, double, MetricId>> keys;
    std::map<std::tuple<int, long long, int>, std::size_t> key_index;
    auto key_of = [](const SweepRow& row) {
        return std::make_tuple(static_cast<int>(row.sampler), std::llround(row.epsilon * 1e9),
                               static_cast<int>(row.metric));
    };
    std::vector<std::vector<const SweepRow*>> groups;
    for (const SweepRow& row : r.rows) {
        auto k = key_of(row);
        auto it = key_index.find(k);
        if (it == key_index.end()) {
            key_index.emplace(k, groups.size());
            keys.emplace_back(row.sampler, row.epsilon, row.metric);
            groups.emplace_back();
            it = key_index.find(k);
        }
        groups[it->second].push_back(&row);
    }

    std::vector<MinBudgetRow> table;
    table.reserve(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        MinBudgetRow out;
        out.sampler = std::get<0>(keys[g]);
        out.epsilon = std::get<1>(keys[g]);
        out.metric = std::get<2>(keys[g]);

        std::set<long> budgets;
        for (const SweepRow* row : groups[g]) budgets.insert(row->budget);
        for (long budget : budgets) { // ascending scan
            const SweepRow* best = nullptr;
            for (const SweepRow* row : groups[g]) {
                if (row->budget != budget || row->p_value >= alpha) continue;
                if (!best || row->p_value < best->p_value ||
                    (row->p_value == best->p_value && row->k < best->k))
                    best = row;
            }
            if (best) {
                out.achieved = true;
                out.budget = best->budget;
                out.k = best->k;
                out.p_value = best->p_value;
                out.delta = best->delta;
                break;
            }
        }
        table.push_back(out);
    }
    return table;
}

} // namespace raterboot
