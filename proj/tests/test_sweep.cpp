#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "raterboot/error.hpp"
#include "raterboot/report.hpp"
#include "raterboot/sweep.hpp"
#include "test_util.hpp"

using namespace raterboot;

namespace {

AnnotationDataset small_set() {
    SynthSpec spec;
    spec.n_items = 20;
    spec.n_raters = 6;
    spec.seed = 100;
    return synth_generate(spec);
}

SweepGrid desk_grid() {
    GridOverrides o;
    o.budgets = std::vector<long>{20, 40};
    o.k_schedule = std::vector<int>{2, 4};
    o.epsilons = std::vector<double>{0.2, 0.3};
    o.samplers = std::vector<SamplerKind>{SamplerKind::S2};
    o.replicates = 30;
    o.seed = std::uint64_t{9};
    return build_grid(o);
}

std::string csv_without_wall_time(const SweepResult& r) {
    SweepResult copy = r;
    for (SweepRow& row : copy.rows) row.wall_time_ms = 0.0;
    return sweep_csv(copy);
}

} // namespace

TEST_CASE("default grid matches the documented schedule") {
    SweepGrid g = build_grid();
    CHECK(g.budgets == std::vector<long>{100, 250, 500, 1000, 2500, 5000, 10000, 25000, 50000});
    CHECK(g.k_schedule == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 40, 60, 80, 100});
    CHECK(g.epsilons == std::vector<double>{0.1, 0.2, 0.3, 0.4});
    CHECK(g.replicates == 1000);
    CHECK(g.budgets.size() == 9);
    CHECK(g.k_schedule.size() == 15);
    CHECK(g.epsilons.size() == 4);
}

TEST_CASE("grid feasibility: N = floor(budget / K) must be at least 1") {
    GridOverrides o;
    o.budgets = std::vector<long>{100};
    o.k_schedule = std::vector<int>{100, 200};
    o.epsilons = std::vector<double>{0.3};
    SweepGrid g = build_grid(o);

    std::vector<SkippedCell> skipped;
    std::vector<SweepCell> cells = enumerate_cells(g, &skipped);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].k == 100);
    CHECK(cells[0].n == 1); // floor(100/100)
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0].k == 200);
}

TEST_CASE("build_grid rejects bad overrides") {
    GridOverrides o;
    o.epsilons = std::vector<double>{1.5};
    CHECK_THROWS_AS(build_grid(o), Error);
    GridOverrides o2;
    o2.replicates = 0;
    CHECK_THROWS_AS(build_grid(o2), Error);
}

TEST_CASE("cell seeds depend on coordinates, not enumeration order") {
    const std::uint64_t key = cell_seed_key(SamplerKind::S2, 1000, 10, 0.3);
    CHECK(key == cell_seed_key(SamplerKind::S2, 1000, 10, 0.3));
    std::set<std::uint64_t> keys{key};
    keys.insert(cell_seed_key(SamplerKind::S1, 1000, 10, 0.3));
    keys.insert(cell_seed_key(SamplerKind::S2, 2500, 10, 0.3));
    keys.insert(cell_seed_key(SamplerKind::S2, 1000, 20, 0.3));
    keys.insert(cell_seed_key(SamplerKind::S2, 1000, 10, 0.4));
    CHECK(keys.size() == 5);
}

TEST_CASE("a one-cell sweep equals a direct simulation") {
    AnnotationDataset d = small_set();
    GridOverrides o;
    o.budgets = std::vector<long>{40};
    o.k_schedule = std::vector<int>{4};
    o.epsilons = std::vector<double>{0.3};
    o.samplers = std::vector<SamplerKind>{SamplerKind::S2};
    o.replicates = 50;
    o.seed = std::uint64_t{3};
    SweepGrid g = build_grid(o);

    SweepResult r = run_sweep(d, g, 1);
    REQUIRE(r.rows.size() == all_metrics().size());

    SimulationConfig cfg;
    cfg.sampler = SamplerKind::S2;
    cfg.n_prime = 10;
    cfg.k_prime = 4;
    cfg.epsilon = 0.3;
    cfg.num_samples = 50;
    cfg.seed = 3;
    cfg.seed_path = {cell_seed_key(SamplerKind::S2, 40, 4, 0.3)};
    PValueReport direct = run_simulation(d, cfg, 1);

    for (std::size_t m = 0; m < r.rows.size(); ++m) {
        CHECK(r.rows[m].metric == direct.per_metric[m].metric);
        CHECK(r.rows[m].p_value == direct.per_metric[m].p_value);
        CHECK(r.rows[m].delta == direct.per_metric[m].delta);
        CHECK(r.rows[m].n == 10);
    }
}

TEST_CASE("sweep rows are identical at parallelism 1 and 8") {
    AnnotationDataset d = small_set();
    SweepGrid g = desk_grid();
    SweepResult serial = run_sweep(d, g, 1);
    SweepResult parallel = run_sweep(d, g, 8);
    CHECK(csv_without_wall_time(serial) == csv_without_wall_time(parallel));
    CHECK(serial.rows.size() == 2 * 2 * 2 * all_metrics().size());
}

TEST_CASE("resuming with completed cells reproduces the uninterrupted result") {
    AnnotationDataset d = small_set();
    SweepGrid g = desk_grid();

    std::vector<CellResult> all_cells;
    SweepResult full = run_sweep(d, g, 1, [&](const CellResult& c) { all_cells.push_back(c); });
    REQUIRE(all_cells.size() == 8);

    // pretend the run died after three cells
    std::vector<CellResult> done(all_cells.begin(), all_cells.begin() + 3);
    SweepResult resumed = run_sweep(d, g, 2, nullptr, done);
    CHECK(csv_without_wall_time(full) == csv_without_wall_time(resumed));
}

TEST_CASE("min_budget_table scans budgets in ascending order") {
    SweepResult r;
    auto add = [&](long budget, int k, double p) {
        SweepRow row;
        row.sampler = SamplerKind::S2;
        row.budget = budget;
        row.n = static_cast<int>(budget / k);
        row.k = k;
        row.epsilon = 0.3;
        row.metric = MetricId::Accuracy;
        row.p_value = p;
        row.delta = 0.1;
        row.replicates = 100;
        r.rows.push_back(row);
    };
    add(500, 5, 0.2);
    add(500, 10, 0.8);
    add(1000, 5, 0.04);
    add(1000, 10, 0.01);

    std::vector<MinBudgetRow> table = min_budget_table(r, 0.05);
    REQUIRE(table.size() == 1);
    CHECK(table[0].achieved);
    CHECK(table[0].budget == 1000);
    CHECK(table[0].k == 10); // argmin p at the first significant budget
    CHECK(table[0].p_value == 0.01);

    // ties on p prefer the smaller K
    add(1000, 2, 0.01);
    table = min_budget_table(r, 0.05);
    CHECK(table[0].k == 2);

    // never significant -> not achieved
    std::vector<MinBudgetRow> none = min_budget_table(r, 0.001);
    CHECK_FALSE(none[0].achieved);
}

TEST_CASE("row count equals feasible cells times metrics, no duplicates") {
    AnnotationDataset d = small_set();
    SweepGrid g = desk_grid();
    SweepResult r = run_sweep(d, g, 4);

    std::set<std::tuple<int, long, int, long long, int>> seen;
    for (const SweepRow& row : r.rows)
        seen.insert({static_cast<int>(row.sampler), row.budget, row.k,
                     std::llround(row.epsilon * 1e9), static_cast<int>(row.metric)});
    CHECK(seen.size() == r.rows.size());
}
