#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "raterboot/dataset.hpp"
#include "raterboot/error.hpp"
#include "raterboot/manifest.hpp"
#include "raterboot/report.hpp"
#include "raterboot/sim.hpp"
#include "raterboot/sweep.hpp"
#include "raterboot/version.hpp"

namespace fs = std::filesystem;
using namespace raterboot;

namespace {

std::string join_args(int argc, char** argv) {
    std::string cmd;
    for (int i = 0; i < argc; ++i) {
        if (i) cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

int default_parallelism() {
    if (const char* env = std::getenv("RATERBOOT_PARALLELISM")) {
        int p = std::atoi(env);
        if (p >= 1) return p;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

RunManifest base_manifest(const std::string& command) {
    RunManifest m;
    m.tool_version = kVersion;
    m.build_hash = kBuildHash;
    m.command = command;
    m.created_utc = utc_timestamp();
    return m;
}

std::vector<MetricId> parse_metric_list(const std::string& csv) {
    if (csv.empty() || csv == "all") return all_metrics();
    std::vector<MetricId> metrics;
    std::stringstream ss(csv);
    std::string name;
    while (std::getline(ss, name, ',')) metrics.push_back(metric_from_name(name));
    return metrics;
}

std::vector<SamplerKind> parse_sampler_list(const std::string& csv) {
    std::vector<SamplerKind> samplers;
    std::stringstream ss(csv);
    std::string name;
    while (std::getline(ss, name, ',')) samplers.push_back(sampler_from_name(name));
    if (samplers.empty()) fail("InvalidParams", "no sampler given");
    return samplers;
}

// --- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string input, item_col, rater_col, label_col, label_dict, out;
    int batch_size = 0;
};

void cmd_ingest(const IngestArgs& a, const std::string& command) {
    CsvSchema schema;
    schema.item_col = a.item_col;
    schema.rater_col = a.rater_col;
    schema.label_col = a.label_col;
    if (!a.label_dict.empty()) {
        std::ifstream dict_in(a.label_dict);
        if (!dict_in) fail("IoError", "cannot read " + a.label_dict);
        nlohmann::json j;
        try {
            dict_in >> j;
        } catch (const nlohmann::json::exception& e) {
            fail("IoError", a.label_dict + ": " + e.what());
        }
        std::map<std::string, std::int32_t> dict;
        for (auto it = j.begin(); it != j.end(); ++it) dict[it.key()] = it.value().get<std::int32_t>();
        schema.label_dict = std::move(dict);
    }

    std::ifstream in(a.input, std::ios::binary);
    if (!in) fail("IoError", "cannot read " + a.input);
    AnnotationDataset d = ingest_csv(in, schema);
    if (a.batch_size > 0) d = infer_batches(d, a.batch_size);
    save_dataset(d, a.out);

    RunManifest m = base_manifest(command);
    m.dataset_hash = d.content_hash();
    m.config = {{"input", a.input},       {"item_col", a.item_col}, {"rater_col", a.rater_col},
                {"label_col", a.label_col}, {"batch_size", a.batch_size}, {"out", a.out}};
    write_manifest(m, a.out + ".manifest.json");

    DatasetSummary s = d.summary();
    std::cout << "ingested " << s.n_items << " items, " << s.n_raters << " raters, " << s.n_ratings
              << " ratings" << (s.fully_crossed ? " (fully crossed)" : "") << '\n';
}

// --- synth ------------------------------------------------------------------

struct SynthArgs {
    int items = 0, raters = 0, classes = 2, batch_size = 0;
    bool crossed = false;
    double sparse = 0.0;
    double item_conc = 1.0, rater_bias = 0.0, rater_conc = 1.0;
    std::uint64_t seed = 0;
    std::string out;
};

void cmd_synth(const SynthArgs& a, const std::string& command) {
    SynthSpec spec;
    spec.n_items = a.items;
    spec.n_raters = a.raters;
    spec.domain = LabelDomain::first_n(a.classes);
    if (a.batch_size > 0)
        spec.structure = SynthStructure::batched(a.batch_size);
    else if (a.sparse > 0.0)
        spec.structure = SynthStructure::sparse(a.sparse);
    else
        spec.structure = SynthStructure::crossed();
    spec.labels.item_concentration = a.item_conc;
    spec.labels.rater_bias = a.rater_bias;
    spec.labels.rater_concentration = a.rater_conc;
    spec.seed = a.seed;

    AnnotationDataset d = synth_generate(spec);
    save_dataset(d, a.out);

    RunManifest m = base_manifest(command);
    m.dataset_hash = d.content_hash();
    m.master_seed = a.seed;
    m.config = {{"items", a.items},         {"raters", a.raters},     {"classes", a.classes},
                {"batch_size", a.batch_size}, {"sparse", a.sparse},     {"item_conc", a.item_conc},
                {"rater_bias", a.rater_bias}, {"rater_conc", a.rater_conc}, {"seed", a.seed},
                {"out", a.out}};
    write_manifest(m, a.out + ".manifest.json");

    std::cout << "wrote " << a.out << " (" << d.n_ratings() << " ratings)\n";
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::string dataset, sampler = "s1", metrics = "all", out;
    int n = 0, k = 0, replicates = 1000, parallelism = 0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    bool paired = false;
};

void cmd_simulate(const SimulateArgs& a, const std::string& command) {
    AnnotationDataset d = load_dataset(a.dataset);

    SimulationConfig cfg;
    cfg.sampler = sampler_from_name(a.sampler);
    cfg.n_prime = a.n;
    cfg.k_prime = a.k;
    cfg.epsilon = a.epsilon;
    cfg.num_samples = a.replicates;
    cfg.metrics = parse_metric_list(a.metrics);
    cfg.seed = a.seed;
    cfg.p_mode = a.paired ? PValueMode::Paired : PValueMode::Pairwise;

    const int parallelism = a.parallelism > 0 ? a.parallelism : default_parallelism();
    PValueReport report = run_simulation(d, cfg, parallelism);

    std::ofstream out(a.out, std::ios::binary);
    if (!out) fail("IoError", "cannot write " + a.out);
    out << report_to_json(report) << '\n';

    RunManifest m = base_manifest(command);
    m.dataset_hash = d.content_hash();
    m.master_seed = a.seed;
    m.config = {{"dataset", a.dataset},   {"sampler", a.sampler},       {"n", a.n},
                {"k", a.k},               {"epsilon", a.epsilon},       {"replicates", a.replicates},
                {"seed", a.seed},         {"metrics", a.metrics},
                {"paired", a.paired},     {"out", a.out}};
    write_manifest(m, a.out + ".manifest.json");

    for (const MetricReport& mr : report.per_metric)
        std::cout << metric_name(mr.metric) << ": p=" << mr.p_value << " delta=" << mr.delta << '\n';
}

// --- sweep --------------------------------------------------------------------

struct SweepArgs {
    std::string dataset, samplers = "s1", metrics = "all", out_dir, resume;
    std::vector<long> budgets;
    std::vector<int> ks;
    std::vector<double> epsilons;
    int replicates = 1000, parallelism = 0;
    std::uint64_t seed = 0;
};

void cmd_sweep(const SweepArgs& a, const std::string& command) {
    AnnotationDataset d = load_dataset(a.dataset);

    SweepGrid grid;
    std::vector<CellResult> completed;
    if (!a.resume.empty()) {
        RunManifest prev = read_manifest(a.resume);
        if (prev.dataset_hash != d.content_hash())
            fail("InvalidParams", "dataset does not match the resume manifest");
        grid = grid_from_json(prev.config.at("grid"));
        const fs::path prev_dir = fs::path(a.resume).parent_path();
        completed = read_partial_cells((prev_dir / "cells.partial.jsonl").string(), grid);
    } else {
        GridOverrides o;
        if (!a.budgets.empty()) o.budgets = a.budgets;
        if (!a.ks.empty()) o.k_schedule = a.ks;
        if (!a.epsilons.empty()) o.epsilons = a.epsilons;
        o.samplers = parse_sampler_list(a.samplers);
        o.metrics = parse_metric_list(a.metrics);
        o.replicates = a.replicates;
        o.seed = a.seed;
        grid = build_grid(o);
    }

    fs::create_directories(a.out_dir);
    const std::string partial_path = a.out_dir + "/cells.partial.jsonl";

    // manifest first so an interrupted run is already resumable
    RunManifest m = base_manifest(command);
    m.dataset_hash = d.content_hash();
    m.master_seed = grid.seed;
    m.config = {{"dataset", a.dataset}, {"grid", grid_to_json(grid)}};
    {
        std::vector<SkippedCell> skipped;
        nlohmann::json cells = nlohmann::json::array();
        for (const SweepCell& c : enumerate_cells(grid, &skipped))
            cells.push_back({{"sampler", sampler_name(c.sampler)},
                             {"budget", c.budget},
                             {"n", c.n},
                             {"k", c.k},
                             {"epsilon", c.epsilon},
                             {"seed_path", {c.cell_key}},
                             {"status", "feasible"}});
        for (const SkippedCell& c : skipped)
            cells.push_back({{"sampler", sampler_name(c.sampler)},
                             {"budget", c.budget},
                             {"k", c.k},
                             {"epsilon", c.epsilon},
                             {"status", "skipped"},
                             {"reason", c.reason}});
        m.cells = std::move(cells);
    }
    write_manifest(m, a.out_dir + "/manifest.json");

    const int parallelism = a.parallelism > 0 ? a.parallelism : default_parallelism();
    std::size_t done = completed.size();
    auto on_cell = [&](const CellResult& cell) {
        append_partial_cell(partial_path, cell);
        ++done;
        std::cerr << "cell " << done << " (" << sampler_name(cell.cell.sampler) << " budget "
                  << cell.cell.budget << " K " << cell.cell.k << " eps " << cell.cell.epsilon
                  << ") " << cell.rows.front().wall_time_ms << " ms\n";
    };

    SweepResult result = run_sweep(d, grid, parallelism, on_cell, completed);
    write_tables(result, a.out_dir);
    std::cout << "wrote " << a.out_dir << "/sweep.csv (" << result.rows.size() << " rows, "
              << result.skipped.size() << " infeasible cells skipped)\n";
}

// --- report ---------------------------------------------------------------------

struct ReportArgs {
    std::string in_dir, select, kind = "pvalue", out;
};

void cmd_report(const ReportArgs& a, const std::string& command) {
    std::ifstream in(a.in_dir + "/sweep.csv", std::ios::binary);
    if (!in) fail("IoError", "cannot read " + a.in_dir + "/sweep.csv");
    SweepResult result = parse_sweep_csv(in);

    PlotSelector selector;
    bool have_sampler = false, have_epsilon = false, have_metric = false;
    std::stringstream ss(a.select);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) fail("InvalidParams", "bad selector term '" + part + "'");
        const std::string key = part.substr(0, eq), value = part.substr(eq + 1);
        if (key == "sampler") {
            selector.sampler = sampler_from_name(value);
            have_sampler = true;
        } else if (key == "epsilon") {
            selector.epsilon = std::atof(value.c_str());
            have_epsilon = true;
        } else if (key == "metric") {
            selector.metric = metric_from_name(value);
            have_metric = true;
        } else {
            fail("InvalidParams", "unknown selector key '" + key + "'");
        }
    }
    if (!have_sampler || !have_epsilon || !have_metric)
        fail("InvalidParams", "--select needs sampler=, epsilon= and metric=");

    PlotKind kind;
    if (a.kind == "pvalue")
        kind = PlotKind::PValue;
    else if (a.kind == "delta")
        kind = PlotKind::Delta;
    else
        fail("InvalidParams", "--kind must be pvalue or delta");

    emit_plot(result, selector, kind, a.out);

    RunManifest m = base_manifest(command);
    m.config = {{"in", a.in_dir}, {"select", a.select}, {"kind", a.kind}, {"out", a.out}};
    write_manifest(m, a.out + ".manifest.json");
    std::cout << "wrote " << a.out << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-level bootstrap power analysis for multi-rater annotation datasets"};
    app.set_version_flag("--version", std::string(kVersion) + "+" + kBuildHash);
    // config file keys live under a [subcommand] section; flags win over file values
    app.set_config("--config", "", "read options from a key=value config file");
    app.fallthrough();
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "load a long-form CSV into a dataset file");
    ingest_cmd->add_option("--input", ingest.input, "CSV file")->required();
    ingest_cmd->add_option("--item-col", ingest.item_col)->required();
    ingest_cmd->add_option("--rater-col", ingest.rater_col)->required();
    ingest_cmd->add_option("--label-col", ingest.label_col)->required();
    ingest_cmd->add_option("--label-dict", ingest.label_dict, "JSON {label: code} mapping");
    ingest_cmd->add_option("--batch-size", ingest.batch_size, "infer equal-size batches");
    ingest_cmd->add_option("--out", ingest.out, "output .rbds file")->required();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("--items", synth.items)->required();
    synth_cmd->add_option("--raters", synth.raters)->required();
    synth_cmd->add_option("--classes", synth.classes, "label count (default 2)");
    auto* crossed_flag = synth_cmd->add_flag("--crossed", synth.crossed, "fully-crossed structure");
    auto* batched_opt = synth_cmd->add_option("--batch-size", synth.batch_size, "batched structure");
    auto* sparse_opt = synth_cmd->add_option("--sparse", synth.sparse, "sparse structure, density in (0,1]");
    crossed_flag->excludes(batched_opt)->excludes(sparse_opt);
    batched_opt->excludes(sparse_opt);
    synth_cmd->add_option("--item-conc", synth.item_conc, "Dirichlet concentration of item weights");
    synth_cmd->add_option("--rater-bias", synth.rater_bias, "per-rater preference mixing weight");
    synth_cmd->add_option("--rater-conc", synth.rater_conc, "Dirichlet concentration of rater preferences");
    synth_cmd->add_option("--seed", synth.seed)->required();
    synth_cmd->add_option("--out", synth.out)->required();

    SimulateArgs simulate;
    auto* sim_cmd = app.add_subcommand("simulate", "run one bootstrap hypothesis test");
    sim_cmd->add_option("--dataset", simulate.dataset)->required();
    sim_cmd->add_option("--sampler", simulate.sampler, "s1|s2|s3")->required();
    sim_cmd->add_option("--n", simulate.n, "items per resample (N')")->required();
    sim_cmd->add_option("--k", simulate.k, "responses per item (K')")->required();
    sim_cmd->add_option("--epsilon", simulate.epsilon)->required();
    sim_cmd->add_option("--replicates", simulate.replicates);
    sim_cmd->add_option("--seed", simulate.seed)->required();
    sim_cmd->add_option("--metrics", simulate.metrics, "comma list or 'all'");
    sim_cmd->add_flag("--paired", simulate.paired, "paired p-value estimator");
    sim_cmd->add_option("--parallelism", simulate.parallelism);
    sim_cmd->add_option("--out", simulate.out, "output JSON")->required();

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a (budget, K, epsilon) grid");
    sweep_cmd->add_option("--dataset", sweep.dataset)->required();
    sweep_cmd->add_option("--sampler", sweep.samplers, "comma list of s1|s2|s3");
    sweep_cmd->add_option("--budgets", sweep.budgets)->delimiter(',');
    sweep_cmd->add_option("--ks", sweep.ks)->delimiter(',');
    sweep_cmd->add_option("--epsilons", sweep.epsilons)->delimiter(',');
    sweep_cmd->add_option("--metrics", sweep.metrics, "comma list or 'all'");
    sweep_cmd->add_option("--replicates", sweep.replicates);
    sweep_cmd->add_option("--seed", sweep.seed);
    sweep_cmd->add_option("--out-dir", sweep.out_dir)->required();
    sweep_cmd->add_option("--parallelism", sweep.parallelism);
    sweep_cmd->add_option("--resume", sweep.resume, "manifest.json of an interrupted run");

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "render an SVG plot from sweep output");
    report_cmd->add_option("--in", report.in_dir, "sweep output directory")->required();
    report_cmd->add_option("--select", report.select, "sampler=..,epsilon=..,metric=..")->required();
    report_cmd->add_option("--kind", report.kind, "pvalue|delta");
    report_cmd->add_option("--out", report.out, "output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message and usage hint
        return 2;
    }

    const std::string command = join_args(argc, argv);
    try {
        if (*ingest_cmd) cmd_ingest(ingest, command);
        if (*synth_cmd) cmd_synth(synth, command);
        if (*sim_cmd) cmd_simulate(simulate, command);
        if (*sweep_cmd) cmd_sweep(sweep, command);
        if (*report_cmd) cmd_report(report, command);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
