#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "raterboot/sweep.hpp"

namespace raterboot {

// One row per feasible cell x metric; floating values use 17 significant
// digits so that parsing reproduces them bit-exactly.
std::string sweep_csv(const SweepResult& r);
SweepResult parse_sweep_csv(std::istream& in);

// Markdown tables (one per sampler x epsilon) mirroring the minimum-budget
// summary; never-significant metrics render "-".
std::string min_budget_markdown(const SweepResult& r, double alpha);

// Writes sweep.csv and min_budget.md into dir. Throws IoError.
void write_tables(const SweepResult& r, const std::string& dir, double alpha = 0.05);

struct PlotSelector {
    SamplerKind sampler = SamplerKind::S1;
    double epsilon = 0.0;
    MetricId metric = MetricId::Accuracy;
};

enum class PlotKind { PValue, Delta };

// One curve per K over log-scaled budgets; p-value plots carry a reference
// line at 0.05. Output bytes are a pure function of the rows.
std::string render_plot_svg(const SweepResult& r, const PlotSelector& selector, PlotKind kind);

void emit_plot(const SweepResult& r, const PlotSelector& selector, PlotKind kind,
               const std::string& out_path);

} // namespace raterboot
