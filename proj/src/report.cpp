#include "raterboot/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "raterboot/error.hpp"

namespace raterboot {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

double parse_double(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        fail("IoError", "sweep.csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

constexpr const char* kCsvHeader =
    "sampler,budget,n,k,epsilon,metric,p_value,delta,replicates,wall_time_ms";

} // namespace

std::string sweep_csv(const SweepResult& r) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const SweepRow& row : r.rows) {
        out += sampler_name(row.sampler);
        out += ',';
        out += std::to_string(row.budget);
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += std::to_string(row.k);
        out += ',';
        out += fmt_double(row.epsilon);
        out += ',';
        out += metric_name(row.metric);
        out += ',';
        out += fmt_double(row.p_value);
        out += ',';
        out += fmt_double(row.delta);
        out += ',';
        out += std::to_string(row.replicates);
        out += ',';
        out += fmt_fixed(row.wall_time_ms, 3);
        out += '\n';
    }
    return out;
}

SweepResult parse_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) fail("IoError", "empty sweep.csv");
    if (split_fields(line) != split_fields(kCsvHeader))
        fail("IoError", "unexpected sweep.csv header: " + line);

    SweepResult r;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 10)
            fail("IoError", "sweep.csv line " + std::to_string(line_no) + ": expected 10 fields");
        SweepRow row;
        row.sampler = sampler_from_name(f[0]);
        row.budget = std::atol(f[1].c_str());
        row.n = std::atoi(f[2].c_str());
        row.k = std::atoi(f[3].c_str());
        row.epsilon = parse_double(f[4], line_no);
        row.metric = metric_from_name(f[5]);
        row.p_value = parse_double(f[6], line_no);
        row.delta = parse_double(f[7], line_no);
        row.replicates = std::atoi(f[8].c_str());
        row.wall_time_ms = parse_double(f[9], line_no);
        r.rows.push_back(row);
    }
    return r;
}

std::string min_budget_markdown(const SweepResult& r, double alpha) {
    const std::vector<MinBudgetRow> table = min_budget_table(r, alpha);

    // stable (sampler, epsilon) group order
    std::vector<std::pair<SamplerKind, double>> groups;
    for (const MinBudgetRow& row : table) {
        std::pair<SamplerKind, double> g{row.sampler, row.epsilon};
        if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    }

    std::ostringstream md;
    md << "# Minimum budget for significance (alpha = " << fmt_fixed(alpha, 3) << ")\n";
    for (const auto& [sampler, epsilon] : groups) {
        std::vector<const MinBudgetRow*> rows;
        for (const MinBudgetRow& row : table)
            if (row.sampler == sampler && row.epsilon == epsilon) rows.push_back(&row);

        md << "\n## " << sampler_name(sampler) << ", epsilon = " << fmt_fixed(epsilon, 2) << "\n\n";
        md << "| Stat |";
        for (const MinBudgetRow* row : rows) md << ' ' << metric_name(row->metric) << " |";
        md << "\n|---|";
        for (std::size_t i = 0; i < rows.size(); ++i) md << "---|";
        md << "\n| NK |";
        for (const MinBudgetRow* row : rows)
            md << ' ' << (row->achieved ? std::to_string(row->budget) : std::string("-")) << " |";
        md << "\n| p-value |";
        for (const MinBudgetRow* row : rows)
            md << ' ' << (row->achieved ? fmt_fixed(row->p_value, 3) : std::string("-")) << " |";
        md << "\n| K |";
        for (const MinBudgetRow* row : rows)
            md << ' ' << (row->achieved ? std::to_string(row->k) : std::string("-")) << " |";
        md << "\n| delta |";
        for (const MinBudgetRow* row : rows)
            md << ' ' << (row->achieved ? fmt_fixed(row->delta, 3) : std::string("-")) << " |";
        md << "\n";
    }
    return md.str();
}

void write_tables(const SweepResult& r, const std::string& dir, double alpha) {
    {
        std::ofstream out(dir + "/sweep.csv", std::ios::binary);
        if (!out) fail("IoError", "cannot write " + dir + "/sweep.csv");
        out << sweep_csv(r);
    }
    {
        std::ofstream out(dir + "/min_budget.md", std::ios::binary);
        if (!out) fail("IoError", "cannot write " + dir + "/min_budget.md");
        out << min_budget_markdown(r, alpha);
    }
}

// ---------------------------------------------------------------------------
// SVG plots
// ---------------------------------------------------------------------------

namespace {

// color cycle keyed by K rank
constexpr const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173",
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 70, kRight = 640, kTop = 50, kBottom = 550;

std::string svg_coord(double v) { return fmt_fixed(v, 2); }

} // namespace

std::string render_plot_svg(const SweepResult& r, const PlotSelector& selector, PlotKind kind) {
    // series key: K -> budget -> value
    std::map<int, std::map<long, double>> series;
    for (const SweepRow& row : r.rows) {
        if (row.sampler != selector.sampler || row.metric != selector.metric) continue;
        if (std::llround(row.epsilon * 1e9) != std::llround(selector.epsilon * 1e9)) continue;
        series[row.k][row.budget] = kind == PlotKind::PValue ? row.p_value : row.delta;
    }
    if (series.empty()) fail("NoMatchingRows", "selector matches no sweep rows");

    std::set<long> budget_set;
    double y_max = 0.0;
    for (const auto& [k, points] : series) {
        for (const auto& [budget, value] : points) {
            budget_set.insert(budget);
            y_max = std::max(y_max, value);
        }
    }
    std::vector<long> budgets(budget_set.begin(), budget_set.end());

    const double x_lo = std::log10(static_cast<double>(budgets.front()));
    const double x_hi = std::log10(static_cast<double>(budgets.back()));
    const double x_span = x_hi > x_lo ? x_hi - x_lo : 1.0;
    auto x_of = [&](long budget) {
        return kLeft + (std::log10(static_cast<double>(budget)) - x_lo) / x_span * (kRight - kLeft);
    };

    double y_top_value = 1.0;
    if (kind == PlotKind::Delta) y_top_value = y_max > 0.0 ? y_max * 1.05 : 1.0;
    auto y_of = [&](double v) { return kBottom - v / y_top_value * (kBottom - kTop); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
        << "\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    const char* kind_name = kind == PlotKind::PValue ? "p-value" : "delta";
    svg << "<text x=\"" << svg_coord((kLeft + kRight) / 2) << "\" y=\"28\" font-size=\"16\" "
        << "text-anchor=\"middle\" font-family=\"sans-serif\">" << kind_name << " vs budget ("
        << sampler_name(selector.sampler) << ", epsilon=" << fmt_fixed(selector.epsilon, 2) << ", "
        << metric_name(selector.metric) << ")</text>\n";

    // axes
    svg << "<line x1=\"" << svg_coord(kLeft) << "\" y1=\"" << svg_coord(kBottom) << "\" x2=\""
        << svg_coord(kRight) << "\" y2=\"" << svg_coord(kBottom)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << svg_coord(kLeft) << "\" y1=\"" << svg_coord(kTop) << "\" x2=\""
        << svg_coord(kLeft) << "\" y2=\"" << svg_coord(kBottom)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (long budget : budgets) {
        const double x = x_of(budget);
        svg << "<line x1=\"" << svg_coord(x) << "\" y1=\"" << svg_coord(kBottom) << "\" x2=\""
            << svg_coord(x) << "\" y2=\"" << svg_coord(kBottom + 5)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << svg_coord(x) << "\" y=\"" << svg_coord(kBottom + 20)
            << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">" << budget
            << "</text>\n";
    }
    for (int t = 0; t <= 5; ++t) {
        const double v = y_top_value * t / 5.0;
        const double y = y_of(v);
        svg << "<line x1=\"" << svg_coord(kLeft - 5) << "\" y1=\"" << svg_coord(y) << "\" x2=\""
            << svg_coord(kLeft) << "\" y2=\"" << svg_coord(y)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << svg_coord(kLeft - 10) << "\" y=\"" << svg_coord(y + 4)
            << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
            << fmt_fixed(v, 2) << "</text>\n";
    }
    svg << "<text x=\"" << svg_coord((kLeft + kRight) / 2) << "\" y=\"" << svg_coord(kBottom + 40)
        << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">budget (N x K, log scale)</text>\n";

    if (kind == PlotKind::PValue) {
        const double y = y_of(0.05);
        svg << "<line x1=\"" << svg_coord(kLeft) << "\" y1=\"" << svg_coord(y) << "\" x2=\""
            << svg_coord(kRight) << "\" y2=\"" << svg_coord(y)
            << "\" stroke=\"red\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
        svg << "<text x=\"" << svg_coord(kRight - 4) << "\" y=\"" << svg_coord(y - 6)
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"red\" "
               "font-family=\"sans-serif\">p=0.05</text>\n";
    }

    std::size_t color = 0;
    double legend_y = kTop + 10;
    for (const auto& [k, points] : series) {
        const char* stroke = kPalette[color % kPaletteSize];
        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& [budget, value] : points) {
            if (!first) svg << ' ';
            first = false;
            svg << svg_coord(x_of(budget)) << ',' << svg_coord(y_of(std::min(value, y_top_value)));
        }
        svg << "\"/>\n";

        svg << "<line x1=\"" << svg_coord(kRight + 14) << "\" y1=\"" << svg_coord(legend_y)
            << "\" x2=\"" << svg_coord(kRight + 34) << "\" y2=\"" << svg_coord(legend_y)
            << "\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"/>\n";
        svg << "<text x=\"" << svg_coord(kRight + 40) << "\" y=\"" << svg_coord(legend_y + 4)
            << "\" font-size=\"11\" font-family=\"sans-serif\">K=" << k << "</text>\n";
        legend_y += 18;
        ++color;
    }

    svg << "</svg>\n";
    return svg.str();
}

void emit_plot(const SweepResult& r, const PlotSelector& selector, PlotKind kind,
               const std::string& out_path) {
    const std::string svg = render_plot_svg(r, selector, kind);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) fail("IoError", "cannot write " + out_path);
    out << svg;
    if (!out) fail("IoError", "write failed for " + out_path);
}

} // namespace raterboot
