#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "raterboot/error.hpp"
#include "raterboot/report.hpp"
#include "test_util.hpp"

using namespace raterboot;

namespace {

SweepResult sample_result() {
    SweepResult r;
    int i = 0;
    for (long budget : {100L, 250L, 500L, 1000L}) {
        for (int k : {1, 5, 10}) {
            SweepRow row;
            row.sampler = SamplerKind::S2;
            row.budget = budget;
            row.n = static_cast<int>(budget / k);
            row.k = k;
            row.epsilon = 0.3;
            row.metric = MetricId::Accuracy;
            row.p_value = 0.31830988618379067 / (1 + i); // irrational-ish digits
            row.delta = 0.14159265358979312 * (1 + i);
            row.replicates = 200;
            row.wall_time_ms = 12.5 + i;
            r.rows.push_back(row);
            ++i;
        }
    }
    return r;
}

} // namespace

TEST_CASE("sweep csv round-trips exactly") {
    SweepResult r = sample_result();
    const std::string csv = sweep_csv(r);
    std::istringstream in(csv);
    SweepResult parsed = parse_sweep_csv(in);

    REQUIRE(parsed.rows.size() == r.rows.size());
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(parsed.rows[i].sampler == r.rows[i].sampler);
        CHECK(parsed.rows[i].budget == r.rows[i].budget);
        CHECK(parsed.rows[i].n == r.rows[i].n);
        CHECK(parsed.rows[i].k == r.rows[i].k);
        CHECK(parsed.rows[i].epsilon == r.rows[i].epsilon); // bit-exact via 17 digits
        CHECK(parsed.rows[i].metric == r.rows[i].metric);
        CHECK(parsed.rows[i].p_value == r.rows[i].p_value);
        CHECK(parsed.rows[i].delta == r.rows[i].delta);
        CHECK(parsed.rows[i].replicates == r.rows[i].replicates);
    }
    // serializing the parsed result reproduces the same csv (wall time is
    // fixed-point so it survives too)
    CHECK(sweep_csv(parsed) == csv);
}

TEST_CASE("empty result yields a header-only csv") {
    SweepResult r;
    CHECK(sweep_csv(r) ==
          "sampler,budget,n,k,epsilon,metric,p_value,delta,replicates,wall_time_ms\n");
}

TEST_CASE("min_budget markdown renders achieved cells and dashes") {
    SweepResult r;
    auto add = [&](MetricId metric, double p) {
        SweepRow row;
        row.sampler = SamplerKind::S1;
        row.budget = 5000;
        row.n = 125;
        row.k = 40;
        row.epsilon = 0.3;
        row.metric = metric;
        row.p_value = p;
        row.delta = 0.154;
        row.replicates = 1000;
        r.rows.push_back(row);
    };
    add(MetricId::Accuracy, 0.045);
    add(MetricId::Precision, 0.5); // never significant

    const std::string md = min_budget_markdown(r, 0.05);
    CHECK(md.find("| NK | 5000 | - |") != std::string::npos);
    CHECK(md.find("| p-value | 0.045 | - |") != std::string::npos);
    CHECK(md.find("| K | 40 | - |") != std::string::npos);
    CHECK(md.find("| delta | 0.154 | - |") != std::string::npos);
}

TEST_CASE("svg output is deterministic and complete") {
    SweepResult r = sample_result();
    PlotSelector sel{SamplerKind::S2, 0.3, MetricId::Accuracy};

    const std::string svg1 = render_plot_svg(r, sel, PlotKind::PValue);
    const std::string svg2 = render_plot_svg(r, sel, PlotKind::PValue);
    CHECK(svg1 == svg2);

    CHECK(svg1.find("<svg") == 0);
    CHECK(svg1.find("viewBox=\"0 0 800 600\"") != std::string::npos);
    CHECK(svg1.find("p=0.05") != std::string::npos); // reference line
    for (const char* legend : {"K=1", "K=5", "K=10"})
        CHECK(svg1.find(legend) != std::string::npos);
    CHECK(svg1.find("1000") != std::string::npos); // budget tick

    // one polyline per K
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg1.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        ++pos;
    }
    CHECK(polylines == 3);

    const std::string delta_svg = render_plot_svg(r, sel, PlotKind::Delta);
    CHECK(delta_svg.find("p=0.05") == std::string::npos);

    PlotSelector wrong{SamplerKind::S3, 0.3, MetricId::Accuracy};
    CHECK_THROWS_AS(render_plot_svg(r, wrong, PlotKind::PValue), Error);
}

TEST_CASE("default 15-K grid renders 15 curves with the full legend") {
    SweepResult r;
    for (int k : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 40, 60, 80, 100}) {
        for (long budget : {1000L, 5000L, 25000L}) {
            SweepRow row;
            row.sampler = SamplerKind::S1;
            row.budget = budget;
            row.n = static_cast<int>(budget / k);
            row.k = k;
            row.epsilon = 0.3;
            row.metric = MetricId::F1;
            row.p_value = 1.0 / (1.0 + k);
            row.delta = 0.01 * k;
            row.replicates = 100;
            r.rows.push_back(row);
        }
    }
    const std::string svg = render_plot_svg(r, {SamplerKind::S1, 0.3, MetricId::F1}, PlotKind::PValue);
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        ++pos;
    }
    CHECK(polylines == 15);
    for (int k : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 20, 40, 60, 80, 100})
        CHECK(svg.find(">K=" + std::to_string(k) + "<") != std::string::npos);
}

TEST_CASE("single-K selection renders one curve with the reference line") {
    SweepResult r;
    SweepRow row;
    row.sampler = SamplerKind::S1;
    row.budget = 100;
    row.n = 50;
    row.k = 2;
    row.epsilon = 0.1;
    row.metric = MetricId::JSD;
    row.p_value = 0.2;
    row.delta = 0.05;
    row.replicates = 10;
    r.rows.push_back(row);
    row.budget = 500;
    row.n = 250;
    r.rows.push_back(row);

    const std::string svg = render_plot_svg(r, {SamplerKind::S1, 0.1, MetricId::JSD}, PlotKind::PValue);
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        ++pos;
    }
    CHECK(polylines == 1);
    CHECK(svg.find("p=0.05") != std::string::npos);
}
