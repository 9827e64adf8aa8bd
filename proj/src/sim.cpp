#include "raterboot/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "raterboot/error.hpp"

namespace raterboot {

namespace {

// stream roles within one replicate
constexpr std::uint64_t kRoleG = 0;
constexpr std::uint64_t kRoleA = 1;
constexpr std::uint64_t kRoleB = 2;
constexpr std::uint64_t kRoleNullMix = 3;

// hypothesis branch under the master stream
constexpr std::uint64_t kHypAlt = 0;
constexpr std::uint64_t kHypNull = 1;

SeedSpec replicate_seed(const SimulationConfig& cfg, std::uint64_t hypothesis, int replicate) {
    SeedSpec s{cfg.seed, cfg.seed_path};
    return s.child(hypothesis).child(static_cast<std::uint64_t>(replicate));
}

struct Models {
    ResampledDataset g, a, b;
};

Models build_models(const AnnotationDataset& d, const SimulationConfig& cfg, const SeedSpec& rep) {
    Models m;
    m.g = sample(d, cfg.sampler, cfg.n_prime, cfg.k_prime, rep.child(kRoleG));
    m.a = resample_raters_like(m.g, d, cfg.sampler, rep.child(kRoleA));
    m.b = resample_raters_like(m.g, d, cfg.sampler, rep.child(kRoleB).child(0));
    m.b = perturb(m.b, cfg.epsilon, d.domain(), rep.child(kRoleB).child(1));
    return m;
}

TrialScores score_models(const Models& m, const SimulationConfig& cfg, const LabelDomain& domain) {
    ModelAggregates agg_g = aggregate(m.g, domain);
    ModelAggregates agg_a = aggregate(m.a, domain);
    ModelAggregates agg_b = aggregate(m.b, domain);
    return gamma_scores(cfg.metrics, agg_a, agg_b, agg_g, domain);
}

void validate(const SimulationConfig& cfg) {
    if (cfg.n_prime < 1 || cfg.k_prime < 1) fail("InvalidParams", "n' and k' must be at least 1");
    if (cfg.num_samples < 1) fail("InvalidParams", "num_samples must be at least 1");
    if (cfg.epsilon < 0.0 || cfg.epsilon >= 1.0) fail("InvalidParams", "epsilon must be in [0, 1)");
    if (cfg.metrics.empty()) fail("InvalidParams", "no metrics selected");
}

} // namespace

ResampledDataset perturb(const ResampledDataset& b, double epsilon, const LabelDomain& domain,
                         const SeedSpec& rng_spec) {
    if (domain.size() < 2) fail("DegenerateDomain", "perturbation needs at least 2 labels");
    if (epsilon < 0.0 || epsilon >= 1.0) fail("InvalidParams", "epsilon must be in [0, 1)");

    ResampledDataset out = b;
    if (epsilon == 0.0) return out;

    Stream rng(rng_spec);
    const std::size_t C = static_cast<std::size_t>(domain.size());
    for (std::int32_t& label : out.labels) {
        if (rng.next_double() >= epsilon) continue;
        // uniform over the other C-1 labels: skip past the current one
        std::size_t pick = rng.next_below(C - 1);
        std::size_t current = static_cast<std::size_t>(domain.index_of(label));
        if (pick >= current) ++pick;
        label = domain.code_at(static_cast<int>(pick));
    }
    return out;
}

TrialScores run_alt_trial(const AnnotationDataset& d, const SimulationConfig& cfg, int replicate) {
    validate(cfg);
    SeedSpec rep = replicate_seed(cfg, kHypAlt, replicate);
    Models m = build_models(d, cfg, rep);
    return score_models(m, cfg, d.domain());
}

TrialScores run_null_trial(const AnnotationDataset& d, const SimulationConfig& cfg, int replicate) {
    validate(cfg);
    SeedSpec rep = replicate_seed(cfg, kHypNull, replicate);
    Models m = build_models(d, cfg, rep);

    // Mix A and B: per item slot, pool the 2K' responses, shuffle, re-split.
    Stream mix(rep.child(kRoleNullMix));
    std::vector<std::int32_t> pooled(2 * static_cast<std::size_t>(cfg.k_prime));
    for (int s = 0; s < cfg.n_prime; ++s) {
        auto slot_a = m.a.slot_labels(s);
        auto slot_b = m.b.slot_labels(s);
        std::copy(slot_a.begin(), slot_a.end(), pooled.begin());
        std::copy(slot_b.begin(), slot_b.end(), pooled.begin() + cfg.k_prime);
        mix.shuffle(pooled);
        std::copy(pooled.begin(), pooled.begin() + cfg.k_prime, slot_a.begin());
        std::copy(pooled.begin() + cfg.k_prime, pooled.end(), slot_b.begin());
    }
    return score_models(m, cfg, d.domain());
}

double estimate_p_value(const std::vector<double>& gamma_alt, const std::vector<double>& gamma_null) {
    if (gamma_alt.empty() || gamma_null.empty()) fail("EmptyDistribution", "empty gamma vector");
    std::vector<double> alt_sorted = gamma_alt;
    std::sort(alt_sorted.begin(), alt_sorted.end());
    // ties count as exceedance (>=)
    long long exceed = 0;
    for (double null_value : gamma_null)
        exceed += std::upper_bound(alt_sorted.begin(), alt_sorted.end(), null_value) -
                  alt_sorted.begin();
    return static_cast<double>(exceed) /
           (static_cast<double>(gamma_alt.size()) * static_cast<double>(gamma_null.size()));
}

double estimate_p_value_paired(const std::vector<double>& gamma_alt,
                               const std::vector<double>& gamma_null) {
    if (gamma_alt.empty() || gamma_null.empty()) fail("EmptyDistribution", "empty gamma vector");
    if (gamma_alt.size() != gamma_null.size())
        fail("LengthMismatch", "paired estimator needs equally many alt and null samples");
    std::size_t exceed = 0;
    for (std::size_t i = 0; i < gamma_alt.size(); ++i)
        if (gamma_null[i] >= gamma_alt[i]) ++exceed;
    return static_cast<double>(exceed) / static_cast<double>(gamma_alt.size());
}

double effect_size(const std::vector<double>& gamma_alt) {
    if (gamma_alt.empty()) fail("EmptyDistribution", "empty gamma vector");
    double mean = 0.0;
    for (double g : gamma_alt) mean += g;
    return std::abs(mean / static_cast<double>(gamma_alt.size()));
}

PValueReport run_simulation(const AnnotationDataset& d, const SimulationConfig& cfg,
                            int parallelism) {
    validate(cfg);
    if (parallelism < 1) parallelism = 1;

    const std::size_t n_metrics = cfg.metrics.size();
    const std::size_t n = static_cast<std::size_t>(cfg.num_samples);
    std::vector<std::vector<double>> alt(n_metrics, std::vector<double>(n));
    std::vector<std::vector<double>> null(n_metrics, std::vector<double>(n));

    // 2*num_samples independent tasks; results land in their slot by index,
    // so any schedule produces the same report
    std::atomic<int> next_task{0};
    const int total_tasks = 2 * cfg.num_samples;
    auto worker = [&] {
        for (;;) {
            const int task = next_task.fetch_add(1);
            if (task >= total_tasks) return;
            const bool is_null = task >= cfg.num_samples;
            const int replicate = is_null ? task - cfg.num_samples : task;
            TrialScores scores = is_null ? run_null_trial(d, cfg, replicate)
                                         : run_alt_trial(d, cfg, replicate);
            auto& sink = is_null ? null : alt;
            for (std::size_t m = 0; m < n_metrics; ++m)
                sink[m][static_cast<std::size_t>(replicate)] = scores[m];
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

    PValueReport report;
    report.config = cfg;
    report.per_metric.reserve(n_metrics);
    for (std::size_t m = 0; m < n_metrics; ++m) {
        MetricReport mr;
        mr.metric = cfg.metrics[m];
        mr.gamma_alt = std::move(alt[m]);
        mr.gamma_null = std::move(null[m]);
        mr.p_value = cfg.p_mode == PValueMode::Pairwise
                         ? estimate_p_value(mr.gamma_alt, mr.gamma_null)
                         : estimate_p_value_paired(mr.gamma_alt, mr.gamma_null);
        mr.delta = effect_size(mr.gamma_alt);
        report.per_metric.push_back(std::move(mr));
    }
    return report;
}

std::string report_to_json(const PValueReport& report) {
    nlohmann::json j;
    j["config"] = {
        {"sampler", sampler_name(report.config.sampler)},
        {"n", report.config.n_prime},
        {"k", report.config.k_prime},
        {"epsilon", report.config.epsilon},
        {"replicates", report.config.num_samples},
        {"seed", report.config.seed},
        {"seed_path", report.config.seed_path},
        {"p_value_mode", report.config.p_mode == PValueMode::Pairwise ? "pairwise" : "paired"},
    };
    nlohmann::json per_metric;
    for (const MetricReport& mr : report.per_metric) {
        per_metric[metric_name(mr.metric)] = {
            {"p_value", mr.p_value},
            {"delta", mr.delta},
            {"gamma_alt", mr.gamma_alt},
            {"gamma_null", mr.gamma_null},
        };
    }
    j["per_metric"] = std::move(per_metric);
    return j.dump(2);
}

} // namespace raterboot
