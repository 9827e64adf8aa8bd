#include "raterboot/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "raterboot/error.hpp"

namespace raterboot {

bool larger_is_better(MetricId metric) {
    switch (metric) {
        case MetricId::Accuracy:
        case MetricId::Wins:
        case MetricId::Precision:
        case MetricId::Recall:
        case MetricId::F1:
            return true;
        case MetricId::MAE:
        case MetricId::KLDiv:
        case MetricId::JSD:
            return false;
    }
    return true;
}

const char* metric_name(MetricId metric) {
    switch (metric) {
        case MetricId::Accuracy: return "accuracy";
        case MetricId::MAE: return "mae";
        case MetricId::Wins: return "wins";
        case MetricId::Precision: return "precision";
        case MetricId::Recall: return "recall";
        case MetricId::F1: return "f1";
        case MetricId::KLDiv: return "kl_div";
        case MetricId::JSD: return "jsd";
    }
    return "?";
}

MetricId metric_from_name(const std::string& name) {
    for (MetricId m : all_metrics())
        if (name == metric_name(m)) return m;
    fail("InvalidParams", "unknown metric '" + name + "'");
}

std::vector<MetricId> all_metrics() {
    return {MetricId::Accuracy, MetricId::MAE,    MetricId::Wins,  MetricId::Precision,
            MetricId::Recall,   MetricId::F1,     MetricId::KLDiv, MetricId::JSD};
}

std::int32_t plurality_vote(std::span<const std::int32_t> labels, const LabelDomain& domain) {
    if (labels.empty()) fail("EmptyInput", "plurality_vote of empty multiset");
    std::vector<int> counts(static_cast<std::size_t>(domain.size()), 0);
    for (std::int32_t l : labels) ++counts[static_cast<std::size_t>(domain.index_of(l))];
    int best = 0;
    for (int c = 1; c < domain.size(); ++c)
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
    return domain.code_at(best); // ascending scan keeps the smallest code on ties
}

LabelDistribution label_distribution(std::span<const std::int32_t> labels, const LabelDomain& domain) {
    if (labels.empty()) fail("EmptyInput", "label_distribution of empty multiset");
    LabelDistribution probs(static_cast<std::size_t>(domain.size()), 0.0);
    for (std::int32_t l : labels) probs[static_cast<std::size_t>(domain.index_of(l))] += 1.0;
    for (double& p : probs) p /= static_cast<double>(labels.size());
    return probs;
}

namespace {

void check_lengths(std::size_t a, std::size_t g) {
    if (a != g) fail("LengthMismatch", "got " + std::to_string(a) + " vs " + std::to_string(g));
}

double item_l1_over_c(const LabelDistribution& a, const LabelDistribution& g) {
    check_lengths(a.size(), g.size());
    double l1 = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) l1 += std::abs(a[c] - g[c]);
    return l1 / static_cast<double>(a.size());
}

constexpr double kKlSmoothing = 1e-6;

double item_kl(const LabelDistribution& a, const LabelDistribution& g) {
    check_lengths(a.size(), g.size());
    const double norm = 1.0 + kKlSmoothing * static_cast<double>(a.size());
    double kl = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (g[c] <= 0.0) continue;
        const double smoothed = (a[c] + kKlSmoothing) / norm;
        kl += g[c] * std::log(g[c] / smoothed);
    }
    return kl;
}

double item_js(const LabelDistribution& a, const LabelDistribution& g) {
    check_lengths(a.size(), g.size());
    double js = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double m = 0.5 * (a[c] + g[c]);
        if (a[c] > 0.0) js += 0.5 * a[c] * std::log2(a[c] / m);
        if (g[c] > 0.0) js += 0.5 * g[c] * std::log2(g[c] / m);
    }
    return std::max(0.0, js);
}

} // namespace

double accuracy(std::span<const std::int32_t> votes_a, std::span<const std::int32_t> votes_g) {
    check_lengths(votes_a.size(), votes_g.size());
    if (votes_a.empty()) fail("EmptyInput", "no items");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < votes_a.size(); ++i)
        if (votes_a[i] == votes_g[i]) ++agree;
    return static_cast<double>(agree) / static_cast<double>(votes_a.size());
}

double mae(const std::vector<LabelDistribution>& a, const std::vector<LabelDistribution>& g) {
    check_lengths(a.size(), g.size());
    if (a.empty()) fail("EmptyInput", "no items");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += item_l1_over_c(a[i], g[i]);
    return total / static_cast<double>(a.size());
}

std::pair<double, double> wins(const std::vector<LabelDistribution>& a,
                               const std::vector<LabelDistribution>& b,
                               const std::vector<LabelDistribution>& g) {
    check_lengths(a.size(), g.size());
    check_lengths(b.size(), g.size());
    if (a.empty()) fail("EmptyInput", "no items");
    double wins_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double score_a = item_l1_over_c(a[i], g[i]);
        const double score_b = item_l1_over_c(b[i], g[i]);
        if (score_a < score_b)
            wins_a += 1.0;
        else if (score_a == score_b)
            wins_a += 0.5;
    }
    wins_a /= static_cast<double>(a.size());
    return {wins_a, 1.0 - wins_a};
}

double prf_weighted(std::span<const std::int32_t> votes_a, std::span<const std::int32_t> votes_g,
                    const LabelDomain& domain, PrfKind kind) {
    check_lengths(votes_a.size(), votes_g.size());
    if (votes_g.empty()) fail("EmptyInput", "no items");

    const std::size_t C = static_cast<std::size_t>(domain.size());
    std::vector<long> tp(C, 0), predicted(C, 0), support(C, 0);
    for (std::size_t i = 0; i < votes_a.size(); ++i) {
        const std::size_t ca = static_cast<std::size_t>(domain.index_of(votes_a[i]));
        const std::size_t cg = static_cast<std::size_t>(domain.index_of(votes_g[i]));
        ++predicted[ca];
        ++support[cg];
        if (ca == cg) ++tp[ca];
    }

    double weighted = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        if (support[c] == 0) continue;
        const double precision =
            predicted[c] > 0 ? static_cast<double>(tp[c]) / static_cast<double>(predicted[c]) : 0.0;
        const double recall = static_cast<double>(tp[c]) / static_cast<double>(support[c]);
        double score = 0.0;
        switch (kind) {
            case PrfKind::Precision: score = precision; break;
            case PrfKind::Recall: score = recall; break;
            case PrfKind::F1:
                score = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                                   : 0.0;
                break;
        }
        weighted += static_cast<double>(support[c]) * score;
    }
    return weighted / static_cast<double>(votes_g.size());
}

double kl_div(const std::vector<LabelDistribution>& a, const std::vector<LabelDistribution>& g) {
    check_lengths(a.size(), g.size());
    if (a.empty()) fail("EmptyInput", "no items");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += item_kl(a[i], g[i]);
    return total / static_cast<double>(a.size());
}

double jsd(const std::vector<LabelDistribution>& a, const std::vector<LabelDistribution>& g) {
    check_lengths(a.size(), g.size());
    if (a.empty()) fail("EmptyInput", "no items");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::sqrt(item_js(a[i], g[i]));
    return total / static_cast<double>(a.size());
}

double gamma_score(MetricId metric, double a_score, double b_score) {
    return larger_is_better(metric) ? a_score - b_score : b_score - a_score;
}

ModelAggregates aggregate(const ResampledDataset& r, const LabelDomain& domain) {
    ModelAggregates agg;
    agg.votes.reserve(static_cast<std::size_t>(r.n_prime));
    agg.dists.reserve(static_cast<std::size_t>(r.n_prime));
    for (int s = 0; s < r.n_prime; ++s) {
        auto labels = r.slot_labels(s);
        agg.votes.push_back(plurality_vote(labels, domain));
        agg.dists.push_back(label_distribution(labels, domain));
    }
    return agg;
}

std::vector<double> gamma_scores(const std::vector<MetricId>& metrics, const ModelAggregates& a,
                                 const ModelAggregates& b, const ModelAggregates& g,
                                 const LabelDomain& domain) {
    std::vector<double> out;
    out.reserve(metrics.size());
    for (MetricId m : metrics) {
        double score_a = 0.0, score_b = 0.0;
        switch (m) {
            case MetricId::Accuracy:
                score_a = accuracy(a.votes, g.votes);
                score_b = accuracy(b.votes, g.votes);
                break;
            case MetricId::MAE:
                score_a = mae(a.dists, g.dists);
                score_b = mae(b.dists, g.dists);
                break;
            case MetricId::Wins: {
                auto [wa, wb] = wins(a.dists, b.dists, g.dists);
                score_a = wa;
                score_b = wb;
                break;
            }
            case MetricId::Precision:
                score_a = prf_weighted(a.votes, g.votes, domain, PrfKind::Precision);
                score_b = prf_weighted(b.votes, g.votes, domain, PrfKind::Precision);
                break;
            case MetricId::Recall:
                score_a = prf_weighted(a.votes, g.votes, domain, PrfKind::Recall);
                score_b = prf_weighted(b.votes, g.votes, domain, PrfKind::Recall);
                break;
            case MetricId::F1:
                score_a = prf_weighted(a.votes, g.votes, domain, PrfKind::F1);
                score_b = prf_weighted(b.votes, g.votes, domain, PrfKind::F1);
                break;
            case MetricId::KLDiv:
                score_a = kl_div(a.dists, g.dists);
                score_b = kl_div(b.dists, g.dists);
                break;
            case MetricId::JSD:
                score_a = jsd(a.dists, g.dists);
                score_b = jsd(b.dists, g.dists);
                break;
        }
        out.push_back(gamma_score(m, score_a, score_b));
    }
    return out;
}

} // namespace raterboot
