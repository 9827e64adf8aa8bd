#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "raterboot/dataset.hpp"
#include "raterboot/resample.hpp"

namespace raterboot {

enum class MetricId {
    Accuracy,
    MAE,
    Wins,
    Precision,
    Recall,
    F1,
    KLDiv,
    JSD,
};

constexpr int kNumMetrics = 8;

bool larger_is_better(MetricId metric);
const char* metric_name(MetricId metric);
MetricId metric_from_name(const std::string& name);
std::vector<MetricId> all_metrics();

using LabelDistribution = std::vector<double>; // length C, sums to 1

// Modal label; ties broken by smallest label code. Throws EmptyInput.
std::int32_t plurality_vote(std::span<const std::int32_t> labels, const LabelDomain& domain);

// Empirical label frequencies, no smoothing. Throws EmptyInput.
LabelDistribution label_distribution(std::span<const std::int32_t> labels, const LabelDomain& domain);

// Fraction of slots whose votes agree.
double accuracy(std::span<const std::int32_t> votes_a, std::span<const std::int32_t> votes_g);

// Mean over items of the per-item L1 gap divided by C (keeps the score in [0,1]).
double mae(const std::vector<LabelDistribution>& a, const std::vector<LabelDistribution>& g);

// Per item, the model with the lower item-level MAE against g takes the win;
// ties split 0.5 each. Returns mean wins (wins_a + wins_b == 1).
std::pair<double, double> wins(const std::vector<LabelDistribution>& a,
                               const std::vector<LabelDistribution>& b,
                               const std::vector<LabelDistribution>& g);

enum class PrfKind { Precision, Recall, F1 };

// Support-weighted per-class precision/recall/F1 (support counted in g);
// zero-denominator classes score 0.
double prf_weighted(std::span<const std::int32_t> votes_a, std::span<const std::int32_t> votes_g,
                    const LabelDomain& domain, PrfKind kind);

// Mean over items of KL(g_i || a_i), natural log, with additive smoothing
// 1e-6 applied to the model side only.
double kl_div(const std::vector<LabelDistribution>& a, const std::vector<LabelDistribution>& g);

// Mean over items of sqrt(JS(a_i, g_i)), base-2 logs, range [0,1].
double jsd(const std::vector<LabelDistribution>& a, const std::vector<LabelDistribution>& g);

// Orientation-normalized gap, positive when A beats B.
double gamma_score(MetricId metric, double a_score, double b_score);

// Per-slot aggregates of one resample, computed once and shared by all metrics.
struct ModelAggregates {
    std::vector<std::int32_t> votes;
    std::vector<LabelDistribution> dists;
};

ModelAggregates aggregate(const ResampledDataset& r, const LabelDomain& domain);

// Gamma scores for a (A, B, G) triple, aligned with `metrics`.
std::vector<double> gamma_scores(const std::vector<MetricId>& metrics, const ModelAggregates& a,
                                 const ModelAggregates& b, const ModelAggregates& g,
                                 const LabelDomain& domain);

} // namespace raterboot
