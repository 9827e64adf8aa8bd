#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raterboot/dataset.hpp"
#include "raterboot/metrics.hpp"
#include "raterboot/resample.hpp"
#include "raterboot/rng.hpp"

namespace raterboot {

enum class PValueMode { Pairwise, Paired };

struct SimulationConfig {
    SamplerKind sampler = SamplerKind::S1;
    int n_prime = 0;
    int k_prime = 0;
    double epsilon = 0.0;
    int num_samples = 1000;
    std::vector<MetricId> metrics = all_metrics();
    std::uint64_t seed = 0;
    // extra stream indices under the master seed (a sweep prepends its cell key)
    std::vector<std::uint64_t> seed_path;
    PValueMode p_mode = PValueMode::Pairwise;
};

// Gamma scores of one replicate, aligned with config.metrics.
using TrialScores = std::vector<double>;

struct MetricReport {
    MetricId metric = MetricId::Accuracy;
    double p_value = 1.0;
    double delta = 0.0;
    std::vector<double> gamma_alt;
    std::vector<double> gamma_null;
};

struct PValueReport {
    SimulationConfig config;
    std::vector<MetricReport> per_metric;
};

// Each response is independently replaced, with probability epsilon, by a
// label drawn uniformly from the other C-1 labels. Throws DegenerateDomain.
ResampledDataset perturb(const ResampledDataset& b, double epsilon, const LabelDomain& domain,
                         const SeedSpec& rng);

// One H_alt replicate: G <- sampler(d); A keeps G's items, redraws raters;
// B does the same and then gets epsilon noise.
TrialScores run_alt_trial(const AnnotationDataset& d, const SimulationConfig& cfg, int replicate);

// One H_null replicate: as run_alt_trial, then per item slot the 2K' pooled
// responses of A and B are shuffled and re-split.
TrialScores run_null_trial(const AnnotationDataset& d, const SimulationConfig& cfg, int replicate);

// Pairwise exceedance: proportion of (null, alt) pairs with null >= alt.
// O((M+M') log) via sorting. Throws EmptyDistribution.
double estimate_p_value(const std::vector<double>& gamma_alt, const std::vector<double>& gamma_null);

// Paired variant (index-matched), for sensitivity runs.
double estimate_p_value_paired(const std::vector<double>& gamma_alt,
                               const std::vector<double>& gamma_null);

// |mean(gamma_alt)|
double effect_size(const std::vector<double>& gamma_alt);

// num_samples alt and null trials on disjoint streams; replicate results are
// independent of the parallelism level.
PValueReport run_simulation(const AnnotationDataset& d, const SimulationConfig& cfg,
                            int parallelism = 1);

std::string report_to_json(const PValueReport& report);

} // namespace raterboot
