#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "raterboot/dataset.hpp"
#include "raterboot/rng.hpp"

namespace raterboot {

enum class SamplerKind { S1, S2, S3 };

const char* sampler_name(SamplerKind kind);
SamplerKind sampler_from_name(const std::string& name);

// One bootstrap draw: n_prime item slots, each with exactly k_prime labels.
// Slots may repeat source items. batch_draws is populated by S3 only and
// records the drawn batch sequence so that a later rater redraw can reuse it.
struct ResampledDataset {
    SamplerKind sampler = SamplerKind::S1;
    int n_prime = 0;
    int k_prime = 0;
    std::uint64_t source_hash = 0;

    std::vector<std::uint32_t> item_slots;        // length n_prime, source item indices
    std::vector<std::int32_t> labels;             // n_prime * k_prime, row-major per slot

    struct BatchDraw {
        std::uint32_t batch = 0;  // index into the source batch map
        std::uint32_t n_slots = 0; // consecutive slots assigned to this draw
    };
    std::vector<BatchDraw> batch_draws;

    std::span<const std::int32_t> slot_labels(int slot) const {
        return {labels.data() + static_cast<std::size_t>(slot) * static_cast<std::size_t>(k_prime),
                static_cast<std::size_t>(k_prime)};
    }
    std::span<std::int32_t> slot_labels(int slot) {
        return {labels.data() + static_cast<std::size_t>(slot) * static_cast<std::size_t>(k_prime),
                static_cast<std::size_t>(k_prime)};
    }

    friend bool operator==(const ResampledDataset&, const ResampledDataset&);
};

// Items and one global rater multiset drawn with replacement (fully-crossed
// sources only). Throws NotFullyCrossed.
ResampledDataset sample_s1(const AnnotationDataset& d, int n_prime, int k_prime, const SeedSpec& rng);

// Items with replacement; per item slot an independent rater multiset drawn
// from that item's annotator pool. Throws EmptyItemPool.
ResampledDataset sample_s2(const AnnotationDataset& d, int n_prime, int k_prime, const SeedSpec& rng);

// ceil(n_prime / batch_size) batches with replacement; per drawn batch, items
// with replacement and one rater multiset from the batch pool. Slot counts
// are floor(n_prime/B) with the remainder spread over the first draws, so the
// total is exactly n_prime. Throws NoBatchMap.
ResampledDataset sample_s3(const AnnotationDataset& d, int n_prime, int k_prime, const SeedSpec& rng);

ResampledDataset sample(const AnnotationDataset& d, SamplerKind kind, int n_prime, int k_prime,
                        const SeedSpec& rng);

// Keeps g's item slots (and, for S3, its drawn batches) and redraws the rater
// multisets under the same per-kind rule. Throws ProvenanceMismatch if g did
// not come from (d, kind).
ResampledDataset resample_raters_like(const ResampledDataset& g, const AnnotationDataset& d,
                                      SamplerKind kind, const SeedSpec& rng);

} // namespace raterboot
