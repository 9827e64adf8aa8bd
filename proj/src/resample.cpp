#include "raterboot/resample.hpp"

#include <algorithm>

#include "raterboot/error.hpp"

namespace raterboot {

const char* sampler_name(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::S1: return "s1";
        case SamplerKind::S2: return "s2";
        case SamplerKind::S3: return "s3";
    }
    return "?";
}

SamplerKind sampler_from_name(const std::string& name) {
    if (name == "s1" || name == "S1") return SamplerKind::S1;
    if (name == "s2" || name == "S2") return SamplerKind::S2;
    if (name == "s3" || name == "S3") return SamplerKind::S3;
    fail("InvalidParams", "unknown sampler '" + name + "'");
}

bool operator==(const ResampledDataset& a, const ResampledDataset& b) {
    auto batch_eq = [](const ResampledDataset::BatchDraw& x, const ResampledDataset::BatchDraw& y) {
        return x.batch == y.batch && x.n_slots == y.n_slots;
    };
    return a.sampler == b.sampler && a.n_prime == b.n_prime && a.k_prime == b.k_prime &&
           a.source_hash == b.source_hash && a.item_slots == b.item_slots && a.labels == b.labels &&
           a.batch_draws.size() == b.batch_draws.size() &&
           std::equal(a.batch_draws.begin(), a.batch_draws.end(), b.batch_draws.begin(), batch_eq);
}

namespace {

void check_dims(int n_prime, int k_prime) {
    if (n_prime < 1 || k_prime < 1) fail("InvalidParams", "n' and k' must be at least 1");
}

ResampledDataset make_shell(const AnnotationDataset& d, SamplerKind kind, int n_prime, int k_prime) {
    ResampledDataset out;
    out.sampler = kind;
    out.n_prime = n_prime;
    out.k_prime = k_prime;
    out.source_hash = d.content_hash();
    out.item_slots.reserve(static_cast<std::size_t>(n_prime));
    out.labels.resize(static_cast<std::size_t>(n_prime) * static_cast<std::size_t>(k_prime));
    return out;
}

std::vector<std::uint32_t> draw_multiset(Stream& rng, std::span<const std::uint32_t> pool, int k) {
    std::vector<std::uint32_t> out(static_cast<std::size_t>(k));
    for (auto& r : out) r = pool[rng.index_below(pool.size())];
    return out;
}

// fill one slot from a fixed rater multiset, reading the crossed/batched matrix
void fill_slot_from_raters(const AnnotationDataset& d, std::uint32_t item,
                           const std::vector<std::uint32_t>& raters, std::span<std::int32_t> out) {
    for (std::size_t j = 0; j < raters.size(); ++j) out[j] = d.label_at(item, raters[j]);
}

} // namespace

ResampledDataset sample_s1(const AnnotationDataset& d, int n_prime, int k_prime, const SeedSpec& rng_spec) {
    check_dims(n_prime, k_prime);
    if (!d.fully_crossed()) fail("NotFullyCrossed", "S1 requires a fully-crossed source");

    Stream rng(rng_spec);
    ResampledDataset out = make_shell(d, SamplerKind::S1, n_prime, k_prime);

    for (int s = 0; s < n_prime; ++s)
        out.item_slots.push_back(rng.index_below(d.n_items()));

    std::vector<std::uint32_t> raters(static_cast<std::size_t>(k_prime));
    for (auto& r : raters) r = rng.index_below(d.n_raters());

    for (int s = 0; s < n_prime; ++s)
        fill_slot_from_raters(d, out.item_slots[static_cast<std::size_t>(s)], raters, out.slot_labels(s));
    return out;
}

ResampledDataset sample_s2(const AnnotationDataset& d, int n_prime, int k_prime, const SeedSpec& rng_spec) {
    check_dims(n_prime, k_prime);

    Stream rng(rng_spec);
    ResampledDataset out = make_shell(d, SamplerKind::S2, n_prime, k_prime);

    for (int s = 0; s < n_prime; ++s)
        out.item_slots.push_back(rng.index_below(d.n_items()));

    for (int s = 0; s < n_prime; ++s) {
        const auto& pool = d.ratings_of(out.item_slots[static_cast<std::size_t>(s)]);
        if (pool.empty()) fail("EmptyItemPool", "item has no ratings");
        auto slot = out.slot_labels(s);
        for (int j = 0; j < k_prime; ++j)
            slot[static_cast<std::size_t>(j)] = pool[rng.index_below(pool.size())].label;
    }
    return out;
}

ResampledDataset sample_s3(const AnnotationDataset& d, int n_prime, int k_prime, const SeedSpec& rng_spec) {
    check_dims(n_prime, k_prime);
    if (!d.batch_map()) fail("NoBatchMap", "S3 requires a batch map");
    const BatchMap& bm = *d.batch_map();

    Stream rng(rng_spec);
    ResampledDataset out = make_shell(d, SamplerKind::S3, n_prime, k_prime);

    const int n_draws = static_cast<int>((static_cast<long>(n_prime) + bm.batch_size - 1) / bm.batch_size);
    const int base = n_prime / n_draws;
    const int remainder = n_prime % n_draws;

    for (int b = 0; b < n_draws; ++b) {
        const std::uint32_t batch_idx = rng.index_below(bm.batches.size());
        const Batch& batch = bm.batches[batch_idx];
        const int n_slots = base + (b < remainder ? 1 : 0);
        out.batch_draws.push_back({batch_idx, static_cast<std::uint32_t>(n_slots)});

        const std::size_t slot_base = out.item_slots.size();
        for (int s = 0; s < n_slots; ++s)
            out.item_slots.push_back(batch.items[rng.index_below(batch.items.size())]);

        std::vector<std::uint32_t> raters = draw_multiset(rng, batch.raters, k_prime);
        for (int s = 0; s < n_slots; ++s) {
            const int slot = static_cast<int>(slot_base) + s;
            fill_slot_from_raters(d, out.item_slots[static_cast<std::size_t>(slot)], raters,
                                  out.slot_labels(slot));
        }
    }
    return out;
}

ResampledDataset sample(const AnnotationDataset& d, SamplerKind kind, int n_prime, int k_prime,
                        const SeedSpec& rng) {
    switch (kind) {
        case SamplerKind::S1: return sample_s1(d, n_prime, k_prime, rng);
        case SamplerKind::S2: return sample_s2(d, n_prime, k_prime, rng);
        case SamplerKind::S3: return sample_s3(d, n_prime, k_prime, rng);
    }
    fail("InvalidParams", "unknown sampler");
}

ResampledDataset resample_raters_like(const ResampledDataset& g, const AnnotationDataset& d,
                                      SamplerKind kind, const SeedSpec& rng_spec) {
    if (g.sampler != kind) fail("ProvenanceMismatch", "sampler kind differs from g's provenance");
    if (g.source_hash != d.content_hash())
        fail("ProvenanceMismatch", "dataset differs from g's source");

    Stream rng(rng_spec);
    ResampledDataset out = make_shell(d, kind, g.n_prime, g.k_prime);
    out.item_slots = g.item_slots;
    out.batch_draws = g.batch_draws;

    switch (kind) {
        case SamplerKind::S1: {
            std::vector<std::uint32_t> raters(static_cast<std::size_t>(g.k_prime));
            for (auto& r : raters) r = rng.index_below(d.n_raters());
            for (int s = 0; s < g.n_prime; ++s)
                fill_slot_from_raters(d, out.item_slots[static_cast<std::size_t>(s)], raters,
                                      out.slot_labels(s));
            break;
        }
        case SamplerKind::S2: {
            for (int s = 0; s < g.n_prime; ++s) {
                const auto& pool = d.ratings_of(out.item_slots[static_cast<std::size_t>(s)]);
                auto slot = out.slot_labels(s);
                for (int j = 0; j < g.k_prime; ++j)
                    slot[static_cast<std::size_t>(j)] = pool[rng.index_below(pool.size())].label;
            }
            break;
        }
        case SamplerKind::S3: {
            if (!d.batch_map()) fail("ProvenanceMismatch", "source lost its batch map");
            const BatchMap& bm = *d.batch_map();
            std::size_t slot = 0;
            for (const auto& draw : g.batch_draws) {
                const Batch& batch = bm.batches[draw.batch];
                std::vector<std::uint32_t> raters = draw_multiset(rng, batch.raters, g.k_prime);
                for (std::uint32_t s = 0; s < draw.n_slots; ++s, ++slot)
                    fill_slot_from_raters(d, out.item_slots[slot], raters,
                                          out.slot_labels(static_cast<int>(slot)));
            }
            break;
        }
    }
    return out;
}

} // namespace raterboot
