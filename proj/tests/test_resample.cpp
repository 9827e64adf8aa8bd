#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "oracle.hpp"
#include "raterboot/error.hpp"
#include "raterboot/resample.hpp"
#include "test_util.hpp"

using namespace raterboot;

namespace {

// crossed toy set where rater r always answers r; labels identify raters
AnnotationDataset rater_coded_crossed(int n_items, int n_raters) {
    std::vector<std::vector<std::int32_t>> labels(static_cast<std::size_t>(n_items));
    for (auto& row : labels)
        for (int r = 0; r < n_raters; ++r) row.push_back(r);
    return testutil::crossed(labels);
}

} // namespace

TEST_CASE("s1 on a 1x1 source has only one possible draw") {
    AnnotationDataset d = testutil::crossed({{1}}, LabelDomain::binary());
    ResampledDataset r = sample_s1(d, 3, 2, SeedSpec{0, {}});
    CHECK(r.item_slots == std::vector<std::uint32_t>{0, 0, 0});
    CHECK(r.labels == std::vector<std::int32_t>(6, 1));
}

TEST_CASE("s1 requires a fully-crossed source") {
    DatasetBuilder b;
    b.add("i1", "r1", 0);
    b.add("i1", "r2", 1);
    b.add("i2", "r1", 1);
    AnnotationDataset d = b.build();
    try {
        sample_s1(d, 1, 1, SeedSpec{0, {}});
        FAIL("expected NotFullyCrossed");
    } catch (const Error& e) {
        CHECK(e.kind() == "NotFullyCrossed");
    }
}

TEST_CASE("s1 draws (item, rater) cells uniformly") {
    // distinct label per (item, rater) identifies the drawn cell
    AnnotationDataset d = testutil::crossed({{0, 1}, {2, 3}});
    std::vector<long> counts(4, 0);
    for (int rep = 0; rep < 40000; ++rep) {
        ResampledDataset r = sample_s1(d, 1, 1, SeedSpec{123, {static_cast<std::uint64_t>(rep)}});
        ++counts[static_cast<std::size_t>(r.labels[0])];
    }
    const double stat = oracle::chi_square_stat(counts, {0.25, 0.25, 0.25, 0.25});
    CHECK(oracle::chi_square_p(stat, 3) > 0.001);
}

TEST_CASE("s1 oversamples raters beyond the pool size") {
    AnnotationDataset d = rater_coded_crossed(5, 3);
    ResampledDataset r = sample_s1(d, 4, 200, SeedSpec{9, {}});
    CHECK(r.item_slots.size() == 4);
    CHECK(r.labels.size() == 800);
    // one global multiset: every slot sees the same rater sequence
    auto first = r.slot_labels(0);
    for (int s = 1; s < 4; ++s) {
        auto other = r.slot_labels(s);
        CHECK(std::equal(first.begin(), first.end(), other.begin()));
    }
}

TEST_CASE("s2 with a singleton pool repeats the only label") {
    DatasetBuilder b;
    b.add("i1", "r1", 1);
    b.add("i2", "r2", 0);
    AnnotationDataset d = b.build();
    ResampledDataset r = sample_s2(d, 6, 4, SeedSpec{4, {}});
    for (int s = 0; s < r.n_prime; ++s) {
        auto labels = r.slot_labels(s);
        const std::int32_t expected = r.item_slots[static_cast<std::size_t>(s)] == 0 ? 1 : 0;
        for (auto l : labels) CHECK(l == expected);
    }
}

TEST_CASE("s2 multiset distribution matches enumeration") {
    // single item, pool {r1: 0, r2: 1}, K'=2 -> {0,0}: 1/4, {0,1}: 1/2, {1,1}: 1/4
    DatasetBuilder b;
    b.add("i1", "r1", 0);
    b.add("i1", "r2", 1);
    AnnotationDataset d = b.build();
    std::vector<long> counts(3, 0); // index = number of ones
    for (int rep = 0; rep < 40000; ++rep) {
        ResampledDataset r = sample_s2(d, 1, 2, SeedSpec{7, {static_cast<std::uint64_t>(rep)}});
        counts[static_cast<std::size_t>(r.labels[0] + r.labels[1])]++;
    }
    const double stat = oracle::chi_square_stat(counts, {0.25, 0.5, 0.25});
    CHECK(oracle::chi_square_p(stat, 2) > 0.001);
}

TEST_CASE("s1 and s2 per-slot label marginals agree on crossed sources") {
    AnnotationDataset d = testutil::crossed({{0, 1, 1}, {1, 0, 0}, {0, 0, 1}});
    const int reps = 20000, n_prime = 2, k_prime = 2;
    long ones_s1 = 0, ones_s2 = 0;
    const long draws = static_cast<long>(reps) * n_prime * k_prime;
    for (int rep = 0; rep < reps; ++rep) {
        SeedSpec seed{31, {static_cast<std::uint64_t>(rep)}};
        for (auto l : sample_s1(d, n_prime, k_prime, seed).labels) ones_s1 += l;
        for (auto l : sample_s2(d, n_prime, k_prime, seed.child(1)).labels) ones_s2 += l;
    }
    const double p1 = static_cast<double>(ones_s1) / draws;
    const double p2 = static_cast<double>(ones_s2) / draws;
    // both estimate the matrix mean 4/9; compare within 3 sigma of the difference
    const double p_pool = (p1 + p2) / 2.0;
    const double sigma = std::sqrt(p_pool * (1.0 - p_pool) * 2.0 / draws);
    CHECK(std::fabs(p1 - p2) < 3.0 * sigma);
}

TEST_CASE("s3 single batch shares one rater multiset") {
    SynthSpec spec;
    spec.n_items = 20;
    spec.n_raters = 4;
    spec.structure = SynthStructure::batched(20);
    spec.seed = 2;
    AnnotationDataset base = synth_generate(spec);

    // rater-coded labels for an identifiable multiset
    DatasetBuilder b;
    for (std::uint32_t i = 0; i < base.n_items(); ++i)
        for (const Rating& r : base.ratings_of(i))
            b.add(base.item_id(i), base.rater_id(r.rater), static_cast<std::int32_t>(r.rater));
    AnnotationDataset d = infer_batches(b.build(), 20);

    ResampledDataset r = sample_s3(d, 10, 3, SeedSpec{5, {}});
    CHECK(r.n_prime == 10);
    REQUIRE(r.batch_draws.size() == 1);
    CHECK(r.batch_draws[0].n_slots == 10);
    auto first = r.slot_labels(0);
    std::multiset<std::int32_t> reference(first.begin(), first.end());
    for (int s = 1; s < 10; ++s) {
        auto labels = r.slot_labels(s);
        CHECK(std::multiset<std::int32_t>(labels.begin(), labels.end()) == reference);
    }
}

TEST_CASE("s3 slot counts follow the floor-plus-remainder rule") {
    SynthSpec spec;
    spec.n_items = 100;
    spec.n_raters = 10;
    spec.structure = SynthStructure::batched(20);
    spec.seed = 8;
    AnnotationDataset d = synth_generate(spec);

    ResampledDataset r = sample_s3(d, 50, 2, SeedSpec{1, {}});
    REQUIRE(r.batch_draws.size() == 3); // ceil(50/20)
    CHECK(r.batch_draws[0].n_slots == 17);
    CHECK(r.batch_draws[1].n_slots == 17);
    CHECK(r.batch_draws[2].n_slots == 16);
    CHECK(r.item_slots.size() == 50);

    try {
        sample_s3(synth_generate(SynthSpec{4, 3, LabelDomain::binary(), {}, {}, 1}), 2, 2,
                  SeedSpec{0, {}});
        FAIL("expected NoBatchMap");
    } catch (const Error& e) {
        CHECK(e.kind() == "NoBatchMap");
    }
}

TEST_CASE("s3 raters and items stay inside the drawn batch") {
    // batch pools have disjoint rater-coded labels, so membership is visible
    SynthSpec spec;
    spec.n_items = 40;
    spec.n_raters = 8;
    spec.structure = SynthStructure::batched(10);
    spec.seed = 3;
    AnnotationDataset base = synth_generate(spec);
    DatasetBuilder b;
    for (std::uint32_t i = 0; i < base.n_items(); ++i)
        for (const Rating& r : base.ratings_of(i))
            b.add(base.item_id(i), base.rater_id(r.rater), static_cast<std::int32_t>(r.rater));
    AnnotationDataset d = infer_batches(b.build(), 10);
    REQUIRE(d.batch_map()->batches.size() == 4);

    for (int rep = 0; rep < 1000; ++rep) {
        ResampledDataset r = sample_s3(d, 25, 3, SeedSpec{77, {static_cast<std::uint64_t>(rep)}});
        std::size_t slot = 0;
        for (const auto& draw : r.batch_draws) {
            const Batch& batch = d.batch_map()->batches[draw.batch];
            const std::set<std::uint32_t> pool(batch.raters.begin(), batch.raters.end());
            const std::set<std::uint32_t> items(batch.items.begin(), batch.items.end());
            for (std::uint32_t s = 0; s < draw.n_slots; ++s, ++slot) {
                CHECK(items.count(r.item_slots[slot]) == 1);
                for (auto label : r.slot_labels(static_cast<int>(slot)))
                    CHECK(pool.count(static_cast<std::uint32_t>(label)) == 1);
            }
        }
    }
}

TEST_CASE("samplers are deterministic and emit exact slot counts") {
    SynthSpec crossed_spec;
    crossed_spec.n_items = 30;
    crossed_spec.n_raters = 6;
    crossed_spec.seed = 12;
    AnnotationDataset crossed_d = synth_generate(crossed_spec);

    SynthSpec batched_spec = crossed_spec;
    batched_spec.structure = SynthStructure::batched(10);
    AnnotationDataset batched_d = synth_generate(batched_spec);

    for (SamplerKind kind : {SamplerKind::S1, SamplerKind::S2, SamplerKind::S3}) {
        const AnnotationDataset& d = kind == SamplerKind::S3 ? batched_d : crossed_d;
        SeedSpec seed{55, {9}};
        ResampledDataset a = sample(d, kind, 13, 4, seed);
        ResampledDataset b = sample(d, kind, 13, 4, seed);
        CHECK(a == b);
        CHECK(a.item_slots.size() == 13);
        CHECK(a.labels.size() == 13 * 4);
        ResampledDataset c = sample(d, kind, 13, 4, seed.child(1));
        CHECK_FALSE(c == a);
    }
}

TEST_CASE("resample_raters_like keeps slots and redraws raters") {
    SynthSpec spec;
    spec.n_items = 25;
    spec.n_raters = 5;
    spec.seed = 6;
    AnnotationDataset d = synth_generate(spec);

    for (SamplerKind kind : {SamplerKind::S1, SamplerKind::S2}) {
        ResampledDataset g = sample(d, kind, 10, 3, SeedSpec{2, {0}});
        ResampledDataset a = resample_raters_like(g, d, kind, SeedSpec{2, {1}});
        CHECK(a.item_slots == g.item_slots);
        CHECK(a.labels.size() == g.labels.size());
    }

    // S3 keeps the drawn batches too
    SynthSpec batched_spec;
    batched_spec.n_items = 40;
    batched_spec.n_raters = 8;
    batched_spec.structure = SynthStructure::batched(10);
    batched_spec.seed = 6;
    AnnotationDataset db = synth_generate(batched_spec);
    ResampledDataset g3 = sample_s3(db, 23, 4, SeedSpec{3, {0}});
    ResampledDataset a3 = resample_raters_like(g3, db, SamplerKind::S3, SeedSpec{3, {1}});
    CHECK(a3.item_slots == g3.item_slots);
    REQUIRE(a3.batch_draws.size() == g3.batch_draws.size());
    for (std::size_t i = 0; i < a3.batch_draws.size(); ++i)
        CHECK(a3.batch_draws[i].batch == g3.batch_draws[i].batch);

    try {
        resample_raters_like(g3, db, SamplerKind::S2, SeedSpec{3, {2}});
        FAIL("expected ProvenanceMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == "ProvenanceMismatch");
    }
    try {
        resample_raters_like(g3, d, SamplerKind::S3, SeedSpec{3, {2}});
        FAIL("expected ProvenanceMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == "ProvenanceMismatch");
    }
}

TEST_CASE("resample_raters_like with singleton pools reproduces g exactly") {
    DatasetBuilder b;
    b.add("i1", "r1", 1);
    b.add("i2", "r2", 0);
    AnnotationDataset d = b.build();
    ResampledDataset g = sample_s2(d, 8, 3, SeedSpec{10, {0}});
    ResampledDataset a = resample_raters_like(g, d, SamplerKind::S2, SeedSpec{10, {1}});
    CHECK(a.labels == g.labels);
}

TEST_CASE("resample_raters_like marginals match g's marginals") {
    AnnotationDataset d = testutil::crossed({{0, 1}, {1, 0}});
    long ones_g = 0, ones_a = 0;
    const int reps = 10000;
    for (int rep = 0; rep < reps; ++rep) {
        SeedSpec seed{41, {static_cast<std::uint64_t>(rep)}};
        ResampledDataset g = sample_s2(d, 2, 2, seed.child(0));
        ResampledDataset a = resample_raters_like(g, d, SamplerKind::S2, seed.child(1));
        for (auto l : g.labels) ones_g += l;
        for (auto l : a.labels) ones_a += l;
    }
    const double n = static_cast<double>(reps) * 4;
    const double pg = ones_g / n, pa = ones_a / n;
    const double pooled = (pg + pa) / 2.0;
    const double sigma = std::sqrt(pooled * (1.0 - pooled) * 2.0 / n);
    CHECK(std::fabs(pg - pa) < 3.0 * sigma);
}
