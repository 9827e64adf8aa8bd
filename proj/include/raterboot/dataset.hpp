#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raterboot/rng.hpp"

namespace raterboot {

// Ordered set of categorical label codes (small non-negative integers).
class LabelDomain {
public:
    LabelDomain() = default;
    explicit LabelDomain(std::vector<std::int32_t> codes);

    static LabelDomain binary() { return LabelDomain({0, 1}); }
    static LabelDomain first_n(int n_classes);

    int size() const { return static_cast<int>(codes_.size()); }
    const std::vector<std::int32_t>& codes() const { return codes_; }
    std::int32_t code_at(int class_index) const { return codes_[static_cast<std::size_t>(class_index)]; }

    bool contains(std::int32_t code) const;
    // dense class index of a code; throws UnknownLabel if absent
    int index_of(std::int32_t code) const;

    bool operator==(const LabelDomain& other) const { return codes_ == other.codes_; }

private:
    std::vector<std::int32_t> codes_;
    std::vector<std::int32_t> index_; // code -> class index, -1 for absent
};

struct Rating {
    std::uint32_t rater = 0; // dense rater index
    std::int32_t label = 0;

    friend bool operator==(const Rating&, const Rating&) = default;
};

struct Batch {
    std::vector<std::uint32_t> items;  // dense item indices, ascending
    std::vector<std::uint32_t> raters; // batch rater pool, ascending

    friend bool operator==(const Batch&, const Batch&) = default;
};

struct BatchMap {
    int batch_size = 0;
    std::vector<Batch> batches;

    friend bool operator==(const BatchMap&, const BatchMap&) = default;
};

struct DatasetSummary {
    std::size_t n_items = 0;
    std::size_t n_raters = 0;
    std::size_t n_ratings = 0;
    std::map<std::size_t, std::size_t> ratings_per_item; // ratings count -> item count
    bool fully_crossed = false;
    std::optional<int> batch_size;
};

// Immutable multi-rater annotation dataset. Item/rater ids are interned to
// dense indices at construction (sorted lexicographically, so the result is
// independent of input row order); all sampling operates on indices.
class AnnotationDataset {
public:
    std::size_t n_items() const { return item_ids_.size(); }
    std::size_t n_raters() const { return rater_ids_.size(); }
    std::size_t n_ratings() const { return n_ratings_; }
    bool fully_crossed() const { return fully_crossed_; }

    const std::string& item_id(std::uint32_t item) const { return item_ids_[item]; }
    const std::string& rater_id(std::uint32_t rater) const { return rater_ids_[rater]; }
    const std::vector<std::string>& item_ids() const { return item_ids_; }
    const std::vector<std::string>& rater_ids() const { return rater_ids_; }

    const LabelDomain& domain() const { return domain_; }
    const std::optional<BatchMap>& batch_map() const { return batches_; }

    // ratings of one item, sorted by rater index
    const std::vector<Rating>& ratings_of(std::uint32_t item) const { return by_item_[item]; }

    // label of (item, rater); throws UnknownLabel when the pair is unrated
    std::int32_t label_at(std::uint32_t item, std::uint32_t rater) const;

    DatasetSummary summary() const;
    std::uint64_t content_hash() const { return hash_; }

    bool operator==(const AnnotationDataset& other) const;

private:
    friend struct DatasetAssembler;

    std::vector<std::string> item_ids_;
    std::vector<std::string> rater_ids_;
    LabelDomain domain_;
    std::vector<std::vector<Rating>> by_item_;
    std::optional<BatchMap> batches_;
    bool fully_crossed_ = false;
    std::size_t n_ratings_ = 0;
    std::uint64_t hash_ = 0;
};

// Accumulates (item, rater, label) triples and validates them into a dataset.
class DatasetBuilder {
public:
    void add(std::string item_id, std::string rater_id, std::int32_t label);
    void set_domain(LabelDomain domain) { explicit_domain_ = std::move(domain); }

    // Throws EmptyDataset, DuplicateRating, UnknownLabel, DegenerateDomain.
    AnnotationDataset build() const;

private:
    struct Triple {
        std::string item;
        std::string rater;
        std::int32_t label;
    };
    std::vector<Triple> triples_;
    std::optional<LabelDomain> explicit_domain_;
};

struct CsvSchema {
    std::string item_col;
    std::string rater_col;
    std::string label_col;
    // optional label string -> code mapping; when present it also fixes the domain
    std::optional<std::map<std::string, std::int32_t>> label_dict;
};

// Long-form CSV with header; dies with MalformedRow (line number in the
// message), DuplicateRating, UnknownLabel or EmptyDataset.
AnnotationDataset ingest_csv(std::istream& in, const CsvSchema& schema);

// Canonical long-form CSV (item_id,rater_id,label), rows sorted by ids.
void serialize_csv(const AnnotationDataset& d, std::ostream& out);

// Versioned dataset container, magic header "RBDS1" followed by a JSON body.
void save_dataset(const AnnotationDataset& d, const std::string& path);
AnnotationDataset load_dataset(const std::string& path);

// Groups items by identical rater set and splits each group into chunks of
// batch_size (deterministic item-id order). Throws NotBatchable.
AnnotationDataset infer_batches(const AnnotationDataset& d, int batch_size);

// Keeps all items, keeps k raters chosen uniformly without replacement.
// Throws KTooLarge or ItemLeftEmpty.
AnnotationDataset downsample_raters(const AnnotationDataset& d, int k, std::uint64_t seed);

struct SynthStructure {
    enum class Kind { Crossed, Batched, Sparse };
    Kind kind = Kind::Crossed;
    int batch_size = 0;   // Batched only
    double density = 1.0; // Sparse only, in (0, 1]

    static SynthStructure crossed() { return {}; }
    static SynthStructure batched(int batch_size) {
        return {Kind::Batched, batch_size, 1.0};
    }
    static SynthStructure sparse(double density) {
        return {Kind::Sparse, 0, density};
    }
};

// Per-item categorical label weights, optionally mixed with a per-rater
// preference so rater columns carry systematic signal.
struct SynthLabelModel {
    // explicit per-item weights (n_items x C); drawn from a symmetric
    // Dirichlet(item_concentration) when empty
    std::vector<std::vector<double>> item_weights;
    double item_concentration = 1.0;
    // probability that a response follows the rater's own preference
    // distribution instead of the item weights
    double rater_bias = 0.0;
    double rater_concentration = 1.0;
};

struct SynthSpec {
    int n_items = 0;
    int n_raters = 0;
    LabelDomain domain = LabelDomain::binary();
    SynthStructure structure;
    SynthLabelModel labels;
    std::uint64_t seed = 0;
};

// Deterministic for a fixed spec. Throws InvalidParams.
AnnotationDataset synth_generate(const SynthSpec& spec);

} // namespace raterboot
